use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::path::{Path, PathBuf};

use sense_core::behavioral::SelectionRateTable;
use sense_core::corpus::EmbeddingFormat;
use sense_core::models::Projection;
use sense_core::stats::report::{correlation_table, correlations_csv};
use sense_core::sublexical::{analyze_modality, grams_csv, score_and_correlate, MissingGram, GRAM_LENGTHS, MIN_SUPPORT};
use sense_core::Modality;
use serde_json::json;

use super::data::{load_embeddings, load_model_file};
use crate::failure::{invalid, CmdResult, Failure, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub struct SublexicalSpec {
    modalities: Vec<Modality>,
    lengths: (usize, usize),
    min_support: usize,
    scoring: Option<(PathBuf, PathBuf, EmbeddingFormat)>,
    missing: MissingGram,
}

impl SublexicalSpec {
    pub fn from_settings(s: &mut Settings) -> CmdResult<Self> {
        let modalities: Vec<Modality> = s.list("modalities", "interoceptive")?;
        if modalities.is_empty() {
            return Err(invalid("`modalities` is empty"));
        }
        let lengths = (
            s.parse("ngram-min", &GRAM_LENGTHS.0.to_string())?,
            s.parse("ngram-max", &GRAM_LENGTHS.1.to_string())?,
        );
        if lengths.0 == 0 || lengths.0 > lengths.1 {
            return Err(invalid(format!("n-gram range {}..={} is empty", lengths.0, lengths.1)));
        }
        let min_support = s.parse("min-support", &MIN_SUPPORT.to_string())?;
        if min_support == 0 {
            return Err(invalid("`min-support` must be positive"));
        }
        let model = s.opt_input("model")?;
        let grams = s.opt_input("gram-embeddings")?;
        let format = s.parse("gram-format", "generic-tsv")?;
        let missing = if s.flag("skip-missing-grams")? {
            MissingGram::Skip
        } else {
            MissingGram::Error
        };
        let scoring = match (model, grams) {
            (Some(m), Some(g)) => Some((m, g, format)),
            (None, None) => None,
            _ => return Err(invalid("scoring n-grams needs both `model` and `gram-embeddings`")),
        };
        Ok(SublexicalSpec {
            modalities,
            lengths,
            min_support,
            scoring,
            missing,
        })
    }

    /// Writes `grams-<modality>.csv` per modality, the union gram list
    /// `grams.txt` for embedding, and, when scoring, `sublexical.csv`.
    pub fn execute(&self, rates: &SelectionRateTable, out: &mut Outputs) -> CmdResult<()> {
        let mut analyses = Vec::new();
        let mut all: BTreeSet<String> = BTreeSet::new();
        for &m in &self.modalities {
            let grams = analyze_modality(rates, m, self.lengths, self.min_support)
                .stage(&format!("sublexical analysis of {m}"))?;
            log::info!("{m}: {} grams above the base rate {}", grams.records.len(), grams.base_rate);
            all.extend(grams.records.iter().map(|r| r.gram.clone()));
            analyses.push(grams);
        }
        let mut list: String = all.iter().map(|g| format!("{g}\n")).collect();
        if list.is_empty() {
            list.push('\n');
        }
        out.raw("grams.txt", list.as_bytes())?;

        let Some((model_path, grams_path, format)) = &self.scoring else {
            for g in &analyses {
                out.stamped(&format!("grams-{}.csv", g.modality), &grams_csv(g, &g.records))?;
            }
            return Ok(());
        };
        let (model, _) = load_model_file(model_path)?;
        let wanted: HashSet<String> = all.iter().map(|g| g.to_lowercase()).collect();
        let keep = |t: &str| wanted.contains(&t.to_lowercase());
        let table = load_embeddings(grams_path, *format, Some(&keep))?;
        check_dim(model.dim(), table.dim(), model_path, grams_path)?;
        let index = table.lowercase_index();
        let embed = |g: &str| {
            index
                .get(&g.to_lowercase())
                .map(|&row| table.row(row).iter().map(|&x| f64::from(x)).collect())
        };

        let mut rows = Vec::new();
        let mut skipped = serde_json::Map::new();
        for g in &analyses {
            let result = score_and_correlate(g, &model, embed, self.missing)
                .stage(&format!("scoring {} n-grams", g.modality))?;
            out.stamped(&format!("grams-{}.csv", g.modality), &grams_csv(g, &result.records))?;
            skipped.insert(g.modality.key().to_string(), json!(result.skipped));
            rows.push((g.modality, result.correlation));
        }
        out.stamped("sublexical.csv", &correlations_csv(&rows))?;
        out.stamped("sublexical.txt", &correlation_table(&rows))?;
        out.json("sublexical-report.json", json!({ "skipped_grams": skipped }))?;
        Ok(())
    }
}

fn check_dim(model: usize, table: usize, model_path: &Path, table_path: &Path) -> CmdResult<()> {
    if model == table {
        return Ok(());
    }
    Err(Failure::Runtime(anyhow::anyhow!(
        "{} expects {model}-dimensional inputs but {} has {table}",
        model_path.display(),
        table_path.display()
    )))
}

pub fn read_rates(path: &Path) -> CmdResult<SelectionRateTable> {
    let file = File::open(path).stage(&format!("opening {}", path.display()))?;
    SelectionRateTable::from_csv(file).stage(&format!("reading rates {}", path.display()))
}

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let rates = s.input("rates")?;
    let spec = SublexicalSpec::from_settings(s)?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;
    let table = read_rates(&rates)?;
    spec.execute(&table, &mut out)?;
    Ok(out)
}
