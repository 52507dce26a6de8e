//! Input loading shared by several commands.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use sense_core::corpus::{
    align, load_norms_csv, load_text_embeddings, load_word2vec_binary, restrict_to_common, AlignedDataset,
    EmbeddingFormat, EmbeddingTable, NormsHeaderMap,
};
use sense_core::kv::read_kv;
use sense_core::models::{load_model, ProjectionModel};
use serde_json::{json, Value};

use crate::failure::{invalid, CmdResult, StageExt};
use crate::settings::Settings;

pub fn load_embeddings(
    path: &Path,
    format: EmbeddingFormat,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> CmdResult<EmbeddingTable> {
    let stage = format!("loading embeddings {}", path.display());
    let table = match format {
        EmbeddingFormat::Word2vecBinary => load_word2vec_binary(path, keep),
        _ => load_text_embeddings(path, format, keep),
    }
    .stage(&stage)?;
    log::info!("{}: {} vectors of dimension {}", path.display(), table.len(), table.dim());
    Ok(table)
}

pub fn load_model_file(path: &Path) -> CmdResult<(ProjectionModel, Value)> {
    let bytes = fs::read(path).stage(&format!("reading model {}", path.display()))?;
    load_model(&bytes).stage(&format!("decoding model {}", path.display()))
}

/// One word per line; blank lines are skipped and surrounding whitespace
/// trimmed.
pub fn read_word_list(path: &Path) -> CmdResult<Vec<String>> {
    let text = fs::read_to_string(path).stage(&format!("reading word list {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Norms plus one or more embedding files, aligned on the norm entries.
pub struct CorpusSpec {
    embeddings: PathBuf,
    format: EmbeddingFormat,
    intersect: Vec<(EmbeddingFormat, PathBuf)>,
    norms: PathBuf,
    header: NormsHeaderMap,
}

impl CorpusSpec {
    pub fn from_settings(s: &mut Settings) -> CmdResult<Self> {
        let embeddings = s.input("embeddings")?;
        let format = s.parse("format", "word2vec-binary")?;
        let mut intersect = Vec::new();
        for (i, item) in s.list::<String>("intersect", "")?.into_iter().enumerate() {
            let (fmt, path) = item
                .split_once(':')
                .ok_or_else(|| invalid(format!("`intersect` item `{item}` must be FORMAT:PATH")))?;
            let fmt: EmbeddingFormat = fmt.parse().map_err(invalid)?;
            let path = PathBuf::from(path);
            s.record_input(&format!("intersect-{}", i + 1), &path)?;
            intersect.push((fmt, path));
        }
        let norms = s.input("norms")?;
        let header = match s.opt_input("norms-header")? {
            Some(p) => {
                let map = read_kv(&p).map_err(|e| invalid(format!("norms header map: {e}")))?;
                NormsHeaderMap::from_kv(&map).map_err(|e| invalid(format!("norms header map: {e}")))?
            }
            None => NormsHeaderMap::default(),
        };
        Ok(CorpusSpec {
            embeddings,
            format,
            intersect,
            norms,
            header,
        })
    }

    /// The aligned dataset of the primary embedding file and a JSON summary
    /// of what was read, rejected and dropped.
    pub fn load(&self) -> CmdResult<(AlignedDataset, Value)> {
        let norms = load_norms_csv(&self.norms, &self.header).stage(&format!("loading norms {}", self.norms.display()))?;
        for r in norms.rejected.iter().take(20) {
            log::warn!("norms row {}: {}", r.row, r.reason);
        }
        let mut wanted: HashSet<String> = HashSet::new();
        for entry in norms.entries.keys() {
            wanted.insert(entry.to_lowercase());
            wanted.extend(entry.split_whitespace().map(str::to_lowercase));
        }
        let keep = |t: &str| wanted.contains(&t.to_lowercase());

        let mut sources = vec![(self.format, self.embeddings.clone())];
        sources.extend(self.intersect.iter().cloned());
        let mut datasets = Vec::new();
        for (fmt, path) in &sources {
            let table = load_embeddings(path, *fmt, Some(&keep))?;
            datasets.push(align(&table, &norms.entries).stage(&format!("aligning {} with the norms", path.display()))?);
        }
        if datasets.len() > 1 {
            restrict_to_common(&mut datasets);
        }
        let dataset = datasets.swap_remove(0);
        let summary = json!({
            "norms_entries": norms.entries.len(),
            "norms_rejected": norms.rejected.len(),
            "norms_duplicates": norms.duplicates,
            "aligned": dataset.len(),
            "dropped": dataset.dropped,
            "dim": dataset.dim,
            "rejected_rows": norms
                .rejected
                .iter()
                .map(|r| json!({ "row": r.row, "reason": r.reason }))
                .collect::<Vec<_>>(),
        });
        log::info!("aligned {} entries ({} dropped)", dataset.len(), dataset.dropped);
        Ok((dataset, summary))
    }
}
