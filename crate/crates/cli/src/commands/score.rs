use std::collections::HashSet;
use std::fs::File;

use sense_core::models::Projection;
use sense_core::nonce::{candidates_to_csv, read_candidates_csv, score_candidates, NonceCandidate};
use serde_json::json;

use super::data::{load_embeddings, load_model_file, read_word_list};
use crate::failure::{CmdResult, Failure, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let model_path = s.input("model")?;
    let embeddings = s.input("embeddings")?;
    let format = s.parse("format", "generic-tsv")?;
    let words = s.input("words")?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let (model, metadata) = load_model_file(&model_path)?;
    let candidates = if words.extension().is_some_and(|e| e == "csv") {
        let file = File::open(&words).stage(&format!("opening {}", words.display()))?;
        read_candidates_csv(file).stage(&format!("reading candidates {}", words.display()))?
    } else {
        read_word_list(&words)?.into_iter().map(|w| NonceCandidate::new(w, "")).collect()
    };
    let wanted: HashSet<String> = candidates.iter().map(|c| c.text.to_lowercase()).collect();
    let keep = |t: &str| wanted.contains(&t.to_lowercase());
    let table = load_embeddings(&embeddings, format, Some(&keep))?;
    if table.dim() != model.dim() {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "{} expects {}-dimensional inputs but {} has {}",
            model_path.display(),
            model.dim(),
            embeddings.display(),
            table.dim()
        )));
    }
    let total = candidates.len();
    let (scored, missing) = score_candidates(&model, &table, candidates).stage("scoring candidates")?;
    if !missing.is_empty() {
        log::warn!("{} of {total} words have no embedding row", missing.len());
    }

    out.stamped("scored.csv", &candidates_to_csv(&scored))?;
    let mut missing_csv = String::from("text\n");
    for w in &missing {
        missing_csv.push_str(w);
        missing_csv.push('\n');
    }
    out.stamped("missing.csv", &missing_csv)?;
    out.json(
        "score-report.json",
        json!({
            "architecture": model.architecture(),
            "model_config_hash": metadata.get("config_hash"),
            "words": total,
            "scored": scored.len(),
            "missing": missing.len(),
        }),
    )?;
    Ok(out)
}
