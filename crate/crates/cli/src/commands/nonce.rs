use sense_core::nonce::{candidates_to_csv, generate_candidates, novelty_filter, parse_ratio, GenerationConfig, LexiconIndex};
use serde_json::json;

use super::data::read_word_list;
use crate::failure::{invalid, CmdResult, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let seeds_path = s.input("seeds")?;
    let lexicon_path = s.opt_input("lexicon")?;
    let config = GenerationConfig {
        per_seed: s.parse("per-seed", "10")?,
        overlap_ratio: parse_ratio(&s.text("overlap", "2/3")).map_err(invalid)?,
        rng_seed: s.parse("rng-seed", "0")?,
    };
    config.validate().map_err(invalid)?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let seeds = read_word_list(&seeds_path)?;
    let lexicon = match &lexicon_path {
        Some(p) => read_word_list(p)?,
        None => seeds.clone(),
    };
    let generated = generate_candidates(&seeds, &config).stage("generating candidates")?;
    log::info!("{} unique candidates from {} seeds", generated.candidates.len(), seeds.len());
    let index = LexiconIndex::build(&lexicon);
    let (kept, report) = novelty_filter(generated.candidates, &index);
    log::info!("{} candidates pass the novelty filters", kept.len());

    out.stamped("candidates.csv", &candidates_to_csv(&kept))?;
    let mut list: String = kept.iter().map(|c| format!("{}\n", c.text)).collect();
    if list.is_empty() {
        list.push('\n');
    }
    out.raw("candidates.txt", list.as_bytes())?;
    out.json(
        "nonce-report.json",
        json!({
            "seeds": seeds.len(),
            "lexicon": lexicon.len(),
            "raw_candidates": generated.raw_count,
            "skipped_short_seeds": generated.skipped_short,
            "skipped_invalid_seeds": generated.skipped_invalid,
            "dropped_edit_distance": report.dropped_edit_distance,
            "dropped_stem": report.dropped_stem,
            "dropped_phonetic": report.dropped_phonetic,
            "kept": report.kept,
        }),
    )?;
    Ok(out)
}
