use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;

use sense_core::kv::read_kv;
use sense_core::nonce::{
    build_survey, rank_for_modality, read_candidates_csv, PromptPhrases, QUESTIONS_PER_MODALITY, TARGETS_PER_QUESTION,
};
use sense_core::Modality;

use crate::failure::{invalid, CmdResult, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let scores = s.input("scores")?;
    let min_score: f64 = s.parse("min-score", "0.5")?;
    if !(0.0..1.0).contains(&min_score) {
        return Err(invalid(format!("`min-score` must lie in [0, 1), got {min_score}")));
    }
    let need = QUESTIONS_PER_MODALITY * TARGETS_PER_QUESTION;
    let top_n: usize = s.parse("top-n", &need.to_string())?;
    if top_n < need {
        return Err(invalid(format!("`top-n` must be at least {need}, got {top_n}")));
    }
    let rng_seed: u64 = s.parse("rng-seed", "0")?;
    let phrases = match s.opt_input("phrases")? {
        Some(p) => {
            let map = read_kv(&p).map_err(|e| invalid(format!("prompt phrases: {e}")))?;
            PromptPhrases::with_overrides(&map).map_err(|e| invalid(format!("prompt phrases: {e}")))?
        }
        None => PromptPhrases::default(),
    };
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let file = File::open(&scores).stage(&format!("opening {}", scores.display()))?;
    let candidates = read_candidates_csv(file).stage(&format!("reading scored candidates {}", scores.display()))?;
    let mut ranked = BTreeMap::new();
    for m in Modality::ALL {
        let top = rank_for_modality(&candidates, m, top_n, min_score).stage("ranking candidates")?;
        ranked.insert(m, top);
    }
    let mut seen = HashSet::new();
    let pool: Vec<_> = ranked
        .values()
        .flatten()
        .filter(|c| seen.insert(c.text.clone()))
        .cloned()
        .collect();
    let plan = build_survey(&ranked, &pool, rng_seed, min_score, &phrases).stage("building survey")?;
    plan.validate().stage("checking survey")?;
    log::info!("{} questions from a pool of {} ranked words", plan.questions.len(), pool.len());

    out.json("survey.json", plan.to_json())?;
    out.stamped("survey.csv", &plan.to_csv())?;
    let mut top = String::from("modality,rank,word,score\n");
    for (m, list) in &ranked {
        for (i, c) in list.iter().enumerate() {
            let _ = writeln!(top, "{m},{},{},{}", i + 1, c.text, c.score(*m).expect("ranked candidates are scored"));
        }
    }
    out.stamped("top-words.csv", &top)?;
    Ok(out)
}
