use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sense_core::behavioral::{load_responses, selection_rates};
use sense_core::nonce::SurveyPlan;
use serde_json::json;

use super::csv_field;
use crate::failure::{CmdResult, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn read_plan(path: &Path) -> CmdResult<SurveyPlan> {
    let text = fs::read_to_string(path).stage(&format!("reading survey {}", path.display()))?;
    SurveyPlan::from_json(&text).stage(&format!("parsing survey {}", path.display()))
}

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let survey = s.input("survey")?;
    let responses = s.input("responses")?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let plan = read_plan(&survey)?;
    let load = load_responses(&responses, &plan).stage("reading responses")?;
    if !load.rejected.is_empty() {
        log::warn!("{} response rows rejected", load.rejected.len());
    }
    let (table, omitted) = selection_rates(&load.records, &plan);

    out.stamped("rates.csv", &table.to_csv())?;
    let mut rejected = String::from("row,reason\n");
    for r in &load.rejected {
        let _ = writeln!(rejected, "{},{}", r.row, csv_field(&r.reason));
    }
    out.stamped("rejected-responses.csv", &rejected)?;
    out.json(
        "rates-report.json",
        json!({
            "records": load.records.len(),
            "rejected": load.rejected.len(),
            "unexposed": omitted
                .iter()
                .map(|(m, w)| json!({ "modality": m, "word": w }))
                .collect::<Vec<_>>(),
        }),
    )?;
    Ok(out)
}
