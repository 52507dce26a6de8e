use sense_core::behavioral::{analyze_plan, scatter_csv};
use sense_core::stats::report::{correlation_table, correlations_csv};
use serde_json::json;

use super::rates::read_plan;
use super::sublexical::{read_rates, SublexicalSpec};
use crate::failure::CmdResult;
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    let survey = s.input("survey")?;
    let rates = s.input("rates")?;
    let expected: usize = s.parse("expected-words", "28")?;
    let sublexical = SublexicalSpec::from_settings(s)?;
    let out_dir = s.out_dir()?;
    let mut out = Outputs::create(&out_dir, &s.config_hash())?;

    let plan = read_plan(&survey)?;
    let table = read_rates(&rates)?;
    let analysis = analyze_plan(&table, &plan, (expected > 0).then_some(expected));
    for (m, reason) in &analysis.failures {
        log::warn!("{m}: no correlation ({reason})");
    }
    out.stamped("correlations.csv", &correlations_csv(&analysis.correlations))?;
    out.stamped("correlations.txt", &correlation_table(&analysis.correlations))?;
    out.stamped("scatter.csv", &scatter_csv(&analysis.points))?;
    out.json(
        "analyze-report.json",
        json!({
            "failures": analysis
                .failures
                .iter()
                .map(|(m, r)| json!({ "modality": m, "reason": r }))
                .collect::<Vec<_>>(),
        }),
    )?;
    sublexical.execute(&table, &mut out)?;
    Ok(out)
}
