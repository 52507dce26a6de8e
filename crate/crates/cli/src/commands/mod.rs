mod analyze;
mod data;
mod eval;
mod nonce;
mod rates;
mod score;
mod sublexical;
mod survey;
mod train;

use std::fmt::Write as _;

use sense_core::models::{Architecture, Projection, ProjectionModel};
use sense_core::stats::{item_means, modality_column, paired_t_test, PairedTestResult};
use sense_core::{Modality, SensorimotorVector, MODALITY_COUNT};

use crate::failure::{CmdResult, StageExt};
use crate::outputs::Outputs;
use crate::settings::Settings;

pub fn run(s: &mut Settings) -> CmdResult<Outputs> {
    match s.command() {
        "train" => train::run(s),
        "eval" => eval::run(s),
        "score" => score::run(s),
        "nonce" => nonce::run(s),
        "survey" => survey::run(s),
        "rates" => rates::run(s),
        "sublexical" => sublexical::run(s),
        "analyze" => analyze::run(s),
        other => unreachable!("unregistered command {other}"),
    }
}

fn predict(model: &ProjectionModel, inputs: &[&[f64]], what: &str) -> CmdResult<Vec<SensorimotorVector>> {
    model
        .predict_batch(inputs)
        .stage(&format!("predicting {what} with the {} model", model.architecture()))
}

/// Paired tests of baseline against model squared errors, one row per
/// modality plus the per-item average. A positive `mean_diff` means the
/// model has the lower error.
fn paired_rows(
    baseline: &[[f64; MODALITY_COUNT]],
    model: &[[f64; MODALITY_COUNT]],
) -> CmdResult<Vec<(String, PairedTestResult)>> {
    let mut rows = Vec::new();
    for m in Modality::ALL {
        let r = paired_t_test(&modality_column(baseline, m), &modality_column(model, m)).stage("paired t-test")?;
        rows.push((m.key().to_string(), r));
    }
    let r = paired_t_test(&item_means(baseline), &item_means(model)).stage("paired t-test")?;
    rows.push(("average".to_string(), r));
    Ok(rows)
}

/// `architecture,modality,mse,stderr` rows for a grouped bar chart.
fn bar_chart_csv(reports: &[(Architecture, sense_core::stats::MseReport)]) -> String {
    let mut out = String::from("architecture,modality,mse,stderr\n");
    for m in Modality::ALL {
        for (arch, r) in reports {
            let _ = writeln!(out, "{arch},{m},{},{}", r.mse(m), r.stderr(m));
        }
    }
    out
}

/// `entry,<modality predictions>`.
fn predictions_csv(entries: &[&str], predictions: &[SensorimotorVector]) -> String {
    let mut out = String::from("entry");
    for m in Modality::ALL {
        let _ = write!(out, ",{m}");
    }
    out.push('\n');
    for (e, p) in entries.iter().zip(predictions) {
        out.push_str(&csv_field(e));
        for v in p.values() {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
