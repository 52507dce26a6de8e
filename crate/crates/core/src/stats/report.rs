//! CSV and plain-text renderings of metric reports.
//!
//! CSV values use Rust's shortest round-trip float formatting so files are
//! byte-stable across runs; text tables round to four decimals.

use std::fmt::Write as _;

use crate::Modality;

use super::{CorrelationResult, MseReport, PairedTestResult};

/// `modality,mse,stderr,n` rows followed by an `average` row.
pub fn mse_csv(report: &MseReport) -> String {
    let mut out = String::from("modality,mse,stderr,n\n");
    for m in Modality::ALL {
        let _ = writeln!(out, "{},{},{},{}", m, report.mse(m), report.stderr(m), report.n);
    }
    let _ = writeln!(out, "average,{},,{}", report.avg, report.n);
    out
}

/// One column per labelled report, one row per modality, plus the average.
pub fn mse_table(columns: &[(&str, &MseReport)]) -> String {
    let mut out = format!("{:<14}", "modality");
    for (label, _) in columns {
        let _ = write!(out, " {label:>12}");
    }
    out.push('\n');
    for m in Modality::ALL {
        let _ = write!(out, "{:<14}", m.key());
        for (_, r) in columns {
            let _ = write!(out, " {:>12.4}", r.mse(m));
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<14}", "MSE_avg");
    for (_, r) in columns {
        let _ = write!(out, " {:>12.4}", r.avg);
    }
    out.push('\n');
    out
}

/// Paired-test rows: `scope,mean_diff,t,p,dof,degenerate`.
pub fn paired_tests_csv(rows: &[(String, PairedTestResult)]) -> String {
    let mut out = String::from("scope,mean_diff,t,p,dof,degenerate\n");
    for (scope, r) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            scope, r.mean_diff, r.t_statistic, r.p_value, r.dof, r.degenerate
        );
    }
    out
}

pub fn correlations_csv(rows: &[(Modality, CorrelationResult)]) -> String {
    let mut out = String::from("modality,n,r,p,stars\n");
    for (m, c) in rows {
        let _ = writeln!(out, "{},{},{},{},{}", m, c.n, c.r, c.p_value, c.stars());
    }
    out
}

/// Rows sorted by descending r, r printed with significance stars.
pub fn correlation_table(rows: &[(Modality, CorrelationResult)]) -> String {
    let mut sorted: Vec<&(Modality, CorrelationResult)> = rows.iter().collect();
    sorted.sort_by(|a, b| b.1.r.total_cmp(&a.1.r).then(a.0.cmp(&b.0)));
    let mut out = format!("{:<14} {:>4} {:>10} {:>10}\n", "modality", "n", "r", "p");
    for (m, c) in sorted {
        let r = format!("{:.2}{}", c.r, c.stars());
        let _ = writeln!(out, "{:<14} {:>4} {:>10} {:>10.4}", m.key(), c.n, r, c.p_value);
    }
    out
}
