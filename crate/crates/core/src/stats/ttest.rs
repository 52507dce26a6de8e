use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::{mean, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedTestResult {
    pub t_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub dof: usize,
    /// Mean of `a - b`.
    pub mean_diff: f64,
    /// Set when the differences have zero variance: `t` is then 0 (all
    /// differences zero, `p = 1`) or signed infinity (`p = 0`).
    pub degenerate: bool,
}

/// Two-sided p-value of a Student t statistic:
/// `P(|T| >= |t|) = I_{dof / (dof + t^2)}(dof / 2, 1 / 2)`.
pub fn student_t_two_sided_p(t: f64, dof: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    beta_reg(dof / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Paired t-test on `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTestResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mean_diff = mean(&diffs);
    let var = diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (n - 1) as f64;
    let dof = n - 1;
    if var == 0.0 {
        let (t, p) = if mean_diff == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(mean_diff), 0.0)
        };
        return Ok(PairedTestResult {
            t_statistic: t,
            p_value: p,
            dof,
            mean_diff,
            degenerate: true,
        });
    }
    let t = mean_diff / (var.sqrt() / (n as f64).sqrt());
    Ok(PairedTestResult {
        t_statistic: t,
        p_value: student_t_two_sided_p(t, dof as f64),
        dof,
        mean_diff,
        degenerate: false,
    })
}
