//! Error metrics and significance tests.

mod pearson;
pub mod report;
mod ttest;

pub use pearson::{pearson, CorrelationResult};
pub use ttest::{paired_t_test, student_t_two_sided_p, PairedTestResult};

use serde::{Deserialize, Serialize};

use crate::{Modality, SensorimotorVector, MODALITY_COUNT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("paired inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("input has zero variance; correlation is undefined")]
    ZeroVariance,
    #[error("input contains NaN or infinity")]
    NonFinite,
}

/// Per-modality mean squared error with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub per_modality: [f64; MODALITY_COUNT],
    /// Unweighted mean of `per_modality`.
    pub avg: f64,
    /// Sample standard deviation of per-item squared errors over `sqrt(n)`.
    pub per_modality_stderr: [f64; MODALITY_COUNT],
    pub n: usize,
}

impl MseReport {
    pub fn mse(&self, m: Modality) -> f64 {
        self.per_modality[m.index()]
    }

    pub fn stderr(&self, m: Modality) -> f64 {
        self.per_modality_stderr[m.index()]
    }
}

/// Squared error of every item in every modality.
pub fn squared_errors(
    predictions: &[SensorimotorVector],
    targets: &[SensorimotorVector],
) -> Result<Vec<[f64; MODALITY_COUNT]>, StatsError> {
    if predictions.len() != targets.len() {
        return Err(StatsError::LengthMismatch(predictions.len(), targets.len()));
    }
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| std::array::from_fn(|j| (p.0[j] - t.0[j]).powi(2)))
        .collect())
}

/// Column `m` of a squared-error matrix.
pub fn modality_column(errors: &[[f64; MODALITY_COUNT]], m: Modality) -> Vec<f64> {
    errors.iter().map(|e| e[m.index()]).collect()
}

/// Per-item mean over the eleven modalities.
pub fn item_means(errors: &[[f64; MODALITY_COUNT]]) -> Vec<f64> {
    errors
        .iter()
        .map(|e| e.iter().sum::<f64>() / MODALITY_COUNT as f64)
        .collect()
}

pub fn mse_report(
    predictions: &[SensorimotorVector],
    targets: &[SensorimotorVector],
) -> Result<MseReport, StatsError> {
    let errors = squared_errors(predictions, targets)?;
    if errors.is_empty() {
        return Err(StatsError::TooFew { needed: 1, got: 0 });
    }
    let n = errors.len();
    let nf = n as f64;
    let mut per_modality = [0f64; MODALITY_COUNT];
    let mut per_modality_stderr = [0f64; MODALITY_COUNT];
    for j in 0..MODALITY_COUNT {
        let mean = errors.iter().map(|e| e[j]).sum::<f64>() / nf;
        per_modality[j] = mean;
        if n > 1 {
            let var = errors.iter().map(|e| (e[j] - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            per_modality_stderr[j] = var.sqrt() / nf.sqrt();
        }
    }
    let avg = per_modality.iter().sum::<f64>() / MODALITY_COUNT as f64;
    Ok(MseReport {
        per_modality,
        avg,
        per_modality_stderr,
        n,
    })
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
