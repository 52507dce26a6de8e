use crate::corpus::Examples;
use crate::{SensorimotorVector, MODALITY_COUNT};

use super::{check_dim, ModelError, Projection};

/// Predicts the mean training norm vector for every input.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub dim: usize,
    pub mean_norms: SensorimotorVector,
}

pub fn train_baseline(train: &Examples<'_>, dim: usize) -> Result<BaselineModel, ModelError> {
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    let mut sum = [0f64; MODALITY_COUNT];
    for t in &train.targets {
        for (acc, v) in sum.iter_mut().zip(t.values()) {
            *acc += v;
        }
    }
    let n = train.len() as f64;
    Ok(BaselineModel {
        dim,
        mean_norms: SensorimotorVector(sum.map(|s| s / n)),
    })
}

impl Projection for BaselineModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, query: &[f64]) -> Result<SensorimotorVector, ModelError> {
        check_dim(self.dim, query)?;
        Ok(self.mean_norms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn examples<'a>(inputs: &'a [Vec<f64>], targets: &[SensorimotorVector]) -> Examples<'a> {
        Examples {
            inputs: inputs.iter().map(|v| v.as_slice()).collect(),
            targets: targets.to_vec(),
        }
    }

    #[test]
    fn mean_of_extremes_is_half() {
        let x = vec![vec![0.0], vec![1.0]];
        let ex = examples(&x, &[SensorimotorVector::ZERO, SensorimotorVector::splat(1.0)]);
        let m = train_baseline(&ex, 1).unwrap();
        assert_eq!(m.mean_norms, SensorimotorVector::splat(0.5));
        assert_eq!(m.predict(&[123.0]).unwrap(), SensorimotorVector::splat(0.5));
    }

    #[test]
    fn five_word_report_by_hand() {
        // train 0.2, 0.4, 0.9 -> mean 0.5; test 0.1, 0.8 -> (0.16 + 0.09) / 2
        let x = vec![vec![1.0]; 3];
        let train: Vec<_> = [0.2, 0.4, 0.9].map(SensorimotorVector::splat).to_vec();
        let m = train_baseline(&examples(&x, &train), 1).unwrap();
        let test = [0.1, 0.8].map(SensorimotorVector::splat);
        let preds = m.predict_batch(&[&[0.0], &[0.0]]).unwrap();
        let r = crate::stats::mse_report(&preds, &test).unwrap();
        assert!((r.avg - 0.125).abs() < 1e-12);
    }

    #[test]
    fn single_item_is_identity() {
        let x = vec![vec![0.0, 1.0]];
        let mut s = SensorimotorVector::ZERO;
        s.0[3] = 0.7;
        let m = train_baseline(&examples(&x, &[s]), 2).unwrap();
        assert_eq!(m.mean_norms, s);
    }

    #[test]
    fn empty_and_mismatch_errors() {
        let ex = examples(&[], &[]);
        assert!(matches!(train_baseline(&ex, 3), Err(ModelError::EmptyTrainingSet)));
        let x = vec![vec![0.0]];
        let m = train_baseline(&examples(&x, &[SensorimotorVector::ZERO]), 1).unwrap();
        assert!(matches!(
            m.predict(&[0.0, 1.0]),
            Err(ModelError::DimensionMismatch { expected: 1, found: 2 })
        ));
    }
}
