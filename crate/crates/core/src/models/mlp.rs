use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Examples;
use crate::{SensorimotorVector, MODALITY_COUNT};

use super::adam::{adam_update, AdamConfig, AdamState};
use super::{check_dim, ModelError, Projection};

/// Hidden-layer widths tried during training; the one with the lower dev
/// error is kept, the smaller on a tie.
pub const HIDDEN_SIZES: [usize; 2] = [64, 128];

const OUT: usize = MODALITY_COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub hidden_sizes: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 10,
            batch_size: 128,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            hidden_sizes: HIDDEN_SIZES.to_vec(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::InvalidConfig(msg.to_string()));
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return bad("hidden sizes must be non-empty and positive");
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }
}

/// Dev-set outcome of one hidden-layer width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub hidden_size: usize,
    pub dev_mse_avg: f64,
    pub final_train_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub chosen_hidden_size: usize,
    pub candidates: Vec<CandidateScore>,
}

/// One-hidden-layer perceptron: `logistic(W2 · relu(W1 · x + b1) + b2)`.
///
/// Parameters live in one flat buffer laid out as `W1` (hidden × dim,
/// row-major), `b1`, `W2` (11 × hidden, row-major), `b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    dim: usize,
    hidden: usize,
    params: Vec<f64>,
}

/// Logistic function kept strictly inside (0, 1) even where it saturates in
/// double precision.
fn logistic(z: f64) -> f64 {
    let y = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    y.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

impl MlpModel {
    pub fn param_count(dim: usize, hidden: usize) -> usize {
        hidden * dim + hidden + OUT * hidden + OUT
    }

    pub fn zeros(dim: usize, hidden: usize) -> Self {
        MlpModel {
            dim,
            hidden,
            params: vec![0.0; Self::param_count(dim, hidden)],
        }
    }

    /// Builds a model from explicit weights. Any positive width is accepted.
    pub fn from_parts(
        dim: usize,
        hidden: usize,
        w1: &[f64],
        b1: &[f64],
        w2: &[f64],
        b2: &[f64],
    ) -> Result<Self, ModelError> {
        if dim == 0 || hidden == 0 {
            return Err(ModelError::InvalidConfig("dim and hidden must be positive".into()));
        }
        if w1.len() != hidden * dim || b1.len() != hidden || w2.len() != OUT * hidden || b2.len() != OUT {
            return Err(ModelError::InvalidConfig("weight shapes do not match dim/hidden".into()));
        }
        let mut params = Vec::with_capacity(Self::param_count(dim, hidden));
        params.extend_from_slice(w1);
        params.extend_from_slice(b1);
        params.extend_from_slice(w2);
        params.extend_from_slice(b2);
        Ok(MlpModel { dim, hidden, params })
    }

    pub(crate) fn from_flat(dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self, ModelError> {
        if dim == 0 || hidden == 0 || params.len() != Self::param_count(dim, hidden) {
            return Err(ModelError::Container("MLP parameter block has the wrong length".into()));
        }
        Ok(MlpModel { dim, hidden, params })
    }

    /// He-style uniform initialization: weights drawn from
    /// `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`, biases zero.
    pub fn init<R: Rng>(dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(dim, hidden);
        let l1 = (6.0 / dim as f64).sqrt();
        let l2 = (6.0 / hidden as f64).sqrt();
        let (w1_end, w2_start) = (hidden * dim, hidden * dim + hidden);
        for w in &mut m.params[..w1_end] {
            *w = rng.gen_range(-l1..l1);
        }
        for w in &mut m.params[w2_start..w2_start + OUT * hidden] {
            *w = rng.gen_range(-l2..l2);
        }
        m
    }

    pub fn hidden_size(&self) -> usize {
        self.hidden
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let (w1, rest) = self.params.split_at(self.hidden * self.dim);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(OUT * self.hidden);
        (w1, b1, w2, b2)
    }

    /// Forward pass; fills `pre` with hidden pre-activations.
    fn forward(&self, x: &[f64], pre: &mut [f64]) -> [f64; OUT] {
        let (w1, b1, w2, b2) = self.split();
        for (k, a) in pre.iter_mut().enumerate() {
            let row = &w1[k * self.dim..(k + 1) * self.dim];
            *a = b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        let mut out = [0f64; OUT];
        for (j, o) in out.iter_mut().enumerate() {
            let row = &w2[j * self.hidden..(j + 1) * self.hidden];
            let z = b2[j] + row.iter().zip(pre.iter()).map(|(w, a)| w * a.max(0.0)).sum::<f64>();
            *o = logistic(z);
        }
        out
    }

    /// Mean squared error over every (example, modality) pair.
    pub fn loss(&self, inputs: &[&[f64]], targets: &[SensorimotorVector]) -> f64 {
        let mut pre = vec![0.0; self.hidden];
        let mut total = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            let y = self.forward(x, &mut pre);
            total += y.iter().zip(t.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        }
        total / (inputs.len() * OUT) as f64
    }

    /// Loss and its gradient with respect to every parameter. `grad` is
    /// overwritten.
    pub fn loss_and_gradient(
        &self,
        inputs: &[&[f64]],
        targets: &[SensorimotorVector],
        grad: &mut [f64],
    ) -> f64 {
        debug_assert_eq!(grad.len(), self.params.len());
        grad.iter_mut().for_each(|g| *g = 0.0);
        let (h, d) = (self.hidden, self.dim);
        let (_, _, w2, _) = self.split();
        let (g_w1, rest) = grad.split_at_mut(h * d);
        let (g_b1, rest) = rest.split_at_mut(h);
        let (g_w2, g_b2) = rest.split_at_mut(OUT * h);

        let scale = 2.0 / (inputs.len() * OUT) as f64;
        let mut pre = vec![0.0; h];
        let mut d_hidden = vec![0.0; h];
        let mut total = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            let y = self.forward(x, &mut pre);
            d_hidden.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..OUT {
                let err = y[j] - t.0[j];
                total += err * err;
                let dz = scale * err * y[j] * (1.0 - y[j]);
                g_b2[j] += dz;
                let w_row = &w2[j * h..(j + 1) * h];
                let g_row = &mut g_w2[j * h..(j + 1) * h];
                for k in 0..h {
                    g_row[k] += dz * pre[k].max(0.0);
                    d_hidden[k] += w_row[k] * dz;
                }
            }
            for k in 0..h {
                if pre[k] <= 0.0 {
                    continue;
                }
                let da = d_hidden[k];
                g_b1[k] += da;
                for (g, v) in g_w1[k * d..(k + 1) * d].iter_mut().zip(x.iter()) {
                    *g += da * v;
                }
            }
        }
        total / (inputs.len() * OUT) as f64
    }
}

impl Projection for MlpModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, query: &[f64]) -> Result<SensorimotorVector, ModelError> {
        check_dim(self.dim, query)?;
        let mut pre = vec![0.0; self.hidden];
        Ok(SensorimotorVector(self.forward(query, &mut pre)))
    }
}

fn check_examples(ex: &Examples<'_>, dim: usize) -> Result<(), ModelError> {
    ex.inputs.iter().try_for_each(|x| check_dim(dim, x))
}

fn train_one(
    train: &Examples<'_>,
    dim: usize,
    hidden: usize,
    config: &TrainConfig,
) -> Result<(MlpModel, f64), ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(hidden as u64);
    let mut model = MlpModel::init(dim, hidden, &mut rng);
    let mut state = AdamState::new(model.params.len());
    let mut grad = vec![0.0; model.params.len()];
    let adam = config.adam();
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut batch_x: Vec<&[f64]> = Vec::with_capacity(config.batch_size);
    let mut batch_t = Vec::with_capacity(config.batch_size);
    let mut epoch_loss = f64::NAN;

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            batch_x.clear();
            batch_t.clear();
            for &i in chunk {
                batch_x.push(train.inputs[i]);
                batch_t.push(train.targets[i]);
            }
            sum += model.loss_and_gradient(&batch_x, &batch_t, &mut grad) * chunk.len() as f64;
            adam_update(&mut model.params, &grad, &mut state, &adam).map_err(|e| match e {
                ModelError::NonFiniteGradient { param, .. } => {
                    ModelError::NonFiniteGradient { epoch, batch, param }
                }
                other => other,
            })?;
        }
        epoch_loss = sum / train.len() as f64;
        log::debug!("hidden {hidden} epoch {epoch}: train loss {epoch_loss:.6}");
    }
    Ok((model, epoch_loss))
}

/// Trains one model per configured hidden width with mini-batch Adam on the
/// mean squared error and keeps the one with the lower dev error.
pub fn train_mlp(
    train: &Examples<'_>,
    dev: &Examples<'_>,
    dim: usize,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainingReport), ModelError> {
    config.validate()?;
    if train.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if dev.is_empty() {
        return Err(ModelError::EmptyDevSet);
    }
    check_examples(train, dim)?;
    check_examples(dev, dim)?;

    let mut best: Option<(MlpModel, f64)> = None;
    let mut candidates = Vec::new();
    for &hidden in &config.hidden_sizes {
        let (model, final_train_loss) = train_one(train, dim, hidden, config)?;
        let dev_mse_avg = model.loss(&dev.inputs, &dev.targets);
        candidates.push(CandidateScore {
            hidden_size: hidden,
            dev_mse_avg,
            final_train_loss,
        });
        let better = match &best {
            None => true,
            Some((b, score)) => {
                dev_mse_avg < *score || (dev_mse_avg == *score && hidden < b.hidden)
            }
        };
        if better {
            best = Some((model, dev_mse_avg));
        }
    }
    let (model, _) = best.expect("at least one hidden size");
    let report = TrainingReport {
        chosen_hidden_size: model.hidden,
        candidates,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Modality;

    #[test]
    fn zero_weights_give_one_half() {
        let m = MlpModel::zeros(4, 3);
        assert_eq!(m.predict(&[1.0, -2.0, 3.0, 0.5]).unwrap(), SensorimotorVector::splat(0.5));
    }

    #[test]
    fn hand_computed_forward_pass() {
        // x = (1, 2)
        // a = W1 x + b1 = (1*1 + -1*2 + 0.5, 0.5*1 + 0.25*2 - 1) = (-0.5, 0.0)
        // h = relu(a) = (0, 0)   -> outputs are logistic(b2)
        // with b1[1] = -0.5 instead: a2 = 0.5, h = (0, 0.5)
        let w1 = [1.0, -1.0, 0.5, 0.25];
        let b1 = [0.5, -0.5];
        let mut w2 = [0.0; 22];
        for j in 0..11 {
            w2[2 * j] = 1.0;
            w2[2 * j + 1] = j as f64 - 5.0;
        }
        let b2: Vec<f64> = (0..11).map(|j| 0.1 * j as f64).collect();
        let m = MlpModel::from_parts(2, 2, &w1, &b1, &w2, &b2).unwrap();
        let out = m.predict(&[1.0, 2.0]).unwrap();
        for j in 0..11 {
            // z_j = 1 * 0 + (j - 5) * 0.5 + 0.1 j
            let z = (j as f64 - 5.0) * 0.5 + 0.1 * j as f64;
            let expected = 1.0 / (1.0 + (-z).exp());
            assert!((out.0[j] - expected).abs() < 1e-9, "{j}");
        }
    }

    proptest::proptest! {
        #[test]
        fn outputs_stay_in_open_unit_interval(
            seed: u64,
            x in proptest::collection::vec(-1e4f64..1e4, 5),
        ) {
            let m = MlpModel::init(5, 8, &mut ChaCha8Rng::seed_from_u64(seed));
            let p = m.predict(&x).unwrap();
            proptest::prop_assert!(p.values().iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = MlpModel::zeros(3, 2);
        assert!(matches!(m.predict(&[1.0]), Err(ModelError::DimensionMismatch { .. })));
        let x = [vec![1.0, 2.0]];
        let ex = Examples {
            inputs: x.iter().map(|v| v.as_slice()).collect(),
            targets: vec![SensorimotorVector::ZERO],
        };
        assert!(matches!(
            train_mlp(&ex, &ex, 3, &TrainConfig::default()),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    fn relative_error(a: f64, b: f64) -> f64 {
        let denom = a.abs().max(b.abs());
        if denom < 1e-10 {
            (a - b).abs()
        } else {
            (a - b).abs() / denom
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (dim, hidden) = (4, 3);
        let mut model = MlpModel::init(dim, hidden, &mut rng);
        for b in &mut model.params[hidden * dim..hidden * dim + hidden] {
            *b = rng.gen_range(0.1..0.5);
        }
        let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let inputs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let targets: Vec<SensorimotorVector> = (0..5)
            .map(|_| SensorimotorVector(std::array::from_fn(|_| rng.gen_range(0.0..1.0))))
            .collect();
        let mut grad = vec![0.0; model.params.len()];
        model.loss_and_gradient(&inputs, &targets, &mut grad);

        let h = 1e-5;
        for p in 0..model.params.len() {
            let orig = model.params[p];
            model.params[p] = orig + h;
            let up = model.loss(&inputs, &targets);
            model.params[p] = orig - h;
            let down = model.loss(&inputs, &targets);
            model.params[p] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(grad[p], numeric);
            assert!(err < 1e-4, "param {p}: analytic {} numeric {numeric}", grad[p]);
        }
    }

    #[test]
    fn memorizes_a_single_pattern() {
        // With batch size 128, 64 rows make one Adam step per epoch, and ten
        // steps of at most 1e-3 per parameter cannot move a randomly
        // initialized logistic layer onto an arbitrary target. Batches of 4
        // give 160 steps within the same 10 epochs.
        let x: Vec<f64> = vec![0.9, -0.4, 0.3, 0.7, -0.8, 0.5, 0.1, -0.6];
        let mut target = SensorimotorVector::ZERO;
        for (i, m) in Modality::ALL.iter().enumerate() {
            target[*m] = 0.1 + 0.07 * i as f64;
        }
        let inputs = vec![x.as_slice(); 64];
        let ex = Examples {
            inputs,
            targets: vec![target; 64],
        };
        let config = TrainConfig {
            batch_size: 4,
            ..TrainConfig::default()
        };
        assert_eq!(config.epochs, 10);
        let (model, report) = train_mlp(&ex, &ex, 8, &config).unwrap();
        let dev = model.loss(&ex.inputs, &ex.targets);
        assert!(dev < 0.01, "dev MSE_avg {dev}, report {report:?}");
        assert_eq!(report.candidates.len(), 2);
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<Vec<f64>> = (0..300).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let ys: Vec<SensorimotorVector> = xs
            .iter()
            .map(|x| SensorimotorVector(std::array::from_fn(|j| logistic(x[j % 6]))))
            .collect();
        let ex = Examples {
            inputs: xs.iter().map(|v| v.as_slice()).collect(),
            targets: ys,
        };
        let config = TrainConfig {
            seed: 99,
            epochs: 2,
            ..TrainConfig::default()
        };
        let (a, ra) = train_mlp(&ex, &ex, 6, &config).unwrap();
        let (b, rb) = train_mlp(&ex, &ex, 6, &config).unwrap();
        assert_eq!(ra, rb);
        assert!(a.params.iter().zip(&b.params).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert!([64, 128].contains(&a.hidden_size()));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let c = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(c.validate(), Err(ModelError::InvalidConfig(_))));
    }
}
