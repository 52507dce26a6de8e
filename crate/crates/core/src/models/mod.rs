//! Projection models from embedding space onto the sensorimotor norms.
//!
//! Three architectures share the [`Projection`] interface: the training-set
//! mean, cosine-weighted k-nearest neighbours, and a one-hidden-layer MLP with
//! a logistic output layer. [`ProjectionModel`] wraps whichever one was
//! trained and is what gets saved to disk.

mod adam;
mod baseline;
mod container;
mod knn;
mod mlp;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use baseline::{train_baseline, BaselineModel};
pub use container::{load_model, save_model, FORMAT_VERSION, MAGIC};
pub use knn::{KnnModel, DEFAULT_K};
pub use mlp::{train_mlp, CandidateScore, MlpModel, TrainConfig, TrainingReport, HIDDEN_SIZES};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::SensorimotorVector;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("development set is empty")]
    EmptyDevSet,
    #[error("expected a {expected}-dimensional input, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("query vector is all zeros; cosine similarity is undefined")]
    ZeroQuery,
    #[error("k = {k} exceeds the {n} training rows")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("non-finite gradient at parameter {param} in batch {batch} of epoch {epoch}")]
    NonFiniteGradient {
        epoch: usize,
        batch: usize,
        param: usize,
    },
    #[error("gradient and parameter shapes differ ({params} vs {grads})")]
    ShapeMismatch { params: usize, grads: usize },
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("model container: {0}")]
    Container(String),
    #[error("model container checksum mismatch")]
    Checksum,
    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },
}

/// A learned map `f: R^d -> [0, 1]^11`.
pub trait Projection {
    fn dim(&self) -> usize;

    fn predict(&self, query: &[f64]) -> Result<SensorimotorVector, ModelError>;

    /// Predicts every query, in parallel, preserving input order.
    fn predict_batch(&self, queries: &[&[f64]]) -> Result<Vec<SensorimotorVector>, ModelError>
    where
        Self: Sync,
    {
        queries.par_iter().map(|q| self.predict(q)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Baseline,
    Knn,
    Mlp,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Baseline, Architecture::Knn, Architecture::Mlp];

    pub fn key(self) -> &'static str {
        match self {
            Architecture::Baseline => "baseline",
            Architecture::Knn => "knn",
            Architecture::Mlp => "mlp",
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Architecture::Baseline),
            "knn" => Ok(Architecture::Knn),
            "mlp" => Ok(Architecture::Mlp),
            other => Err(format!("unknown architecture `{other}`")),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionModel {
    Baseline(BaselineModel),
    Knn(KnnModel),
    Mlp(MlpModel),
}

impl ProjectionModel {
    pub fn architecture(&self) -> Architecture {
        match self {
            ProjectionModel::Baseline(_) => Architecture::Baseline,
            ProjectionModel::Knn(_) => Architecture::Knn,
            ProjectionModel::Mlp(_) => Architecture::Mlp,
        }
    }
}

impl Projection for ProjectionModel {
    fn dim(&self) -> usize {
        match self {
            ProjectionModel::Baseline(m) => m.dim(),
            ProjectionModel::Knn(m) => m.dim(),
            ProjectionModel::Mlp(m) => m.dim(),
        }
    }

    fn predict(&self, query: &[f64]) -> Result<SensorimotorVector, ModelError> {
        match self {
            ProjectionModel::Baseline(m) => m.predict(query),
            ProjectionModel::Knn(m) => m.predict(query),
            ProjectionModel::Mlp(m) => m.predict(query),
        }
    }
}

impl From<BaselineModel> for ProjectionModel {
    fn from(m: BaselineModel) -> Self {
        ProjectionModel::Baseline(m)
    }
}

impl From<KnnModel> for ProjectionModel {
    fn from(m: KnnModel) -> Self {
        ProjectionModel::Knn(m)
    }
}

impl From<MlpModel> for ProjectionModel {
    fn from(m: MlpModel) -> Self {
        ProjectionModel::Mlp(m)
    }
}

pub(crate) fn check_dim(expected: usize, query: &[f64]) -> Result<(), ModelError> {
    if query.len() != expected {
        return Err(ModelError::DimensionMismatch {
            expected,
            found: query.len(),
        });
    }
    Ok(())
}
