use std::cmp::Ordering;

use crate::corpus::Examples;
use crate::{SensorimotorVector, MODALITY_COUNT};

use super::{check_dim, ModelError, Projection};

pub const DEFAULT_K: usize = 5;

/// Cosine-similarity k-nearest-neighbour regressor.
///
/// Neighbour weights are the similarities clamped at zero and renormalized to
/// sum to one; when no neighbour has positive similarity the k neighbours are
/// weighted uniformly. Equal similarities are ordered by training index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    dim: usize,
    vectors: Vec<f64>,
    lengths: Vec<f64>,
    norms: Vec<SensorimotorVector>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub similarity: f64,
    pub weight: f64,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclidean(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl KnnModel {
    pub fn fit(train: &Examples<'_>, dim: usize, k: usize) -> Result<Self, ModelError> {
        if train.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if k == 0 {
            return Err(ModelError::ZeroK);
        }
        if k > train.len() {
            return Err(ModelError::KTooLarge { k, n: train.len() });
        }
        let mut vectors = Vec::with_capacity(train.len() * dim);
        let mut lengths = Vec::with_capacity(train.len());
        for x in &train.inputs {
            check_dim(dim, x)?;
            vectors.extend_from_slice(x);
            lengths.push(euclidean(x));
        }
        Ok(KnnModel {
            k,
            dim,
            vectors,
            lengths,
            norms: train.targets.clone(),
        })
    }

    /// Rebuilds a model from stored parts (used by the container reader).
    pub(crate) fn from_parts(
        k: usize,
        dim: usize,
        vectors: Vec<f64>,
        norms: Vec<SensorimotorVector>,
    ) -> Result<Self, ModelError> {
        if k == 0 {
            return Err(ModelError::ZeroK);
        }
        if vectors.len() != dim * norms.len() {
            return Err(ModelError::Container("kNN vector block has the wrong length".into()));
        }
        if k > norms.len() {
            return Err(ModelError::KTooLarge { k, n: norms.len() });
        }
        let lengths = vectors.chunks_exact(dim).map(euclidean).collect();
        Ok(KnnModel {
            k,
            dim,
            vectors,
            lengths,
            norms,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn train_vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn train_norms(&self) -> &[SensorimotorVector] {
        &self.norms
    }

    /// The k nearest training rows with their weights, most similar first.
    pub fn neighbors(&self, query: &[f64]) -> Result<Vec<Neighbor>, ModelError> {
        check_dim(self.dim, query)?;
        let qlen = euclidean(query);
        if qlen == 0.0 {
            return Err(ModelError::ZeroQuery);
        }
        let mut scored: Vec<(usize, f64)> = self
            .vectors
            .chunks_exact(self.dim)
            .zip(&self.lengths)
            .enumerate()
            .map(|(i, (row, &len))| {
                let sim = if len == 0.0 { 0.0 } else { dot(query, row) / (qlen * len) };
                (i, sim)
            })
            .collect();

        let order = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
        };
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, order);
            scored.truncate(self.k);
        }
        scored.sort_unstable_by(order);

        let total: f64 = scored.iter().map(|&(_, s)| s.max(0.0)).sum();
        let uniform = 1.0 / self.k as f64;
        Ok(scored
            .into_iter()
            .map(|(index, similarity)| Neighbor {
                index,
                similarity,
                weight: if total > 0.0 { similarity.max(0.0) / total } else { uniform },
            })
            .collect())
    }
}

impl Projection for KnnModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn predict(&self, query: &[f64]) -> Result<SensorimotorVector, ModelError> {
        let mut out = [0f64; MODALITY_COUNT];
        for n in self.neighbors(query)? {
            for (acc, v) in out.iter_mut().zip(self.norms[n.index].values()) {
                *acc += n.weight * v;
            }
        }
        Ok(SensorimotorVector(out.map(|v| v.clamp(0.0, 1.0))))
    }
}
