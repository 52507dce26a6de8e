use std::collections::BTreeSet;

use crate::SensorimotorVector;

use super::{CorpusError, EmbeddingFormat, EmbeddingTable, NormsMap};

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedItem {
    pub entry: String,
    pub vector: Vec<f64>,
    pub norms: SensorimotorVector,
}

/// Norm entries paired with their embedding, sorted by entry.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    pub dim: usize,
    pub items: Vec<AlignedItem>,
    /// Norm entries dropped because some constituent had no embedding.
    pub dropped: usize,
}

/// Borrowed inputs and targets for training or evaluation.
#[derive(Debug, Clone)]
pub struct Examples<'a> {
    pub inputs: Vec<&'a [f64]>,
    pub targets: Vec<SensorimotorVector>,
}

impl<'a> Examples<'a> {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

impl AlignedDataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn examples(&self, indices: &[usize]) -> Examples<'_> {
        Examples {
            inputs: indices.iter().map(|&i| self.items[i].vector.as_slice()).collect(),
            targets: indices.iter().map(|&i| self.items[i].norms).collect(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|it| it.entry.as_str())
    }

    /// The aligned vectors as an embedding table keyed by entry.
    pub fn to_embedding_table(&self) -> EmbeddingTable {
        let mut t = EmbeddingTable::with_capacity(self.dim, EmbeddingFormat::GenericTsv, self.len())
            .expect("aligned dimension is positive");
        let mut buf = Vec::with_capacity(self.dim);
        for it in &self.items {
            buf.clear();
            buf.extend(it.vector.iter().map(|&v| v as f32));
            t.insert(&it.entry, &buf).expect("aligned entries are unique");
        }
        t
    }

    pub fn norms_map(&self) -> NormsMap {
        self.items.iter().map(|it| (it.entry.clone(), it.norms)).collect()
    }
}

/// Pairs every norm entry with an embedding.
///
/// Lookup is case-insensitive. An entry that exists as a token is used
/// directly; otherwise it is split on whitespace and included only if every
/// constituent word has a vector, in which case its vector is the mean of the
/// constituents. Entries with a missing constituent are dropped and counted.
pub fn align(embeddings: &EmbeddingTable, norms: &NormsMap) -> Result<AlignedDataset, CorpusError> {
    let lower = embeddings.lowercase_index();
    let dim = embeddings.dim();
    let mut items = Vec::new();
    let mut dropped = 0;

    'entries: for (entry, sm) in norms {
        let key = entry.to_lowercase();
        let mut vector = vec![0f64; dim];
        if let Some(&row) = lower.get(&key) {
            for (acc, &v) in vector.iter_mut().zip(embeddings.row(row)) {
                *acc = v as f64;
            }
        } else {
            let words: Vec<&str> = key.split_whitespace().collect();
            if words.len() < 2 {
                dropped += 1;
                continue;
            }
            for w in &words {
                let Some(&row) = lower.get(*w) else {
                    dropped += 1;
                    continue 'entries;
                };
                for (acc, &v) in vector.iter_mut().zip(embeddings.row(row)) {
                    *acc += v as f64;
                }
            }
            let n = words.len() as f64;
            vector.iter_mut().for_each(|v| *v /= n);
        }
        items.push(AlignedItem {
            entry: entry.clone(),
            vector,
            norms: *sm,
        });
    }

    if items.is_empty() {
        return Err(CorpusError::EmptyAlignment { dropped });
    }
    Ok(AlignedDataset {
        dim,
        items,
        dropped,
    })
}

/// Restricts several aligned datasets to the entries present in all of them,
/// so that each embedding type is evaluated on the same vocabulary.
pub fn restrict_to_common(datasets: &mut [AlignedDataset]) {
    let Some(first) = datasets.first() else { return };
    let mut common: BTreeSet<String> = first.entries().map(String::from).collect();
    for ds in &datasets[1..] {
        let here: BTreeSet<&str> = ds.entries().collect();
        common.retain(|e| here.contains(e.as_str()));
    }
    for ds in datasets.iter_mut() {
        let before = ds.items.len();
        ds.items.retain(|it| common.contains(&it.entry));
        ds.dropped += before - ds.items.len();
    }
}
