//! Embedding and norm loading, vocabulary alignment and data splits.

mod align;
mod embeddings;
mod norms;
mod split;

pub use align::{align, restrict_to_common, AlignedDataset, AlignedItem, Examples};
pub use embeddings::{
    load_text_embeddings, load_word2vec_binary, read_text_embeddings, read_word2vec_binary,
    write_text_embeddings, write_word2vec_binary, EmbeddingFormat, EmbeddingTable,
};
pub use norms::{load_norms_csv, read_norms_csv, NormsHeaderMap, NormsMap, NormsTable, RejectedRow, RATING_MAX};
pub use split::{split, split_sizes, DataSplit};

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("I/O error: {0}")]
    Stream(#[from] std::io::Error),
    #[error("malformed header at byte offset {offset}: {reason}")]
    Header { offset: u64, reason: String },
    #[error("file truncated at byte offset {offset} while reading record {record}")]
    Truncated { record: usize, offset: u64 },
    #[error("record {record} at byte offset {offset}: token is not valid UTF-8")]
    InvalidToken { record: usize, offset: u64 },
    #[error("embedding dimension must be positive")]
    InvalidDim,
    #[error("duplicate token `{0}`")]
    DuplicateToken(String),
    #[error("empty token")]
    EmptyToken,
    #[error("token `{token}`: vector contains NaN or infinity")]
    NonFinite { token: String },
    #[error("token `{token}`: expected {expected} components, found {found}")]
    VectorLength {
        token: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    InconsistentDim {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: `{field}` is not a number")]
    NonNumeric {
        line: usize,
        column: usize,
        field: String,
    },
    #[error("no embeddings found in input")]
    NoEmbeddings,
    #[error("token `{0}` cannot be written in this format")]
    UnwritableToken(String),
    #[error("norms file is missing column `{0}`")]
    MissingColumn(String),
    #[error("norms CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("header map: {0}")]
    HeaderMap(String),
    #[error("no norm entries could be aligned with the embedding vocabulary ({dropped} dropped)")]
    EmptyAlignment { dropped: usize },
    #[error("dataset has {0} items; at least 10 are required to split")]
    TooSmall(usize),
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File, CorpusError> {
    std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}
