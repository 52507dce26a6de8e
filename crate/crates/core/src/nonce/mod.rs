//! Nonce-word generation, novelty screening, ranking and survey planning.

mod generate;
mod io;
mod novelty;
mod rank;
mod segment;
mod survey;

pub use generate::{generate_candidates, parse_ratio, GenerationConfig, GenerationResult};
pub use io::{candidates_to_csv, read_candidates_csv, CandidateFileError};
pub use novelty::{levenshtein, metaphone_key, novelty_filter, porter_stem, FilterReport, LexiconIndex};
pub use rank::{rank_for_modality, score_candidates, MIN_SCORE, TOP_N};
pub use segment::{segment_subsyllabic, PositionClass, Segment, SegmentKind, Segmentation, SyllableSlot};
pub use survey::{
    build_survey, AssignmentRule, OptionRole, PromptPhrases, SurveyOption, SurveyPlan, SurveyQuestion,
    DISTRACTORS_PER_QUESTION, QUESTIONS_PER_MODALITY, TARGETS_PER_QUESTION,
};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Modality, SensorimotorVector};

#[derive(Debug, thiserror::Error)]
pub enum NonceError {
    #[error("`{0}` is not a lowercase alphabetic word")]
    NotLowercaseAlphabetic(String),
    #[error("seed lexicon is empty")]
    EmptyLexicon,
    #[error("overlap ratio must lie in [0, 1], got {0}")]
    BadRatio(String),
    #[error("per-seed count must be positive")]
    ZeroPerSeed,
    #[error("candidate `{0}` has no scores")]
    Unscored(String),
    #[error("{modality}: need {need}, have {have} candidates scoring above {threshold}")]
    InsufficientSupply {
        modality: Modality,
        need: usize,
        have: usize,
        threshold: f64,
    },
    #[error("{modality}: {reason}")]
    Infeasible { modality: Modality, reason: String },
    #[error("survey plan violates an invariant: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Model(#[from] crate::models::ModelError),
}

/// Novelty checks a candidate has passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterTag {
    EditDistance,
    Stem,
    Phonetic,
}

impl FilterTag {
    pub const ALL: [FilterTag; 3] = [FilterTag::EditDistance, FilterTag::Stem, FilterTag::Phonetic];

    pub fn key(self) -> &'static str {
        match self {
            FilterTag::EditDistance => "edit-distance",
            FilterTag::Stem => "stem",
            FilterTag::Phonetic => "phonetic",
        }
    }
}

impl fmt::Display for FilterTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// A generated pseudoword with its provenance and, once scored, the model's
/// predicted norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonceCandidate {
    pub text: String,
    pub seed_word: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<SensorimotorVector>,
    #[serde(default)]
    pub filters_passed: BTreeSet<FilterTag>,
}

impl NonceCandidate {
    pub fn new(text: impl Into<String>, seed_word: impl Into<String>) -> Self {
        NonceCandidate {
            text: text.into(),
            seed_word: seed_word.into(),
            scores: None,
            filters_passed: BTreeSet::new(),
        }
    }

    pub fn scored(text: impl Into<String>, scores: SensorimotorVector) -> Self {
        NonceCandidate {
            scores: Some(scores),
            ..NonceCandidate::new(text, "")
        }
    }

    pub fn score(&self, m: Modality) -> Option<f64> {
        self.scores.map(|s| s[m])
    }
}
