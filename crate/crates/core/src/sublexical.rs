//! Recurring character n-grams in nonce words, their conditional selection
//! rates, and their correlation with model scores for the bare n-gram.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::behavioral::SelectionRateTable;
use crate::models::{ModelError, Projection};
use crate::stats::{pearson, CorrelationResult, StatsError};
use crate::Modality;

pub const MIN_SUPPORT: usize = 3;
pub const GRAM_LENGTHS: (usize, usize) = (2, 4);
/// Margin over the base rate above which a gram is reported as strong.
pub const STRONG_MARGIN: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum SublexicalError {
    #[error("no selection rate for `{word}` under {modality}")]
    MissingRate { word: String, modality: Modality },
    #[error("no embedding for n-gram `{0}`")]
    MissingEmbedding(String),
    #[error("n-gram `{0}` has no selection rate yet")]
    Unrated(String),
    #[error("no words rated under {0}")]
    NoWords(Modality),
    #[error("n-gram lengths must satisfy 1 <= min <= max, got {0}..={1}")]
    BadLengths(usize, usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{modality}: {source}")]
    Correlation {
        modality: Modality,
        #[source]
        source: StatsError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramRecord {
    pub gram: String,
    pub containing_words: BTreeSet<String>,
    /// Mean selection rate of the containing words.
    pub p_h: Option<f64>,
    /// Model prediction for the bare gram in the analysed modality.
    pub model_score: Option<f64>,
}

impl NgramRecord {
    pub fn support(&self) -> usize {
        self.containing_words.len()
    }
}

/// Every character n-gram with `lengths.0 <= n <= lengths.1` contained in at
/// least `min_support` distinct words, sorted by gram. A word counts once per
/// gram however often the gram repeats in it.
pub fn extract_ngrams(
    words: &[String],
    lengths: (usize, usize),
    min_support: usize,
) -> Result<Vec<NgramRecord>, SublexicalError> {
    let (lo, hi) = lengths;
    if lo == 0 || lo > hi {
        return Err(SublexicalError::BadLengths(lo, hi));
    }
    let mut sets: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for w in words {
        let chars: Vec<char> = w.chars().collect();
        for n in lo..=hi.min(chars.len()) {
            for window in chars.windows(n) {
                sets.entry(window.iter().collect()).or_default().insert(w.clone());
            }
        }
    }
    Ok(sets
        .into_iter()
        .filter(|(_, ws)| ws.len() >= min_support)
        .map(|(gram, containing_words)| NgramRecord {
            gram,
            containing_words,
            p_h: None,
            model_score: None,
        })
        .collect())
}

/// Drops a gram when it has at least one super-string among `records` and
/// every such super-string occurs in exactly the same words. All grams are
/// judged against the full input at once.
pub fn dedup_substrings(records: Vec<NgramRecord>) -> Vec<NgramRecord> {
    let index: HashMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.gram.as_str(), i)).collect();
    let mut supers: Vec<Vec<usize>> = vec![Vec::new(); records.len()];
    for (i, r) in records.iter().enumerate() {
        let chars: Vec<char> = r.gram.chars().collect();
        let mut subs = BTreeSet::new();
        for n in 1..chars.len() {
            for window in chars.windows(n) {
                subs.insert(window.iter().collect::<String>());
            }
        }
        for s in subs {
            if let Some(&j) = index.get(s.as_str()) {
                supers[j].push(i);
            }
        }
    }
    let redundant: Vec<bool> = supers
        .iter()
        .enumerate()
        .map(|(j, sup)| {
            !sup.is_empty() && sup.iter().all(|&i| records[i].containing_words == records[j].containing_words)
        })
        .collect();
    records
        .into_iter()
        .zip(redundant)
        .filter(|(_, r)| !r)
        .map(|(rec, _)| rec)
        .collect()
}

/// Unweighted mean selection rate of the words containing the gram.
pub fn ngram_selection_rate(
    record: &NgramRecord,
    rates: &SelectionRateTable,
    modality: Modality,
) -> Result<f64, SublexicalError> {
    let mut sum = 0.0;
    for w in &record.containing_words {
        sum += rates.rate(w, modality).ok_or_else(|| SublexicalError::MissingRate {
            word: w.clone(),
            modality,
        })?;
    }
    Ok(sum / record.containing_words.len() as f64)
}

/// Keeps records whose rate is strictly above `base_rate`.
pub fn filter_above_base(records: Vec<NgramRecord>, base_rate: f64) -> Result<Vec<NgramRecord>, SublexicalError> {
    let mut out = Vec::new();
    for r in records {
        let p = r.p_h.ok_or_else(|| SublexicalError::Unrated(r.gram.clone()))?;
        if p > base_rate {
            out.push(r);
        }
    }
    Ok(out)
}

/// Whether `p_h` clears the base rate by at least [`STRONG_MARGIN`]; a
/// difference within 1e-12 of the margin counts as reaching it.
pub fn is_strong(p_h: f64, base_rate: f64) -> bool {
    p_h - base_rate >= STRONG_MARGIN - 1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityGrams {
    pub modality: Modality,
    /// Mean selection rate of every word rated under the modality.
    pub base_rate: f64,
    pub records: Vec<NgramRecord>,
}

/// Extract, deduplicate, rate and filter the grams of the words rated under
/// `modality`.
pub fn analyze_modality(
    rates: &SelectionRateTable,
    modality: Modality,
    lengths: (usize, usize),
    min_support: usize,
) -> Result<ModalityGrams, SublexicalError> {
    let words: Vec<String> = rates.words(modality).into_iter().map(String::from).collect();
    let base_rate = rates.base_rate(modality).ok_or(SublexicalError::NoWords(modality))?;
    let mut records = dedup_substrings(extract_ngrams(&words, lengths, min_support)?);
    for r in &mut records {
        r.p_h = Some(ngram_selection_rate(r, rates, modality)?);
    }
    Ok(ModalityGrams {
        modality,
        base_rate,
        records: filter_above_base(records, base_rate)?,
    })
}

/// What to do with a gram the embedder cannot embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingGram {
    #[default]
    Error,
    /// Drop the gram with a warning.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramCorrelation {
    pub correlation: CorrelationResult,
    pub records: Vec<NgramRecord>,
    pub skipped: Vec<String>,
}

/// Scores each gram with `model` and correlates the scores with the grams'
/// selection rates.
pub fn score_and_correlate<P: Projection>(
    grams: &ModalityGrams,
    model: &P,
    embed: impl Fn(&str) -> Option<Vec<f64>>,
    missing: MissingGram,
) -> Result<GramCorrelation, SublexicalError> {
    let m = grams.modality;
    let mut records = Vec::with_capacity(grams.records.len());
    let mut skipped = Vec::new();
    for r in &grams.records {
        let Some(v) = embed(&r.gram) else {
            match missing {
                MissingGram::Error => return Err(SublexicalError::MissingEmbedding(r.gram.clone())),
                MissingGram::Skip => {
                    log::warn!("{m}: no embedding for n-gram `{}`; dropped", r.gram);
                    skipped.push(r.gram.clone());
                    continue;
                }
            }
        };
        let mut scored = r.clone();
        scored.model_score = Some(model.predict(&v)?[m]);
        records.push(scored);
    }
    let mut rates = Vec::with_capacity(records.len());
    for r in &records {
        rates.push(r.p_h.ok_or_else(|| SublexicalError::Unrated(r.gram.clone()))?);
    }
    let scores: Vec<f64> = records.iter().filter_map(|r| r.model_score).collect();
    let correlation = pearson(&rates, &scores).map_err(|source| SublexicalError::Correlation { modality: m, source })?;
    Ok(GramCorrelation {
        correlation,
        records,
        skipped,
    })
}

/// `modality,gram,support,p_h,model_score,strong` for every record.
pub fn grams_csv(grams: &ModalityGrams, records: &[NgramRecord]) -> String {
    let mut out = String::from("modality,gram,support,p_h,model_score,strong\n");
    for r in records {
        let p = r.p_h.map_or(String::new(), |v| v.to_string());
        let s = r.model_score.map_or(String::new(), |v| v.to_string());
        let strong = r.p_h.is_some_and(|p| is_strong(p, grams.base_rate));
        let _ = writeln!(out, "{},{},{},{p},{s},{strong}", grams.modality, r.gram, r.support());
    }
    out
}
