use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;
use rphonetic::{Encoder, Metaphone};
use rust_stemmers::{Algorithm, Stemmer};

use super::{FilterTag, NonceCandidate};

/// Unit-cost edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    strsim::levenshtein(a, b)
}

pub fn porter_stem(word: &str) -> String {
    Stemmer::create(Algorithm::English).stem(word).into_owned()
}

/// Metaphone key without a length cap.
pub fn metaphone_key(word: &str) -> String {
    Metaphone::new(None).encode(word)
}

fn key_hash(chars: impl Iterator<Item = char>) -> u64 {
    let mut h = DefaultHasher::new();
    for c in chars {
        c.hash(&mut h);
    }
    h.finish()
}

/// Hashes of `w` and of every one-character deletion of `w`.
fn deletion_keys(w: &[char]) -> impl Iterator<Item = u64> + '_ {
    std::iter::once(key_hash(w.iter().copied())).chain((0..w.len()).map(move |skip| {
        key_hash(w.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &c)| c))
    }))
}

/// Read-only index over a reference lexicon answering the three novelty
/// questions.
///
/// Distance-1 lookup uses deletion neighbourhoods: two strings are within one
/// edit exactly when their sets of {self, one-deletion variants} intersect.
/// The index stores hashes of those variants pointing back at the word, and
/// every hash hit is confirmed with an exact distance computation.
pub struct LexiconIndex {
    words: Vec<String>,
    neighbourhood: Vec<(u64, u32)>,
    stems: HashSet<String>,
    keys: HashSet<String>,
}

impl LexiconIndex {
    /// Entries are trimmed and lowercased; blanks are ignored.
    pub fn build<S: AsRef<str>>(lexicon: &[S]) -> Self {
        let mut seen = HashSet::new();
        let words: Vec<String> = lexicon
            .iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty() && seen.insert(w.clone()))
            .collect();
        let mut neighbourhood: Vec<(u64, u32)> = words
            .par_iter()
            .enumerate()
            .flat_map_iter(|(i, w)| {
                let chars: Vec<char> = w.chars().collect();
                deletion_keys(&chars).map(|h| (h, i as u32)).collect::<Vec<_>>()
            })
            .collect();
        neighbourhood.par_sort_unstable();
        neighbourhood.dedup();
        let stemmer = Stemmer::create(Algorithm::English);
        let stems = words.par_iter().map(|w| stemmer.stem(w).into_owned()).collect();
        let metaphone = Metaphone::new(None);
        let keys = words
            .par_iter()
            .map(|w| metaphone.encode(w))
            .filter(|k| !k.is_empty())
            .collect();
        LexiconIndex {
            words,
            neighbourhood,
            stems,
            keys,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// A lexicon word within edit distance 1 of `candidate`, if any.
    pub fn near_word(&self, candidate: &str) -> Option<&str> {
        let chars: Vec<char> = candidate.chars().collect();
        for h in deletion_keys(&chars) {
            let start = self.neighbourhood.partition_point(|&(k, _)| k < h);
            for &(k, i) in &self.neighbourhood[start..] {
                if k != h {
                    break;
                }
                let w = &self.words[i as usize];
                if levenshtein(candidate, w) <= 1 {
                    return Some(w);
                }
            }
        }
        None
    }

    pub fn shares_stem(&self, candidate: &str) -> bool {
        self.stems.contains(&porter_stem(candidate))
    }

    pub fn shares_phonetic_key(&self, candidate: &str) -> bool {
        let key = metaphone_key(candidate);
        !key.is_empty() && self.keys.contains(&key)
    }

    /// The first check `candidate` fails, or `None` if it is novel.
    pub fn violation(&self, candidate: &str) -> Option<FilterTag> {
        if self.near_word(candidate).is_some() {
            Some(FilterTag::EditDistance)
        } else if self.shares_stem(candidate) {
            Some(FilterTag::Stem)
        } else if self.shares_phonetic_key(candidate) {
            Some(FilterTag::Phonetic)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub kept: usize,
    pub dropped_edit_distance: usize,
    pub dropped_stem: usize,
    pub dropped_phonetic: usize,
}

/// Drops candidates within one edit of, sharing a stem with, or sharing a
/// phonetic key with any lexicon word. Survivors carry all three filter tags.
/// Each dropped candidate is counted under the first check it failed.
pub fn novelty_filter(candidates: Vec<NonceCandidate>, index: &LexiconIndex) -> (Vec<NonceCandidate>, FilterReport) {
    let verdicts: Vec<Option<FilterTag>> = candidates.par_iter().map(|c| index.violation(&c.text)).collect();
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for (mut c, verdict) in candidates.into_iter().zip(verdicts) {
        match verdict {
            None => {
                c.filters_passed.extend(FilterTag::ALL);
                kept.push(c);
            }
            Some(FilterTag::EditDistance) => report.dropped_edit_distance += 1,
            Some(FilterTag::Stem) => report.dropped_stem += 1,
            Some(FilterTag::Phonetic) => report.dropped_phonetic += 1,
        }
    }
    report.kept = kept.len();
    (kept, report)
}
