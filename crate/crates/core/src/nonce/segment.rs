use serde::{Deserialize, Serialize};

use super::NonceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SegmentKind {
    Onset,
    Nucleus,
    Coda,
}

/// Where a syllable sits in its word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SyllableSlot {
    Only,
    First,
    Middle,
    Last,
}

impl SyllableSlot {
    fn of(index: usize, count: usize) -> Self {
        match (index, count) {
            (_, 1) => SyllableSlot::Only,
            (0, _) => SyllableSlot::First,
            (i, n) if i + 1 == n => SyllableSlot::Last,
            _ => SyllableSlot::Middle,
        }
    }
}

/// Positional class: segments are only ever swapped for segments of the
/// same class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PositionClass {
    pub kind: SegmentKind,
    pub slot: SyllableSlot,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub class: PositionClass,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    /// Three segments (onset, nucleus, coda) per syllable; onset and coda
    /// may be empty. A word without vowel letters yields one onset segment.
    pub segments: Vec<Segment>,
    /// Set when the word had no vowel letter.
    pub fallback: bool,
}

impl Segmentation {
    pub fn join(&self) -> String {
        self.segments.iter().map(|s| s.text.as_str()).collect()
    }

    pub fn syllable_count(&self) -> usize {
        if self.fallback {
            0
        } else {
            self.segments.len() / 3
        }
    }

    /// Syllables as `onset-nucleus-coda`, joined by `.`.
    pub fn notation(&self) -> String {
        self.segments
            .chunks(3)
            .map(|c| c.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join("-"))
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Consonant clusters that may open a syllable word-internally. Single
/// consonants always may.
const ONSETS: &[&str] = &[
    "bl", "br", "ch", "cl", "cr", "dr", "dw", "fl", "fr", "gl", "gn", "gr", "kl", "kn", "kr", "ph",
    "pl", "pr", "ps", "sc", "sh", "sk", "sl", "sm", "sn", "sp", "st", "sw", "th", "tr", "tw", "wh",
    "wr", "chr", "phr", "sch", "scr", "shr", "sph", "spl", "spr", "str", "thr",
];

fn is_plain_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Vowel letters: a e i o u, and y when it is not word-initial, follows a
/// consonant, and is followed by a consonant or the end of the word.
fn vowel_mask(word: &[u8]) -> Vec<bool> {
    let mut mask: Vec<bool> = word.iter().map(|&c| is_plain_vowel(c)).collect();
    for i in 1..word.len() {
        if word[i] != b'y' {
            continue;
        }
        let prev_consonant = !is_plain_vowel(word[i - 1]) && word[i - 1] != b'y';
        let next_consonant = word.get(i + 1).map_or(true, |&c| !is_plain_vowel(c) && c != b'y');
        mask[i] = prev_consonant && next_consonant;
    }
    mask
}

/// Length of the longest suffix of `cluster` that is a legal onset.
fn onset_len(cluster: &str) -> usize {
    if cluster.is_empty() {
        return 0;
    }
    (2..=cluster.len().min(3))
        .rev()
        .find(|&n| ONSETS.contains(&&cluster[cluster.len() - n..]))
        .unwrap_or(1)
}

/// Splits a lowercase alphabetic word into onset, nucleus and coda segments
/// per orthographic syllable.
///
/// Nuclei are maximal runs of vowel letters. A consonant cluster between two
/// nuclei gives its longest legal-onset suffix to the following syllable and
/// the rest to the preceding coda; word-initial consonants are an onset and
/// word-final consonants a coda.
pub fn segment_subsyllabic(word: &str) -> Result<Segmentation, NonceError> {
    if word.is_empty() || !word.bytes().all(|c| c.is_ascii_lowercase()) {
        return Err(NonceError::NotLowercaseAlphabetic(word.to_string()));
    }
    let bytes = word.as_bytes();
    let mask = vowel_mask(bytes);

    let mut nuclei: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if mask[i] {
            let start = i;
            while i < bytes.len() && mask[i] {
                i += 1;
            }
            nuclei.push((start, i));
        } else {
            i += 1;
        }
    }

    if nuclei.is_empty() {
        return Ok(Segmentation {
            segments: vec![Segment {
                class: PositionClass {
                    kind: SegmentKind::Onset,
                    slot: SyllableSlot::Only,
                },
                text: word.to_string(),
            }],
            fallback: true,
        });
    }

    // Syllable boundaries: start of each syllable's onset.
    let mut starts = vec![0usize];
    for w in nuclei.windows(2) {
        let cluster = &word[w[0].1..w[1].0];
        starts.push(w[1].0 - onset_len(cluster));
    }

    let count = nuclei.len();
    let mut segments = Vec::with_capacity(count * 3);
    for (s, &(n_start, n_end)) in nuclei.iter().enumerate() {
        let slot = SyllableSlot::of(s, count);
        let end = starts.get(s + 1).copied().unwrap_or(word.len());
        for (kind, range) in [
            (SegmentKind::Onset, starts[s]..n_start),
            (SegmentKind::Nucleus, n_start..n_end),
            (SegmentKind::Coda, n_end..end),
        ] {
            segments.push(Segment {
                class: PositionClass { kind, slot },
                text: word[range].to_string(),
            });
        }
    }
    Ok(Segmentation {
        segments,
        fallback: false,
    })
}
