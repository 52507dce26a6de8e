use std::collections::{HashMap, HashSet};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::segment::{segment_subsyllabic, PositionClass, SegmentKind, Segmentation, SyllableSlot};
use super::{NonceCandidate, NonceError};

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    pub per_seed: usize,
    /// Share of a seed's segments that every candidate keeps in place.
    pub overlap_ratio: f64,
    pub rng_seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            per_seed: 10,
            overlap_ratio: 2.0 / 3.0,
            rng_seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), NonceError> {
        if self.per_seed == 0 {
            return Err(NonceError::ZeroPerSeed);
        }
        if !(0.0..=1.0).contains(&self.overlap_ratio) {
            return Err(NonceError::BadRatio(self.overlap_ratio.to_string()));
        }
        Ok(())
    }

    /// Segments kept from a seed with `n` segments.
    pub fn kept(&self, n: usize) -> usize {
        ((self.overlap_ratio * n as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Parses `"2/3"` or a decimal such as `"0.5"`.
pub fn parse_ratio(s: &str) -> Result<f64, NonceError> {
    let bad = || NonceError::BadRatio(s.to_string());
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0.0 {
                return Err(bad());
            }
            a / b
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResult {
    /// Unique candidates in seed order.
    pub candidates: Vec<NonceCandidate>,
    /// Candidates produced before cross-seed deduplication.
    pub raw_count: usize,
    /// Seeds with fewer than two segments.
    pub skipped_short: usize,
    /// Entries that are not alphabetic after lowercasing, or repeat an
    /// earlier entry.
    pub skipped_invalid: usize,
}

const END: u8 = 12;

fn class_id(c: PositionClass) -> u8 {
    let kind = match c.kind {
        SegmentKind::Onset => 0,
        SegmentKind::Nucleus => 1,
        SegmentKind::Coda => 2,
    };
    let slot = match c.slot {
        SyllableSlot::Only => 0,
        SyllableSlot::First => 1,
        SyllableSlot::Middle => 2,
        SyllableSlot::Last => 3,
    };
    kind * 4 + slot
}

/// Segment-transition counts over the seed lexicon, with segment texts
/// interned.
struct TransitionModel {
    texts: Vec<String>,
    ids: HashMap<String, u32>,
    /// `(class of current, previous id)` -> successors with counts, sorted by id.
    successors: HashMap<(u8, u32), Vec<(u32, u64)>>,
    /// `(class of next, current id, next id)` -> count.
    pairs: HashMap<(u8, u32, u32), u64>,
    /// Class -> segment ids with counts, sorted by id.
    inventory: HashMap<u8, Vec<(u32, u64)>>,
}

/// Interned id of the word-start marker.
const START: u32 = 0;
/// Interned id of the word-end marker.
const STOP: u32 = 1;

impl TransitionModel {
    fn build(words: &[(String, Segmentation)]) -> Self {
        let mut model = TransitionModel {
            texts: vec!["^".into(), "$".into()],
            ids: HashMap::new(),
            successors: HashMap::new(),
            pairs: HashMap::new(),
            inventory: HashMap::new(),
        };
        let mut succ: HashMap<(u8, u32), HashMap<u32, u64>> = HashMap::new();
        let mut inv: HashMap<u8, HashMap<u32, u64>> = HashMap::new();
        for (_, seg) in words {
            let ids: Vec<u32> = seg.segments.iter().map(|s| model.intern(&s.text)).collect();
            let mut prev = START;
            for (s, &id) in seg.segments.iter().zip(&ids) {
                let c = class_id(s.class);
                *succ.entry((c, prev)).or_default().entry(id).or_default() += 1;
                *model.pairs.entry((c, prev, id)).or_default() += 1;
                *inv.entry(c).or_default().entry(id).or_default() += 1;
                prev = id;
            }
            *model.pairs.entry((END, prev, STOP)).or_default() += 1;
        }
        let sorted = |m: HashMap<u32, u64>| {
            let mut v: Vec<(u32, u64)> = m.into_iter().collect();
            v.sort_unstable();
            v
        };
        model.successors = succ.into_iter().map(|(k, m)| (k, sorted(m))).collect();
        model.inventory = inv.into_iter().map(|(k, m)| (k, sorted(m))).collect();
        model
    }

    fn intern(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.ids.get(text) {
            return id;
        }
        let id = self.texts.len() as u32;
        self.texts.push(text.to_string());
        self.ids.insert(text.to_string(), id);
        id
    }

    fn pair(&self, class: u8, a: u32, b: u32) -> u64 {
        self.pairs.get(&(class, a, b)).copied().unwrap_or(0)
    }

    /// Draws a replacement for position `i`, weighted by how often it follows
    /// `prev` and precedes `next`. Falls back to the left transition alone,
    /// then to plain frequency within the class.
    fn draw(
        &self,
        class: u8,
        prev: u32,
        original: u32,
        next: (u8, u32),
        rng: &mut ChaCha8Rng,
    ) -> Option<u32> {
        let empty = Vec::new();
        let succ = self.successors.get(&(class, prev)).unwrap_or(&empty);
        let options: Vec<(u32, u64)> = succ
            .iter()
            .filter(|&&(id, _)| id != original)
            .map(|&(id, w)| (id, w * self.pair(next.0, id, next.1)))
            .collect();
        if let Some(id) = pick(&options, rng) {
            return Some(id);
        }
        let left: Vec<(u32, u64)> = succ.iter().copied().filter(|&(id, _)| id != original).collect();
        if let Some(id) = pick(&left, rng) {
            return Some(id);
        }
        let inv: Vec<(u32, u64)> = self
            .inventory
            .get(&class)
            .map(|v| v.iter().copied().filter(|&(id, _)| id != original).collect())
            .unwrap_or_default();
        pick(&inv, rng)
    }

    /// Up to `per_seed` distinct variants of one seed, each replacing exactly
    /// `n - kept` segments.
    fn variants(&self, seg: &Segmentation, config: &GenerationConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
        let n = seg.segments.len();
        let replace = n - config.kept(n).min(n);
        let mut out: Vec<Vec<u32>> = Vec::new();
        if replace == 0 {
            return out;
        }
        let original: Vec<u32> = seg.segments.iter().map(|s| self.ids[&s.text]).collect();
        let classes: Vec<u8> = seg.segments.iter().map(|s| class_id(s.class)).collect();
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        for _ in 0..config.per_seed * 20 {
            if out.len() == config.per_seed {
                break;
            }
            let mut positions = rand::seq::index::sample(rng, n, replace).into_vec();
            positions.sort_unstable();
            let mut ids = original.clone();
            let mut ok = true;
            for &i in &positions {
                let prev = if i == 0 { START } else { ids[i - 1] };
                let next = if i + 1 == n {
                    (END, STOP)
                } else {
                    (classes[i + 1], original[i + 1])
                };
                match self.draw(classes[i], prev, original[i], next, rng) {
                    Some(id) => ids[i] = id,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && seen.insert(ids.clone()) {
                out.push(ids);
            }
        }
        out
    }

    fn render(&self, ids: &[u32]) -> String {
        ids.iter().map(|&id| self.texts[id as usize].as_str()).collect()
    }
}

fn pick(options: &[(u32, u64)], rng: &mut ChaCha8Rng) -> Option<u32> {
    let dist = WeightedIndex::new(options.iter().map(|&(_, w)| w)).ok()?;
    Some(options[dist.sample(rng)].0)
}

/// Generates pseudowords by swapping a minority of each seed word's
/// sub-syllabic segments for segments of the same positional class, drawn in
/// proportion to their transition frequencies in the seed lexicon.
///
/// Candidates that spell a seed-lexicon word are discarded; duplicates across
/// seeds keep the first seed. Each seed has its own random stream, so the
/// output depends only on `config` and the lexicon, not on thread count.
pub fn generate_candidates(seed_lexicon: &[String], config: &GenerationConfig) -> Result<GenerationResult, NonceError> {
    config.validate()?;
    if seed_lexicon.is_empty() {
        return Err(NonceError::EmptyLexicon);
    }
    let mut skipped_invalid = 0;
    let mut skipped_short = 0;
    let mut seen = HashSet::new();
    let mut words: Vec<(String, Segmentation)> = Vec::with_capacity(seed_lexicon.len());
    for raw in seed_lexicon {
        let w = raw.trim().to_lowercase();
        if !seen.insert(w.clone()) {
            skipped_invalid += 1;
            continue;
        }
        match segment_subsyllabic(&w) {
            Ok(seg) if seg.fallback || seg.segments.len() < 2 => skipped_short += 1,
            Ok(seg) => words.push((w, seg)),
            Err(_) => skipped_invalid += 1,
        }
    }
    let lexicon: HashSet<String> = seed_lexicon.iter().map(|w| w.trim().to_lowercase()).collect();
    let model = TransitionModel::build(&words);

    let per_seed: Vec<Vec<NonceCandidate>> = words
        .par_iter()
        .enumerate()
        .map(|(i, (word, seg))| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(i as u64);
            model
                .variants(seg, config, &mut rng)
                .iter()
                .map(|ids| model.render(ids))
                .filter(|text| !lexicon.contains(text))
                .map(|text| NonceCandidate::new(text, word.clone()))
                .collect()
        })
        .collect();

    let raw_count = per_seed.iter().map(Vec::len).sum();
    let mut emitted = HashSet::new();
    let candidates = per_seed
        .into_iter()
        .flatten()
        .filter(|c| emitted.insert(c.text.clone()))
        .collect();
    Ok(GenerationResult {
        candidates,
        raw_count,
        skipped_short,
        skipped_invalid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    const DESK: &[&str] = &[
        "cat", "bat", "hat", "mat", "sat", "cot", "dot", "hot", "pot", "cut", "hut", "nut", "cap", "map",
        "tap", "top", "mop", "hop", "pin", "tin", "win", "bin", "sun", "run", "bun", "fun", "water",
        "butter", "letter", "better", "bitter", "glitter", "litter", "matter", "banana", "tomato",
        "potato", "table", "cable", "fable", "stable", "candle", "handle", "garden", "pardon", "happy",
        "sunny", "funny", "bunny", "monster", "lobster", "sister", "mister", "winter", "window",
    ];

    #[test]
    fn ratio_parsing() {
        assert!((parse_ratio("2/3").unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(parse_ratio("0.5").unwrap(), 0.5);
        assert!(parse_ratio("3/2").is_err());
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("x").is_err());
    }

    #[test]
    fn kept_segments_for_two_thirds() {
        let c = GenerationConfig::default();
        assert_eq!(c.kept(3), 2);
        assert_eq!(c.kept(6), 4);
        assert_eq!(c.kept(9), 6);
        assert_eq!(c.kept(4), 3);
    }

    #[test]
    fn single_seed_keeps_two_of_three_segments() {
        let words = vec![("cat".to_string(), segment_subsyllabic("cat").unwrap())];
        let extra: Vec<(String, Segmentation)> = ["bat", "cot", "cap"]
            .iter()
            .map(|w| (w.to_string(), segment_subsyllabic(w).unwrap()))
            .collect();
        let all: Vec<_> = words.iter().chain(&extra).cloned().collect();
        let model = TransitionModel::build(&all);
        let original: Vec<u32> = words[0].1.segments.iter().map(|s| model.ids[&s.text]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let variants = model.variants(&words[0].1, &GenerationConfig::default(), &mut rng);
        assert!(!variants.is_empty());
        for v in variants {
            let shared = v.iter().zip(&original).filter(|(a, b)| a == b).count();
            assert_eq!(shared, 2);
        }
    }

    #[test]
    fn lone_seed_has_nothing_to_swap_in() {
        let r = generate_candidates(&lexicon(&["cat"]), &GenerationConfig::default()).unwrap();
        assert!(r.candidates.is_empty());
    }

    #[test]
    fn never_emits_lexicon_words_and_is_deterministic() {
        let lex = lexicon(DESK);
        let set: HashSet<&str> = DESK.iter().copied().collect();
        let mut total = 0;
        for seed in 0..200 {
            let config = GenerationConfig {
                rng_seed: seed,
                ..Default::default()
            };
            let r = generate_candidates(&lex, &config).unwrap();
            total += r.raw_count;
            for c in &r.candidates {
                assert!(!set.contains(c.text.as_str()), "{}", c.text);
                assert_ne!(c.text, c.seed_word);
                assert!(c.text.bytes().all(|b| b.is_ascii_lowercase()));
            }
            if seed < 3 {
                assert_eq!(r, generate_candidates(&lex, &config).unwrap());
            }
        }
        assert!(total >= 10_000, "{total}");
    }

    #[test]
    fn different_seeds_differ() {
        let lex = lexicon(DESK);
        let a = generate_candidates(&lex, &GenerationConfig::default()).unwrap();
        let b = generate_candidates(&lex, &GenerationConfig { rng_seed: 1, ..Default::default() }).unwrap();
        assert_ne!(a.candidates, b.candidates);
    }

    #[test]
    fn output_is_near_per_seed_times_seeds() {
        let lex = lexicon(DESK);
        let r = generate_candidates(&lex, &GenerationConfig::default()).unwrap();
        // Short seeds have few legal swaps, so not every seed reaches 10.
        assert!(r.raw_count >= 5 * DESK.len(), "{}", r.raw_count);
        assert!(r.raw_count <= 10 * DESK.len());
    }

    #[test]
    fn skips_short_and_invalid_seeds() {
        let r = generate_candidates(&lexicon(&["psst", "co-op", "cat", "cat", "bat"]), &GenerationConfig::default())
            .unwrap();
        assert_eq!(r.skipped_short, 1);
        assert_eq!(r.skipped_invalid, 2);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate_candidates(&[], &GenerationConfig::default()).is_err());
        let zero = GenerationConfig {
            per_seed: 0,
            ..Default::default()
        };
        assert!(generate_candidates(&lexicon(&["cat"]), &zero).is_err());
    }
}
