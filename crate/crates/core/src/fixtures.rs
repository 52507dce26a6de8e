//! Synthetic inputs for tests, acceptance checks and demo runs.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::behavioral::ResponseRecord;
use crate::corpus::{EmbeddingFormat, EmbeddingTable, NormsHeaderMap, NormsMap, RATING_MAX};
use crate::nonce::{NonceCandidate, SurveyPlan};
use crate::{Modality, SensorimotorVector};

/// Twelve scored words per modality, each above 0.55 in its own modality and
/// below 0.45 everywhere else, so every other modality's words are eligible
/// distractors. Returns the per-modality target lists and their union.
pub fn survey_pools(seed: u64) -> (BTreeMap<Modality, Vec<NonceCandidate>>, Vec<NonceCandidate>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut targets = BTreeMap::new();
    let mut pool = Vec::new();
    for m in Modality::ALL {
        let words: Vec<NonceCandidate> = (0..12)
            .map(|i| {
                let mut v = SensorimotorVector::ZERO;
                for o in Modality::ALL {
                    v[o] = rng.gen_range(0.0..0.45);
                }
                v[m] = rng.gen_range(0.55..1.0);
                NonceCandidate::scored(format!("{}{}", m.key().replace('_', ""), letters(i)), v)
            })
            .collect();
        pool.extend(words.iter().cloned());
        targets.insert(m, words);
    }
    (targets, pool)
}

/// `0 -> "a"`, `25 -> "z"`, `26 -> "ba"`, ...
fn letters(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

const ONSETS: [&str; 21] = [
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "pl", "gr", "ch", "sh",
];
const NUCLEI: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ea", "oo"];
const CODAS: [&str; 10] = ["", "", "n", "r", "s", "t", "l", "m", "nd", "ck"];

/// `n` distinct pronounceable lowercase words of two or three syllables.
pub fn pseudo_words(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(&mut rng).expect("non-empty"));
            w.push_str(NUCLEI.choose(&mut rng).expect("non-empty"));
            w.push_str(CODAS.choose(&mut rng).expect("non-empty"));
        }
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Components drawn uniformly from `[-sqrt 3, sqrt 3]` (unit variance).
fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f32> {
    let a = 3f32.sqrt();
    (0..dim).map(|_| rng.gen_range(-a..a)).collect()
}

/// A stand-in for an external encoder: a fixed pseudo-random vector per
/// string, identical across calls and platforms.
pub fn pseudo_vector(text: &str, dim: usize, seed: u64) -> Vec<f32> {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    unit_vector(&mut ChaCha8Rng::seed_from_u64(h ^ seed), dim)
}

/// Generic-TSV table of [`pseudo_vector`] rows for `words`.
pub fn pseudo_embeddings<S: AsRef<str>>(words: &[S], dim: usize, seed: u64) -> EmbeddingTable {
    let mut table = EmbeddingTable::new(dim, EmbeddingFormat::GenericTsv).expect("positive dim");
    for w in words {
        let w = w.as_ref();
        if table.get(w).is_none() {
            table.insert(w, &pseudo_vector(w, dim, seed)).expect("finite vector");
        }
    }
    table
}

/// Words with random embeddings and norms that are a smooth function of the
/// embedding: `sigmoid(2.5 * w_m . x / sqrt(dim))` per modality.
pub struct SyntheticCorpus {
    pub embeddings: EmbeddingTable,
    pub norms: NormsMap,
}

pub fn synthetic_corpus(n: usize, dim: usize, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<f32>> = (0..Modality::ALL.len()).map(|_| unit_vector(&mut rng, dim)).collect();
    let mut embeddings = EmbeddingTable::new(dim, EmbeddingFormat::GloveText).expect("positive dim");
    let mut norms = NormsMap::new();
    for w in pseudo_words(n, seed) {
        let x = unit_vector(&mut rng, dim);
        let mut v = SensorimotorVector::ZERO;
        for m in Modality::ALL {
            let dot: f64 = weights[m.index()].iter().zip(&x).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
            v[m] = 1.0 / (1.0 + (-2.5 * dot / (dim as f64).sqrt()).exp());
        }
        embeddings.insert(&w, &x).expect("finite vector");
        norms.insert(w, v);
    }
    SyntheticCorpus { embeddings, norms }
}

/// Norms CSV in the default column layout, ratings on the 0-5 scale.
pub fn norms_csv(norms: &NormsMap) -> String {
    let header = NormsHeaderMap::default();
    let mut out = header.word.clone();
    for c in &header.columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (word, v) in norms {
        out.push_str(word);
        for x in v.values() {
            out.push(',');
            out.push_str(&(x * RATING_MAX).to_string());
        }
        out.push('\n');
    }
    out
}

/// Responses to the four questions of `m` whose per-word selection rates
/// correlate with the words' `m` scores at `target_r`, up to the rounding of
/// selection counts to `per_question` responses per question.
///
/// Rates are `3/7 + k * (u + g * e)`, where `u` is the score vector centred
/// within each question and `e` a random vector, also centred within each
/// question and orthogonal to `u`. Centring keeps every question's rates
/// summing to 3; `g` is solved for so the correlation is exactly `target_r`.
pub fn correlated_responses(
    plan: &SurveyPlan,
    m: Modality,
    target_r: f64,
    per_question: usize,
    seed: u64,
) -> Result<Vec<ResponseRecord>, String> {
    let questions: Vec<_> = plan.questions_for_modality(m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::new();
    let mut e = Vec::new();
    let mut s = Vec::new();
    for q in &questions {
        let scores: Vec<f64> = q.options.iter().map(|o| o.scores[m]).collect();
        let noise: Vec<f64> = scores.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (sm, nm) = (mean(&scores), mean(&noise));
        u.extend(scores.iter().map(|x| x - sm));
        e.extend(noise.iter().map(|x| x - nm));
        s.extend(scores);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let uu = dot(&u, &u);
    let proj = dot(&e, &u) / uu;
    e.iter_mut().zip(&u).for_each(|(x, y)| *x -= proj * y);
    let sm = mean(&s);
    let ss: f64 = s.iter().map(|x| (x - sm).powi(2)).sum();
    let ceiling = (uu / ss).sqrt();
    if !(target_r > 0.0 && target_r <= ceiling) {
        return Err(format!("r = {target_r} is outside (0, {ceiling:.4}] for this plan"));
    }
    let g = ((uu * uu / (target_r * target_r * ss) - uu) / dot(&e, &e)).max(0.0).sqrt();
    let delta: Vec<f64> = u.iter().zip(&e).map(|(a, b)| a + g * b).collect();
    let base = 3.0 / 7.0;
    let up = delta.iter().cloned().fold(0.0, f64::max);
    let down = delta.iter().map(|d| -d).fold(0.0, f64::max);
    let k = 0.9 * f64::min(if up > 0.0 { (1.0 - base) / up } else { 1.0 }, if down > 0.0 { base / down } else { 1.0 });

    let mut out = Vec::new();
    let mut offset = 0;
    for q in &questions {
        let n = q.options.len();
        let rates: Vec<f64> = delta[offset..offset + n].iter().map(|d| base + k * d).collect();
        offset += n;
        let counts = apportion(&rates, per_question, 3 * per_question);
        let mut sequence = Vec::with_capacity(3 * per_question);
        for (o, &c) in q.options.iter().zip(&counts) {
            sequence.extend(std::iter::repeat(o.text.as_str()).take(c));
        }
        for i in 0..per_question {
            out.push(ResponseRecord {
                participant_id: format!("p{i:05}"),
                question_id: q.id.clone(),
                selected: [0, 1, 2].map(|j| sequence[i + j * per_question].to_string()),
            });
        }
    }
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Largest-remainder rounding of `rates * exposures` to integers summing to
/// `total`, each at most `exposures`.
fn apportion(rates: &[f64], exposures: usize, total: usize) -> Vec<usize> {
    let raw: Vec<f64> = rates.iter().map(|r| r * exposures as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| (x.floor() as usize).min(exposures)).collect();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let mut assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle() {
        if assigned >= total {
            break;
        }
        if counts[i] < exposures {
            counts[i] += 1;
            assigned += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavioral::{modality_correlation, plan_scores, selection_rates};
    use crate::corpus::{read_norms_csv, NormsHeaderMap};
    use crate::nonce::{build_survey, PromptPhrases};

    #[test]
    fn norms_csv_round_trips_within_rounding() {
        let corpus = synthetic_corpus(50, 8, 3);
        let table = read_norms_csv(norms_csv(&corpus.norms).as_bytes(), &NormsHeaderMap::default()).unwrap();
        assert!(table.rejected.is_empty());
        for (w, v) in &corpus.norms {
            for m in Modality::ALL {
                assert!((table.entries[w][m] - v[m]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pseudo_vectors_are_stable_per_string() {
        assert_eq!(pseudo_vector("blick", 5, 1), pseudo_vector("blick", 5, 1));
        assert_ne!(pseudo_vector("blick", 5, 1), pseudo_vector("blicks", 5, 1));
        assert_eq!(pseudo_words(40, 9).len(), 40);
    }

    #[test]
    fn correlated_responses_hit_the_requested_r() {
        let (targets, pool) = survey_pools(4);
        let plan = build_survey(&targets, &pool, 4, 0.5, &PromptPhrases::default()).unwrap();
        let scores = plan_scores(&plan);
        for (m, r) in [(Modality::Interoceptive, 0.73), (Modality::Auditory, 0.69), (Modality::Torso, 0.2)] {
            let records = correlated_responses(&plan, m, r, 1000, 11).unwrap();
            assert_eq!(records.len(), 4000);
            let (table, _) = selection_rates(&records, &plan);
            let (c, points) = modality_correlation(&table, &scores, m).unwrap();
            assert_eq!(points.len(), 28);
            assert!((c.r - r).abs() < 0.005, "{m}: {}", c.r);
        }
        assert!(correlated_responses(&plan, Modality::Head, 1.0, 10, 0).is_err());
    }

    #[test]
    fn apportion_preserves_totals() {
        let counts = apportion(&[0.9, 0.1, 0.5, 0.5, 0.4, 0.3, 0.3], 101, 303);
        assert_eq!(counts.iter().sum::<usize>(), 303);
        assert!(counts.iter().all(|&c| c <= 101));
    }
}
