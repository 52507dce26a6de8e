use rayon::prelude::*;

use super::{NonceCandidate, NonceError};
use crate::corpus::EmbeddingTable;
use crate::models::Projection;
use crate::Modality;

pub const TOP_N: usize = 12;
pub const MIN_SCORE: f64 = 0.5;

/// Attaches model predictions to every candidate with an embedding row.
/// Returns the scored candidates and the texts that had no row.
pub fn score_candidates<P: Projection + Sync>(
    model: &P,
    embeddings: &EmbeddingTable,
    candidates: Vec<NonceCandidate>,
) -> Result<(Vec<NonceCandidate>, Vec<String>), NonceError> {
    let index = embeddings.lowercase_index();
    let predictions: Vec<Option<_>> = candidates
        .par_iter()
        .map(|c| {
            index
                .get(&c.text.to_lowercase())
                .map(|&row| {
                    let v: Vec<f64> = embeddings.row(row).iter().map(|&x| f64::from(x)).collect();
                    model.predict(&v)
                })
                .transpose()
        })
        .collect::<Result<_, _>>()?;
    let mut scored = Vec::with_capacity(candidates.len());
    let mut missing = Vec::new();
    for (mut c, p) in candidates.into_iter().zip(predictions) {
        match p {
            Some(s) => {
                c.scores = Some(s);
                scored.push(c);
            }
            None => missing.push(c.text),
        }
    }
    Ok((scored, missing))
}

/// The `n` candidates with the highest score in `modality`, each strictly
/// above `min_score`; ties are broken by text.
pub fn rank_for_modality(
    candidates: &[NonceCandidate],
    modality: Modality,
    n: usize,
    min_score: f64,
) -> Result<Vec<NonceCandidate>, NonceError> {
    let mut eligible: Vec<(&NonceCandidate, f64)> = Vec::new();
    for c in candidates {
        let s = c.score(modality).ok_or_else(|| NonceError::Unscored(c.text.clone()))?;
        if s > min_score {
            eligible.push((c, s));
        }
    }
    if eligible.len() < n {
        return Err(NonceError::InsufficientSupply {
            modality,
            need: n,
            have: eligible.len(),
            threshold: min_score,
        });
    }
    eligible.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.text.cmp(&b.0.text)));
    Ok(eligible.into_iter().take(n).map(|(c, _)| c.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SensorimotorVector;

    fn with_score(text: &str, m: Modality, s: f64) -> NonceCandidate {
        let mut v = SensorimotorVector::ZERO;
        v[m] = s;
        NonceCandidate::scored(text, v)
    }

    #[test]
    fn ties_break_lexicographically() {
        let names: Vec<String> = (0..12).rev().map(|i| format!("w{i:02}")).collect();
        let cands: Vec<_> = names.iter().map(|n| with_score(n, Modality::Visual, 0.6)).collect();
        let top = rank_for_modality(&cands, Modality::Visual, TOP_N, MIN_SCORE).unwrap();
        let texts: Vec<&str> = top.iter().map(|c| c.text.as_str()).collect();
        let mut sorted = texts.clone();
        sorted.sort();
        assert_eq!(texts, sorted);
        assert_eq!(top.len(), 12);
    }

    #[test]
    fn eleven_above_threshold_is_an_error() {
        let mut cands: Vec<_> = (0..11).map(|i| with_score(&format!("a{i}"), Modality::Head, 0.7)).collect();
        cands.push(with_score("b", Modality::Head, 0.5));
        let err = rank_for_modality(&cands, Modality::Head, TOP_N, MIN_SCORE).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("need 12, have 11"), "{msg}");
        assert!(msg.contains("head"), "{msg}");
    }

    #[test]
    fn auditory_examples_rank_crilollering_first() {
        let cands = vec![
            with_score("zonter", Modality::Auditory, 0.95),
            with_score("crilollering", Modality::Auditory, 1.00),
            with_score("ablirk", Modality::Auditory, 0.999),
        ];
        let top = rank_for_modality(&cands, Modality::Auditory, 3, MIN_SCORE).unwrap();
        assert_eq!(top[0].text, "crilollering");
    }

    #[test]
    fn unscored_candidates_are_rejected() {
        let cands = vec![NonceCandidate::new("abc", "abd")];
        assert!(matches!(
            rank_for_modality(&cands, Modality::Head, 1, MIN_SCORE),
            Err(NonceError::Unscored(_))
        ));
    }
}
