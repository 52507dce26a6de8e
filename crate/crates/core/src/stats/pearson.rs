use serde::{Deserialize, Serialize};

use super::{mean, student_t_two_sided_p, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-sided, from `t = r * sqrt((n - 2) / (1 - r^2))` on `n - 2` degrees
    /// of freedom.
    pub p_value: f64,
    pub n: usize,
}

impl CorrelationResult {
    /// Conventional significance stars: `***` p < .001, `**` p < .01,
    /// `*` p < .05.
    pub fn stars(&self) -> &'static str {
        match self.p_value {
            p if p < 0.001 => "***",
            p if p < 0.01 => "**",
            p if p < 0.05 => "*",
            _ => "",
        }
    }
}

/// Sample Pearson correlation with a two-sided significance test.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let dof = (n - 2) as f64;
    let p_value = if r.abs() == 1.0 {
        0.0
    } else {
        student_t_two_sided_p(r * (dof / (1.0 - r * r)).sqrt(), dof)
    };
    Ok(CorrelationResult { r, p_value, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_correlations() {
        let x = [0.2, 1.5, 3.0, 4.0];
        let r = pearson(&x, &x).unwrap();
        assert!((r.r - 1.0).abs() < 1e-15);
        assert!(r.p_value < 1e-12);
        let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert!((r.r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err(), StatsError::ZeroVariance);
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0, 2.0]), Err(StatsError::TooFew { .. })));
        assert!(matches!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]), Err(StatsError::LengthMismatch(3, 2))));
    }

    #[test]
    fn reference_p_values_at_28_items() {
        // Reported (r, p) pairs for 28 words per modality. r is rounded to two
        // decimals, so the reported p must fall between the p-values at
        // r +/- 0.005 (and p itself is rounded to three decimals).
        let p_at = |r: f64| student_t_two_sided_p(r * (26.0 / (1.0 - r * r)).sqrt(), 26.0);
        for &(r, p) in &[(0.56, 0.002), (0.54, 0.003), (0.43, 0.021), (0.25, 0.192), (0.10, 0.618)] {
            let (lo, hi) = (p_at(r + 0.005), p_at(r - 0.005));
            assert!(lo - 0.0005 <= p && p <= hi + 0.0005, "r={r}: p in [{lo}, {hi}], reported {p}");
        }
    }

    #[test]
    fn stars() {
        let c = |p| CorrelationResult { r: 0.5, p_value: p, n: 28 };
        assert_eq!(c(0.0005).stars(), "***");
        assert_eq!(c(0.005).stars(), "**");
        assert_eq!(c(0.03).stars(), "*");
        assert_eq!(c(0.2).stars(), "");
    }

    /// Two-sided permutation p-value: share of shuffles of `y` whose |r| is at
    /// least the observed |r|.
    fn permutation_p(x: &[f64], y: &[f64], draws: usize, seed: u64) -> f64 {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let observed = pearson(x, y).unwrap().r.abs();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = y.to_vec();
        let mut hits = 0;
        for _ in 0..draws {
            shuffled.shuffle(&mut rng);
            if pearson(x, &shuffled).unwrap().r.abs() >= observed - 1e-12 {
                hits += 1;
            }
        }
        hits as f64 / draws as f64
    }

    #[test]
    fn t_route_agrees_with_permutation_at_28() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(28);
        for noise in [0.15, 0.35, 0.8] {
            let x: Vec<f64> = (0..28).map(|_| rng.gen_range(0.0..1.0)).collect();
            let y: Vec<f64> = x.iter().map(|v| v + noise * rng.gen_range(-1.0..1.0)).collect();
            let analytic = pearson(&x, &y).unwrap().p_value;
            let perm = permutation_p(&x, &y, 10_000, 7);
            assert!((analytic - perm).abs() < 0.02, "noise {noise}: {analytic} vs {perm}");
        }
    }

    proptest! {
        #[test]
        fn invariant_under_positive_affine_maps(
            x in prop::collection::vec(-10.0f64..10.0, 5..40),
            noise in prop::collection::vec(-10.0f64..10.0, 40),
            a in 0.1f64..10.0, b in -5.0f64..5.0,
        ) {
            let y: Vec<f64> = x.iter().zip(&noise).map(|(u, e)| u + e).collect();
            let Ok(base) = pearson(&x, &y) else { return Ok(()); };
            let x2: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let moved = pearson(&x2, &y).unwrap();
            prop_assert!((base.r - moved.r).abs() <= 1e-12);
            prop_assert!(base.r.abs() <= 1.0);
            prop_assert!((0.0..=1.0).contains(&base.p_value));
        }
    }
}
