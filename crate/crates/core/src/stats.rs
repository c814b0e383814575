//! Small statistics helpers for test verdicts and audits: chi-square
//! goodness of fit and Wilson score intervals.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// p-value of a chi-square goodness-of-fit test of `counts` against the
/// given cell probabilities. Returns 1.0 for degenerate inputs (single
/// cell or empty sample).
pub fn chi_square_pvalue(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let n: u64 = counts.iter().sum();
    if n == 0 || counts.len() < 2 {
        return 1.0;
    }
    let mut stat = 0.0;
    for (&c, &q) in counts.iter().zip(probs.iter()) {
        let expect = q * n as f64;
        if expect <= 0.0 {
            if c > 0 {
                return 0.0;
            }
            continue;
        }
        let d = c as f64 - expect;
        stat += d * d / expect;
    }
    let dof = probs.iter().filter(|&&q| q > 0.0).count() as f64 - 1.0;
    if dof < 1.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof).expect("valid dof");
    1.0 - dist.cdf(stat)
}

/// Uniform-specific convenience.
pub fn chi_square_uniform_pvalue(counts: &[u64]) -> f64 {
    let probs = vec![1.0 / counts.len() as f64; counts.len()];
    chi_square_pvalue(counts, &probs)
}

/// Index sampled from a probability vector by one uniform draw u in
/// [0,1): cumulative walk, falling back to the last positive cell so
/// rounding never picks a zero-weight branch. Shared by every engine so
/// identical distributions at identical stream positions give identical
/// outcomes.
pub fn draw_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut pick = None;
    for (j, &w) in probs.iter().enumerate() {
        acc += w;
        if u < acc {
            pick = Some(j);
            break;
        }
    }
    let mut j = pick.unwrap_or(probs.len() - 1);
    while j > 0 && probs[j] == 0.0 {
        j -= 1;
    }
    j
}

/// Wilson score interval for a binomial proportion at z standard errors.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_pass() {
        let counts = [2000, 1980, 2050, 1990, 1980];
        assert!(chi_square_uniform_pvalue(&counts) > 0.001);
    }

    #[test]
    fn skewed_counts_fail() {
        let counts = [5000, 1000, 1000, 1000, 2000];
        assert!(chi_square_uniform_pvalue(&counts) < 1e-6);
    }

    #[test]
    fn draw_index_walks_cumulative() {
        let probs = [0.2, 0.0, 0.3, 0.5];
        assert_eq!(draw_index(&probs, 0.0), 0);
        assert_eq!(draw_index(&probs, 0.19), 0);
        assert_eq!(draw_index(&probs, 0.21), 2);
        assert_eq!(draw_index(&probs, 0.49), 2);
        assert_eq!(draw_index(&probs, 0.51), 3);
        assert_eq!(draw_index(&probs, 0.999_999), 3);
        // Point mass ignores the draw.
        let point = [0.0, 1.0, 0.0];
        assert_eq!(draw_index(&point, 0.01), 1);
        assert_eq!(draw_index(&point, 0.99), 1);
        // Rounding tail never lands on a zero cell.
        assert_eq!(draw_index(&[0.5, 0.5, 0.0], 1.0 - 1e-12), 1);
    }

    #[test]
    fn wilson_brackets_truth() {
        let (lo, hi) = wilson_interval(500, 1000, 3.0);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(hi - lo < 0.1);
        let (lo, hi) = wilson_interval(0, 1000, 3.0);
        assert!(lo == 0.0 && hi < 0.02);
    }
}
