use serde::Serialize;

use crate::error::{Error, Result};

/// Enumeration budget: `support^n` outcomes.
pub const MAX_OUTCOMES: u128 = 1_000_000;

/// A law on finitely many nonnegative values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDistribution {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(Error::InvalidQuery(
                "values and probabilities must be nonempty and of equal length".into(),
            ));
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidQuery(
                "values must be finite and nonnegative".into(),
            ));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidQuery(
                "probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidQuery(format!("probabilities sum to {total}")));
        }
        Ok(Self { values, probs })
    }

    /// Uniform law on `values`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let p = 1.0 / values.len() as f64;
        let probs = vec![p; values.len()];
        Self::new(values, probs)
    }

    pub fn support_size(&self) -> usize {
        self.values.len()
    }

    /// `P(Z ≤ t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(v, _)| **v <= t)
            .map(|(_, p)| p)
            .sum()
    }
}

/// Both sides of `P((1/n) Σ Z_k ≤ ε) ≤ (2/n) Σ P(Z_k ≤ 2ε)` for i.i.d. `Z_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovSumCheck {
    pub n: usize,
    pub epsilon: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub outcomes: u64,
    pub holds: bool,
}

/// Evaluates both sides exactly by enumerating all `support^n` outcomes.
pub fn check_markov_sum_bound(
    dist: &FiniteDistribution,
    n: usize,
    epsilon: f64,
) -> Result<MarkovSumCheck> {
    if n == 0 {
        return Err(Error::InvalidQuery("n must be at least 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidQuery(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let m = dist.support_size();
    let outcomes = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if outcomes > MAX_OUTCOMES {
        return Err(Error::EnumerationTooLarge(outcomes));
    }

    let nf = n as f64;
    let mut idx = vec![0usize; n];
    let mut lhs = 0.0;
    loop {
        let sum: f64 = idx.iter().map(|&i| dist.values[i]).sum();
        if sum / nf <= epsilon {
            lhs += idx.iter().map(|&i| dist.probs[i]).product::<f64>();
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == n {
                let rhs = (2.0 / nf) * (0..n).map(|_| dist.cdf(2.0 * epsilon)).sum::<f64>();
                return Ok(MarkovSumCheck {
                    n,
                    epsilon,
                    lhs,
                    rhs,
                    outcomes: outcomes as u64,
                    holds: lhs <= rhs,
                });
            }
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fair_bernoulli_pair() {
        let d = FiniteDistribution::uniform(vec![0.0, 1.0]).unwrap();
        let r = check_markov_sum_bound(&d, 2, 0.25).unwrap();
        assert_eq!(r.lhs, 0.25);
        assert_eq!(r.rhs, 1.0);
        assert_eq!(r.outcomes, 4);
        assert!(r.holds);
    }

    #[test]
    fn degenerate_zero() {
        let d = FiniteDistribution::new(vec![0.0], vec![1.0]).unwrap();
        for n in [1, 3, 7] {
            let r = check_markov_sum_bound(&d, n, 0.01).unwrap();
            assert_eq!((r.lhs, r.rhs), (1.0, 2.0));
        }
    }

    #[test]
    fn too_large_rejected() {
        let d = FiniteDistribution::uniform(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            check_markov_sum_bound(&d, 10, 0.5),
            Err(Error::EnumerationTooLarge(1_048_576))
        );
    }

    #[test]
    fn invalid_distributions() {
        assert!(FiniteDistribution::new(vec![-1.0], vec![1.0]).is_err());
        assert!(FiniteDistribution::new(vec![1.0, 2.0], vec![0.5, 0.6]).is_err());
        assert!(FiniteDistribution::new(vec![], vec![]).is_err());
    }
}
