use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample_entry, Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::RealVector;
use crate::stats::{wilson_interval, Interval};

/// Monte Carlo estimate of `P(|Σ w_i ξ_i| ≤ ε)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallEstimate {
    pub ensemble: Ensemble,
    pub epsilon: f64,
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// Wilson score interval at 95%.
    pub ci: Interval,
    pub master_seed: u64,
}

/// Frequency of `|Σ weights(i) ξ_i| ≤ epsilon` over `trials` draws of
/// i.i.d. `ξ` from `ensemble`. Trial `t` reads stream
/// `seed.stream_index + t`.
pub fn small_ball_estimate(
    weights: &RealVector,
    ensemble: Ensemble,
    epsilon: f64,
    trials: u64,
    seed: SeedSpec,
) -> Result<SmallBallEstimate> {
    if (weights.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidQuery(format!(
            "weights must have unit norm, got {}",
            weights.norm()
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidQuery("trials must be at least 1".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidQuery(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let w = weights.as_slice();
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut s = SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(t)).stream();
            let sum: f64 = w.iter().map(|wi| wi * sample_entry(ensemble, &mut s)).sum();
            sum.abs() <= epsilon
        })
        .count() as u64;
    Ok(SmallBallEstimate {
        ensemble,
        epsilon,
        trials,
        hits,
        p_hat: hits as f64 / trials as f64,
        ci: wilson_interval(hits, trials),
        master_seed: seed.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        let w = RealVector::new(vec![1.0, 1.0]).unwrap();
        let seed = SeedSpec::new(0, 0);
        assert!(small_ball_estimate(&w, Ensemble::Gaussian, 0.1, 10, seed).is_err());
        let e1 = RealVector::basis(2, 0);
        assert!(small_ball_estimate(&e1, Ensemble::Gaussian, 0.1, 0, seed).is_err());
        assert!(small_ball_estimate(&e1, Ensemble::Gaussian, -0.1, 10, seed).is_err());
    }

    #[test]
    fn rademacher_single_coordinate_is_deterministic() {
        let e1 = RealVector::basis(3, 0);
        let r =
            small_ball_estimate(&e1, Ensemble::Rademacher, 0.5, 1000, SeedSpec::new(4, 0)).unwrap();
        assert_eq!(r.hits, 0);
        let r =
            small_ball_estimate(&e1, Ensemble::Rademacher, 1.0, 1000, SeedSpec::new(4, 0)).unwrap();
        assert_eq!(r.hits, 1000);
    }
}
