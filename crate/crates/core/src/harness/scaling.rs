use serde::Serialize;

use super::sampling::{check_n, map_trials};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{smallest_singular_value_unchecked, RealVector};
use crate::stats::{half_normal_cdf, ks_statistic, quantile_sorted};

/// Robust statistics of `√n · s_n(A)` at one `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub ensemble: Ensemble,
    pub n: usize,
    pub trials: u64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub singular_count: u64,
}

/// Samples of `√n · s_n(A)` in trial order, plus the singular-redraw count.
pub fn scaled_singular_values(
    ensemble: Ensemble,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<(Vec<f64>, u64)> {
    check_n(n)?;
    let scale = (n as f64).sqrt();
    let outcomes = map_trials(ensemble, n, trials, master_seed, |_, d| {
        Some(scale * smallest_singular_value_unchecked(&d.matrix))
    });
    let redraws = outcomes.iter().map(|o| o.redraws as u64).sum();
    Ok((
        outcomes.into_iter().filter_map(|o| o.value).collect(),
        redraws,
    ))
}

/// Median and interquartile range of `√n · s_n` for each `n`.
pub fn median_scaling_report(
    ensemble: Ensemble,
    n_values: &[usize],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<ScalingRow>> {
    if trials == 0 {
        return Err(Error::InvalidQuery("trials must be at least 1".into()));
    }
    n_values
        .iter()
        .map(|&n| {
            let (mut xs, singular_count) =
                scaled_singular_values(ensemble, n, trials, master_seed)?;
            if xs.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "no invertible draws at n = {n}"
                )));
            }
            xs.sort_by(f64::total_cmp);
            let q1 = quantile_sorted(&xs, 0.25);
            let q3 = quantile_sorted(&xs, 0.75);
            Ok(ScalingRow {
                ensemble,
                n,
                trials: xs.len() as u64,
                median: quantile_sorted(&xs, 0.5),
                q1,
                q3,
                iqr: q3 - q1,
                singular_count,
            })
        })
        .collect()
}

/// Thresholds at which [`distance_tail_experiment`] tabulates exceedances.
pub const DISTANCE_THRESHOLDS: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceExceedance {
    pub u: f64,
    pub count: u64,
    pub p_hat: f64,
}

/// Empirical law of `dist(X_1, H_1) = ‖x‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceTail {
    pub ensemble: Ensemble,
    pub n: usize,
    /// Per-trial distances in trial order.
    pub samples: Vec<f64>,
    pub table: Vec<DistanceExceedance>,
    /// Kolmogorov-Smirnov distance to `|N(0,1)|`.
    pub ks_half_normal: f64,
    pub singular_count: u64,
}

impl DistanceTail {
    /// Empirical `P(dist > u)`.
    pub fn exceedance(&self, u: f64) -> f64 {
        self.samples.iter().filter(|&&d| d > u).count() as f64 / self.samples.len() as f64
    }
}

/// Samples `dist(X_1, H_1)` per trial as `1/‖X_1*‖` with `X_1* = A⁻ᵀ e_1`.
pub fn distance_tail_experiment(
    ensemble: Ensemble,
    n: usize,
    trials: u64,
    master_seed: u64,
) -> Result<DistanceTail> {
    check_n(n)?;
    if trials == 0 {
        return Err(Error::InvalidQuery("trials must be at least 1".into()));
    }
    let outcomes = map_trials(ensemble, n, trials, master_seed, |_, d| {
        let dual = d.lu.solve_transpose(&RealVector::basis(n, 0)).ok()?;
        Some(1.0 / dual.norm())
    });
    let singular_count = outcomes.iter().map(|o| o.redraws as u64).sum();
    let samples: Vec<f64> = outcomes.into_iter().filter_map(|o| o.value).collect();
    let total = samples.len() as f64;
    let table = DISTANCE_THRESHOLDS
        .iter()
        .map(|&u| {
            let count = samples.iter().filter(|&&d| d > u).count() as u64;
            DistanceExceedance {
                u,
                count,
                p_hat: count as f64 / total,
            }
        })
        .collect();
    let ks_half_normal = ks_statistic(&samples, half_normal_cdf);
    Ok(DistanceTail {
        ensemble,
        n,
        samples,
        table,
        ks_half_normal,
        singular_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_matrix, SeedSpec};
    use crate::linalg::{dist_to_subspace, orthonormalize};

    #[test]
    fn distance_matches_projection_route() {
        let t = distance_tail_experiment(Ensemble::Gaussian, 7, 5, 21).unwrap();
        for (trial, d) in t.samples.iter().enumerate() {
            let a = sample_matrix(Ensemble::Gaussian, 7, SeedSpec::new(21, trial as u64)).unwrap();
            let cols = a.columns();
            let h1 = orthonormalize(&cols[1..]).unwrap();
            let direct = dist_to_subspace(&cols[0], &h1).unwrap();
            assert!((d / direct - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn every_distance_is_positive() {
        let t = distance_tail_experiment(Ensemble::Uniform, 5, 50, 3).unwrap();
        assert_eq!(t.exceedance(0.0), 1.0);
        assert_eq!(t.table.len(), DISTANCE_THRESHOLDS.len());
    }

    #[test]
    fn scaling_rows_are_ordered_statistics() {
        let rows = median_scaling_report(Ensemble::Gaussian, &[5, 10], 40, 1).unwrap();
        for r in rows {
            assert!(r.q1 <= r.median && r.median <= r.q3);
            assert_eq!(r.trials, 40);
        }
        assert!(median_scaling_report(Ensemble::Gaussian, &[1], 4, 1).is_err());
    }
}
