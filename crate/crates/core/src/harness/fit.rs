use serde::Serialize;

use super::tail::{Direction, TailEstimate};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitPoint {
    #[serde(rename = "K")]
    pub k: f64,
    pub p_hat: f64,
    pub fitted: f64,
    pub residual: f64,
}

/// Least-squares fit of a one-constant tail model.
///
/// Upper tails use `p(K) ≈ C log(K) / K`; lower tails use `p(ε) ≈ C ε`.
/// The additive `cⁿ` term is dropped: at the dimensions a desk run can
/// reach it is far below Monte Carlo resolution, so `c` is not identifiable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub direction: Direction,
    pub n: usize,
    pub c: f64,
    pub points: Vec<FitPoint>,
}

impl TailFit {
    pub fn model(&self, k: f64) -> f64 {
        self.c * basis(self.direction, k)
    }

    /// Whether `model(K) ≥ p_hat − widths · (ci_high − ci_low)` for every
    /// estimate with `K ≥ k_min`.
    pub fn dominates_within(&self, estimates: &[TailEstimate], k_min: f64, widths: f64) -> bool {
        estimates
            .iter()
            .filter(|e| e.k >= k_min)
            .all(|e| self.model(e.k) >= e.p_hat - widths * (e.ci_high - e.ci_low))
    }
}

fn basis(direction: Direction, k: f64) -> f64 {
    match direction {
        Direction::Upper => k.ln() / k,
        Direction::Lower => k,
    }
}

/// Fits `C` through the origin. All estimates must share `n` and direction
/// and cover at least three distinct thresholds.
pub fn fit_tail_model(estimates: &[TailEstimate]) -> Result<TailFit> {
    let first = estimates
        .first()
        .ok_or_else(|| Error::InsufficientData("no estimates".into()))?;
    if estimates
        .iter()
        .any(|e| e.n != first.n || e.direction != first.direction)
    {
        return Err(Error::InsufficientData(
            "estimates mix dimensions or directions".into(),
        ));
    }
    let mut ks: Vec<f64> = estimates.iter().map(|e| e.k).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 distinct thresholds, got {}",
            ks.len()
        )));
    }
    let g: Vec<f64> = estimates
        .iter()
        .map(|e| basis(first.direction, e.k))
        .collect();
    let gg: f64 = g.iter().map(|x| x * x).sum();
    if !(gg > 0.0) || !gg.is_finite() {
        return Err(Error::InsufficientData(
            "model basis vanishes at every threshold".into(),
        ));
    }
    let c = estimates
        .iter()
        .zip(&g)
        .map(|(e, x)| e.p_hat * x)
        .sum::<f64>()
        / gg;
    let points = estimates
        .iter()
        .zip(&g)
        .map(|(e, x)| FitPoint {
            k: e.k,
            p_hat: e.p_hat,
            fitted: c * x,
            residual: e.p_hat - c * x,
        })
        .collect();
    Ok(TailFit {
        direction: first.direction,
        n: first.n,
        c,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Ensemble;

    fn est(direction: Direction, k: f64, p: f64) -> TailEstimate {
        TailEstimate {
            ensemble: Ensemble::Gaussian,
            n: 10,
            k,
            direction,
            trials: 1000,
            exceed_count: 0,
            p_hat: p,
            ci_low: p,
            ci_high: p,
            singular_count: 0,
            master_seed: 0,
            outside_bound_range: false,
        }
    }

    #[test]
    fn recovers_synthetic_upper_constant() {
        let es: Vec<_> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&k: &f64| est(Direction::Upper, k, 3.0 * k.ln() / k))
            .collect();
        let f = fit_tail_model(&es).unwrap();
        assert!((f.c - 3.0).abs() < 1e-6);
        assert!(f.points.iter().all(|p| p.residual.abs() < 1e-12));
    }

    #[test]
    fn recovers_synthetic_lower_slope() {
        let es: Vec<_> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&e| est(Direction::Lower, e, 1.4 * e))
            .collect();
        assert!((fit_tail_model(&es).unwrap().c - 1.4).abs() < 1e-6);
    }

    #[test]
    fn insufficient_data() {
        let es = vec![
            est(Direction::Upper, 2.0, 0.1),
            est(Direction::Upper, 4.0, 0.05),
        ];
        assert!(matches!(
            fit_tail_model(&es),
            Err(Error::InsufficientData(_))
        ));
        assert!(fit_tail_model(&[]).is_err());
        let mut mixed: Vec<_> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&k| est(Direction::Upper, k, 0.1))
            .collect();
        mixed[1].n = 11;
        assert!(fit_tail_model(&mixed).is_err());
    }
}
