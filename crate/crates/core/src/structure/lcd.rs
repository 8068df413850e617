use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{sample_rect, sample_vector, Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize_in, OrthonormalBasis, RealVector};

/// Width at which the bisection of an admissible grid cell stops.
pub const BISECTION_TOL: f64 = 1e-10;

/// `(dist(v, Zⁿ), round(v))` with ties rounded away from zero.
pub fn dist_to_lattice(v: &RealVector) -> (f64, Vec<i64>) {
    let mut sq = 0.0;
    let rounded = v
        .as_slice()
        .iter()
        .map(|&x| {
            let r = x.round();
            sq += (x - r) * (x - r);
            r as i64
        })
        .collect();
    (sq.sqrt(), rounded)
}

fn dist_scaled(a: &[f64], theta: f64) -> f64 {
    a.iter()
        .map(|&x| {
            let y = theta * x;
            let f = y - y.round();
            f * f
        })
        .sum::<f64>()
        .sqrt()
}

/// Parameters of `LCD_{α,γ}(a) = inf{θ > 0 : dist(θa, Zⁿ) < min(γ‖θa‖₂, α)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcdQuery {
    pub alpha: f64,
    pub gamma: f64,
    /// Search horizon; `θ` is scanned over `(0, theta_max]`.
    pub theta_max: f64,
    /// Requested scan step. The effective step never exceeds
    /// `γ / (4‖a‖)`; `None` selects `min(γ, 0.1) / (4‖a‖)`.
    pub grid_step: Option<f64>,
}

impl LcdQuery {
    pub fn new(alpha: f64, gamma: f64, theta_max: f64) -> Self {
        Self {
            alpha,
            gamma,
            theta_max,
            grid_step: None,
        }
    }

    /// `γ = 0.5`, `α = √n/2`, `θ_max = 10⁴`.
    pub fn defaults_for(n: usize) -> Self {
        Self::new((n as f64).sqrt() / 2.0, 0.5, 1e4)
    }

    pub fn with_grid_step(self, step: f64) -> Self {
        Self {
            grid_step: Some(step),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidQuery(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidQuery(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.theta_max > 0.0 && self.theta_max.is_finite()) {
            return Err(Error::InvalidQuery(format!(
                "theta_max must be positive, got {}",
                self.theta_max
            )));
        }
        if let Some(s) = self.grid_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidQuery(format!(
                    "grid_step must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn effective_step(&self, norm_a: f64) -> f64 {
        let default = self.gamma.min(0.1) / (4.0 * norm_a);
        match self.grid_step {
            None => default,
            Some(s) => s.min(self.gamma / (4.0 * norm_a)),
        }
    }

    /// `dist(θa) − min(γ‖θa‖, α)`; negative exactly when `θ` is admissible.
    fn margin(&self, a: &[f64], norm_a: f64, theta: f64) -> f64 {
        dist_scaled(a, theta) - (self.gamma * theta * norm_a).min(self.alpha)
    }
}

/// Located infimum of the admissible set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcdResult {
    /// `None` when no admissible `θ ≤ θ_max` was found (LCD > θ_max).
    pub theta_star: Option<f64>,
    /// `dist(θ a, Zⁿ)` at `theta_star`, or at the grid point with the
    /// smallest margin when unbounded.
    pub achieved_dist: f64,
    /// Lattice point nearest to `θ a` at that `θ`.
    pub certificate: Vec<i64>,
    /// Width of the final bisection bracket.
    pub slack: f64,
    pub grid_step: f64,
    pub query: LcdQuery,
}

impl LcdResult {
    pub fn is_bounded(&self) -> bool {
        self.theta_star.is_some()
    }
}

/// Scans `θ` on a grid and refines the first admissible cell by bisection.
pub fn lcd_vector(a: &RealVector, q: &LcdQuery) -> Result<LcdResult> {
    q.validate()?;
    let norm_a = a.norm();
    if !(norm_a > 0.0) {
        return Err(Error::InvalidQuery("LCD of the zero vector".into()));
    }
    let av = a.as_slice();
    let step = q.effective_step(norm_a);
    let points = (q.theta_max / step).ceil() as u64;
    let theta_at = |i: u64| (i as f64 * step).min(q.theta_max);

    let mut best = (f64::INFINITY, q.theta_max);
    let mut prev = 0.0;
    for i in 1..=points {
        let theta = theta_at(i);
        let m = q.margin(av, norm_a, theta);
        if m < 0.0 {
            let (mut lo, mut hi) = (prev, theta);
            while hi - lo > BISECTION_TOL {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if q.margin(av, norm_a, mid) < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let (d, cert) = dist_to_lattice(&a.scaled(hi));
            return Ok(LcdResult {
                theta_star: Some(hi),
                achieved_dist: d,
                certificate: cert,
                slack: hi - lo,
                grid_step: step,
                query: *q,
            });
        }
        if m < best.0 {
            best = (m, theta);
        }
        prev = theta;
    }
    let (d, cert) = dist_to_lattice(&a.scaled(best.1));
    Ok(LcdResult {
        theta_star: None,
        achieved_dist: d,
        certificate: cert,
        slack: 0.0,
        grid_step: step,
        query: *q,
    })
}

/// Span of `dim` i.i.d. Gaussian vectors in `Rⁿ`, orthonormalized.
pub fn gaussian_subspace(n: usize, dim: usize, seed: SeedSpec) -> Result<OrthonormalBasis> {
    if dim == 0 || dim > n {
        return Err(Error::InvalidQuery(format!(
            "subspace dimension must lie in 1..={n}, got {dim}"
        )));
    }
    let g = sample_rect(Ensemble::Gaussian, n, dim, seed);
    orthonormalize_in(n, &g.columns())
}

/// Minimum of [`lcd_vector`] over sampled unit directions of a subspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceLcdResult {
    pub samples: usize,
    /// Samples for which an admissible `θ ≤ θ_max` existed.
    pub bounded_samples: usize,
    /// The sampled unit direction attaining the minimum.
    pub direction: RealVector,
    pub result: LcdResult,
}

/// Estimates `LCD_{α,γ}(H) = inf{LCD(a) : a ∈ H, ‖a‖ = 1}` from above by
/// sampling `samples` uniformly distributed unit vectors of `H`.
///
/// Sample `s` uses Gaussian coordinates in the basis drawn from stream
/// `seed.stream_index + s`.
pub fn lcd_subspace_sampled(
    basis: &OrthonormalBasis,
    q: &LcdQuery,
    samples: usize,
    seed: SeedSpec,
) -> Result<SubspaceLcdResult> {
    q.validate()?;
    if samples == 0 {
        return Err(Error::InvalidQuery("samples must be at least 1".into()));
    }
    if basis.dim() == 0 {
        return Err(Error::InvalidQuery("subspace is {0}".into()));
    }
    let n = basis.ambient_dim();
    let results: Vec<(RealVector, LcdResult)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let stream = SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(s as u64));
            let coeffs = sample_vector(Ensemble::Gaussian, basis.dim(), stream);
            let mut a = vec![0.0; n];
            for (c, qv) in coeffs.as_slice().iter().zip(basis.vectors()) {
                for (ai, qi) in a.iter_mut().zip(qv.as_slice()) {
                    *ai += c * qi;
                }
            }
            let dir = RealVector::from_vec(a)
                .normalized()
                .ok_or_else(|| Error::DegenerateGeometry("zero sampled direction".into()))?;
            let r = lcd_vector(&dir, q)?;
            Ok((dir, r))
        })
        .collect::<Result<_>>()?;

    let bounded_samples = results.iter().filter(|(_, r)| r.is_bounded()).count();
    // First minimum in sample order, so the result does not depend on
    // how the samples were partitioned.
    let key = |r: &LcdResult| r.theta_star.unwrap_or(f64::INFINITY);
    let (direction, result) = results
        .into_iter()
        .reduce(|best, cur| {
            if key(&cur.1) < key(&best.1) {
                cur
            } else {
                best
            }
        })
        .expect("samples >= 1");
    Ok(SubspaceLcdResult {
        samples,
        bounded_samples,
        direction,
        result,
    })
}
