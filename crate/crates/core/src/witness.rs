//! Witness objects for an upper bound on `s_n(A)`.
//!
//! For columns `X_1, ..., X_n` of an invertible `A`, let `H_1` be the span
//! of `X_2, ..., X_n` and `P_1` the orthogonal projection onto it. The
//! witness is `x = X_1 − P_1 X_1`. Since `s_n(A) = inf ‖Ay‖/‖y‖`, taking
//! `y = A⁻¹x` gives `s_n(A) ≤ ‖x‖ / ‖A⁻¹x‖`.
//!
//! The audit evaluates every identity along the way as a numerical
//! statement with a fixed tolerance:
//!
//! * `‖x‖ = dist(X_1, H_1) = 1/‖X_1*‖` where `X_k* = (A⁻¹)ᵀ e_k`;
//! * `P_1 X_1* = 0` (the kernel of `P_1` is spanned by `X_1*`);
//! * `Y_k* = P_1 X_k*` (`k ≥ 2`) is biorthogonal to `X_2, ..., X_n`;
//! * `‖Y_k*‖ · b_k = 1` with `b_k = dist(X_k, span{X_j : j ∉ {1, k}})`;
//! * `‖A⁻¹x‖² ≥ Σ_k (a_k / b_k)²` with `a_k = |⟨Y_k*/‖Y_k*‖, X_1⟩|`;
//! * `s_n(A) ≤ (u/v) n^{-1/2}` for `u = ‖x‖`, `v = ‖A⁻¹x‖ / √n`.

use serde::Serialize;

use crate::ensembles::{sample_vector, Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{
    dist_to_subspace, orthonormalize_in, project_onto, smallest_singular_value_unchecked, LuFactor,
    OrthonormalBasis, RealMatrix, RealVector,
};

/// `b_k` or `‖Y_k*‖` at or below this value is treated as zero.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

pub const NORM_SUM_TOL: f64 = 1e-8;
pub const IMPLIED_BOUND_TOL: f64 = 1e-8;
pub const NORM_X_TOL: f64 = 1e-8;
pub const KERNEL_TOL: f64 = 1e-9;
pub const BIORTHOGONALITY_TOL: f64 = 1e-8;
pub const NORM_DISTANCE_TOL: f64 = 1e-6;
pub const WITNESS_ORTHOGONALITY_TOL: f64 = 1e-9;
pub const INDEPENDENCE_TOL: f64 = 1e-9;

/// Intermediate objects shared by the witness operations.
struct Geometry {
    n: usize,
    columns: Vec<RealVector>,
    lu: LuFactor,
    /// Orthonormal basis of `H_1`.
    h1: OrthonormalBasis,
    /// `X_k* = (A⁻¹)ᵀ e_k`, i.e. the rows of `A⁻¹`.
    duals: Vec<RealVector>,
}

impl Geometry {
    fn new(a: &RealMatrix) -> Result<Self> {
        let n = a.require_square()?;
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let lu = LuFactor::new(a)?;
        let columns = a.columns();
        let h1 = orthonormalize_in(n, &columns[1..]).map_err(degenerate)?;
        let inv = lu.inverse();
        let duals = (0..n).map(|k| inv.row(k)).collect();
        Ok(Self {
            n,
            columns,
            lu,
            h1,
            duals,
        })
    }

    fn witness(&self) -> RealVector {
        self.h1
            .residual(&self.columns[0])
            .expect("dimensions agree")
    }

    /// `Y_k* = P_1 X_k*` for `k = 2..n`.
    fn dual_projections(&self) -> Vec<RealVector> {
        self.duals[1..]
            .iter()
            .map(|d| project_onto(&self.h1, d).expect("dimensions agree"))
            .collect()
    }

    /// `b_k = dist(X_k, H_{1,k})` for `k = 2..n`, each from its own basis.
    fn distances(&self) -> Result<Vec<f64>> {
        (1..self.n)
            .map(|k| {
                let others: Vec<RealVector> = self
                    .columns
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != 0 && i != k)
                    .map(|(_, c)| c.clone())
                    .collect();
                let basis = orthonormalize_in(self.n, &others).map_err(degenerate)?;
                dist_to_subspace(&self.columns[k], &basis)
            })
            .collect()
    }
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::NumericallyDependent { index } => Error::DegenerateGeometry(format!(
            "column subset is numerically dependent at position {index}"
        )),
        other => other,
    }
}

/// `x = X_1 − P_1 X_1`.
pub fn construct_witness_vector(a: &RealMatrix) -> Result<RealVector> {
    Ok(Geometry::new(a)?.witness())
}

/// `Y_k* = P_1 X_k*` for `k = 2..n` (returned in that order).
pub fn dual_projections(a: &RealMatrix) -> Result<Vec<RealVector>> {
    Ok(Geometry::new(a)?.dual_projections())
}

/// Returns `(a, b)` indexed by `k = 2..n`.
pub fn compute_ab(a: &RealMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = Geometry::new(a)?;
    let ys = g.dual_projections();
    let (aa, bb, _) = ab_from(&g, &ys)?;
    Ok((aa, bb))
}

/// `(a, b, ‖Y_k*‖)`.
fn ab_from(g: &Geometry, ys: &[RealVector]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let b = g.distances()?;
    let mut a = Vec::with_capacity(ys.len());
    let mut y_norms = Vec::with_capacity(ys.len());
    for (i, y) in ys.iter().enumerate() {
        let yn = y.norm();
        if !(yn > DEGENERATE_THRESHOLD) {
            return Err(Error::DegenerateGeometry(format!(
                "‖Y_{}*‖ = {yn:e} is numerically zero",
                i + 2
            )));
        }
        if !(b[i] > DEGENERATE_THRESHOLD) {
            return Err(Error::DegenerateGeometry(format!(
                "b_{} = {:e} is numerically zero",
                i + 2,
                b[i]
            )));
        }
        a.push((y.dot(&g.columns[0]) / yn).abs());
        y_norms.push(yn);
    }
    Ok((a, b, y_norms))
}

/// A failed numerical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    /// The measured error or excess.
    pub value: f64,
    pub tolerance: f64,
}

/// Measured residuals of every audited identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditChecks {
    /// `dist(X_1, H_1)` computed as `1/‖X_1*‖`.
    pub dist_x1_h1: f64,
    /// `|‖x‖ − dist(X_1, H_1)| / dist(X_1, H_1)`.
    pub norm_x_rel_error: f64,
    /// `max_k |⟨x, X_k⟩| / (‖X_1‖ ‖X_k‖)` over `k ≥ 2`.
    pub witness_orthogonality: f64,
    /// `‖P_1 X_1*‖ / ‖X_1*‖`.
    pub kernel_residual: f64,
    /// `max_{j,k ≥ 2} |⟨Y_j*, X_k⟩ − δ_jk|`.
    pub dual_biorthogonality: f64,
    /// `max_k |‖Y_k*‖ b_k − 1|`.
    pub dual_norm_distance: f64,
    /// `Σ (a_k/b_k)² − ‖A⁻¹x‖²`; nonpositive when the inequality holds.
    pub norm_sum_excess: f64,
}

/// Proof objects and audit results for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub n: usize,
    /// 1-based index of the column playing the role of `X_1`.
    pub distinguished_column: usize,
    /// 1-based original column indices for the entries of `a` and `b`.
    pub columns: Vec<usize>,
    pub x: RealVector,
    pub norm_x: f64,
    pub ainv_x_norm: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub ratio_sum_sq: f64,
    pub s_n: f64,
    pub implied_bound: f64,
    pub checks: AuditChecks,
    pub violations: Vec<Violation>,
}

impl WitnessReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Audits `A` with its first column distinguished.
pub fn audit(a: &RealMatrix) -> Result<WitnessReport> {
    audit_column(a, 0)
}

/// Audits `A` with column `column` (0-based) distinguished, by swapping it
/// into first position.
pub fn audit_column(a: &RealMatrix, column: usize) -> Result<WitnessReport> {
    let n = a.require_square()?;
    if column >= n {
        return Err(Error::InvalidQuery(format!(
            "column {} out of range 1..={n}",
            column + 1
        )));
    }
    let mut m = a.clone();
    m.swap_columns(0, column);
    let g = Geometry::new(&m)?;

    let x = g.witness();
    let norm_x = x.norm();
    let ainv_x_norm = g.lu.solve(&x)?.norm();
    let ys = g.dual_projections();
    let (av, bv, y_norms) = ab_from(&g, &ys)?;
    let ratio_sum_sq: f64 = av.iter().zip(&bv).map(|(a, b)| (a / b) * (a / b)).sum();
    let s_n = smallest_singular_value_unchecked(&m);
    let nf = n as f64;
    let (u, v) = (norm_x, ainv_x_norm / nf.sqrt());
    let implied_bound = (u / v) / nf.sqrt();

    let dist_x1_h1 = 1.0 / g.duals[0].norm();
    let x1_norm = g.columns[0].norm();
    let witness_orthogonality = g.columns[1..]
        .iter()
        .map(|c| x.dot(c).abs() / (x1_norm * c.norm()))
        .fold(0.0, f64::max);
    let kernel_residual = project_onto(&g.h1, &g.duals[0])?.norm() / g.duals[0].norm();
    let mut dual_biorthogonality = 0.0_f64;
    for (j, y) in ys.iter().enumerate() {
        for (k, c) in g.columns[1..].iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            dual_biorthogonality = dual_biorthogonality.max((y.dot(c) - target).abs());
        }
    }
    let dual_norm_distance = y_norms
        .iter()
        .zip(&bv)
        .map(|(y, b)| (y * b - 1.0).abs())
        .fold(0.0, f64::max);
    let checks = AuditChecks {
        dist_x1_h1,
        norm_x_rel_error: (norm_x - dist_x1_h1).abs() / dist_x1_h1,
        witness_orthogonality,
        kernel_residual,
        dual_biorthogonality,
        dual_norm_distance,
        norm_sum_excess: ratio_sum_sq - ainv_x_norm * ainv_x_norm,
    };

    let mut violations = Vec::new();
    let mut flag = |check, value: f64, tolerance: f64, ok: bool| {
        if !ok {
            violations.push(Violation {
                check,
                value,
                tolerance,
            });
        }
    };
    let lhs = ainv_x_norm * ainv_x_norm;
    flag(
        "norm_sum",
        checks.norm_sum_excess,
        NORM_SUM_TOL * (1.0 + ratio_sum_sq),
        lhs >= ratio_sum_sq - NORM_SUM_TOL * (1.0 + ratio_sum_sq),
    );
    flag(
        "implied_bound",
        s_n / implied_bound - 1.0,
        IMPLIED_BOUND_TOL,
        s_n <= implied_bound * (1.0 + IMPLIED_BOUND_TOL),
    );
    flag(
        "norm_x_distance",
        checks.norm_x_rel_error,
        NORM_X_TOL,
        checks.norm_x_rel_error <= NORM_X_TOL,
    );
    flag(
        "witness_orthogonality",
        witness_orthogonality,
        WITNESS_ORTHOGONALITY_TOL,
        witness_orthogonality <= WITNESS_ORTHOGONALITY_TOL,
    );
    flag(
        "kernel_p1",
        kernel_residual,
        KERNEL_TOL,
        kernel_residual <= KERNEL_TOL,
    );
    flag(
        "dual_biorthogonality",
        dual_biorthogonality,
        BIORTHOGONALITY_TOL,
        dual_biorthogonality <= BIORTHOGONALITY_TOL,
    );
    flag(
        "dual_norm_distance",
        dual_norm_distance,
        NORM_DISTANCE_TOL,
        dual_norm_distance <= NORM_DISTANCE_TOL,
    );

    let columns = (1..n)
        .map(|p| if p == column { 1 } else { p + 1 })
        .collect();
    Ok(WitnessReport {
        n,
        distinguished_column: column + 1,
        columns,
        x,
        norm_x,
        ainv_x_norm,
        a: av,
        b: bv,
        ratio_sum_sq,
        s_n,
        implied_bound,
        checks,
        violations,
    })
}

/// Outcome of re-deriving `Y_k*` under resampled first columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub n: usize,
    pub trials: usize,
    /// Trials whose matrix passed the singularity test.
    pub evaluated: usize,
    pub singular_skipped: usize,
    /// `max_{trial, k, i} |Y_k*(i) − Y_k*(i) of the first evaluated trial|`.
    pub max_deviation: f64,
    pub passed: bool,
}

/// Holds `X_2, ..., X_n` fixed and draws a fresh `X_1` from `ensemble` per
/// trial; the recomputed `Y_k*` must not change.
pub fn independence_probe(
    fixed_columns: &[RealVector],
    ensemble: Ensemble,
    trials: usize,
    seed: SeedSpec,
) -> Result<IndependenceReport> {
    let n = fixed_columns.len() + 1;
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if let Some(c) = fixed_columns.iter().find(|c| c.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: c.dim(),
        });
    }
    let mut reference: Option<Vec<RealVector>> = None;
    let mut evaluated = 0;
    let mut singular_skipped = 0;
    let mut max_deviation = 0.0_f64;
    for t in 0..trials {
        let stream = SeedSpec::new(seed.master_seed, seed.stream_index.wrapping_add(t as u64));
        let x1 = sample_vector(ensemble, n, stream);
        let mut cols = Vec::with_capacity(n);
        cols.push(x1);
        cols.extend_from_slice(fixed_columns);
        let a = RealMatrix::from_columns(&cols)?;
        let ys = match dual_projections(&a) {
            Ok(ys) => ys,
            Err(Error::SingularMatrix { .. }) => {
                singular_skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        evaluated += 1;
        match &reference {
            None => reference = Some(ys),
            Some(r) => {
                for (y, y0) in ys.iter().zip(r) {
                    let d = y.sub(y0).norm_inf();
                    max_deviation = max_deviation.max(d);
                }
            }
        }
    }
    Ok(IndependenceReport {
        n,
        trials,
        evaluated,
        singular_skipped,
        max_deviation,
        passed: max_deviation <= INDEPENDENCE_TOL,
    })
}
