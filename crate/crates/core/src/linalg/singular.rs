//! Smallest singular value via Householder bidiagonalization followed by
//! bisection on the Golub-Kahan tridiagonal form.
//!
//! The bidiagonal `B` (diagonal `d`, superdiagonal `e`) has the same
//! singular values as `A`. The `2n x 2n` symmetric tridiagonal with zero
//! diagonal and off-diagonal `(d0, e0, d1, e1, ..., d_{n-1})` has
//! eigenvalues `±σ_i`, so a Sturm count at `x > 0` equals
//! `n + #{σ_i < x}`. Bisection on that count locates `σ_min` to high
//! relative accuracy.

use super::lu::LuFactor;
use super::matrix::RealMatrix;
use crate::error::{Error, Result};

/// `s_n(A) = inf_{‖x‖=1} ‖Ax‖₂`.
///
/// Returns `0.0` when the LU pivot test flags `A` as singular.
pub fn smallest_singular_value(a: &RealMatrix) -> Result<f64> {
    a.require_square()?;
    match LuFactor::new(a) {
        Ok(_) => Ok(smallest_singular_value_unchecked(a)),
        Err(Error::SingularMatrix { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// As [`smallest_singular_value`] without the singularity pre-check.
pub fn smallest_singular_value_unchecked(a: &RealMatrix) -> f64 {
    let (d, e) = bidiagonalize(a);
    bidiagonal_min_singular(&d, &e)
}

/// Reduces a square matrix to upper bidiagonal form; returns `(d, e)`.
/// Only magnitudes are meaningful.
pub(crate) fn bidiagonalize(a: &RealMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.n_rows();
    let mut m = a.to_col_major();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut scratch = vec![0.0; n];

    for k in 0..n {
        // Left reflector zeroing column k below the diagonal.
        let col = &mut m[k * n + k..(k + 1) * n];
        match householder(col) {
            None => d[k] = 0.0,
            Some((alpha, beta)) => {
                d[k] = alpha;
                let v: Vec<f64> = col.to_vec();
                for j in k + 1..n {
                    let cj = &mut m[j * n + k..(j + 1) * n];
                    let s: f64 = v.iter().zip(cj.iter()).map(|(a, b)| a * b).sum();
                    let f = beta * s;
                    for (c, vi) in cj.iter_mut().zip(&v) {
                        *c -= f * vi;
                    }
                }
            }
        }

        if k + 1 >= n {
            break;
        }
        // Right reflector zeroing row k right of the superdiagonal.
        let mut w: Vec<f64> = (k + 1..n).map(|j| m[j * n + k]).collect();
        match householder(&mut w) {
            None => e[k] = 0.0,
            Some((alpha, beta)) => {
                e[k] = alpha;
                let s = &mut scratch[k + 1..n];
                s.iter_mut().for_each(|x| *x = 0.0);
                for (jj, wj) in w.iter().enumerate() {
                    let cj = &m[(k + 1 + jj) * n + k + 1..(k + 2 + jj) * n];
                    for (si, c) in s.iter_mut().zip(cj) {
                        *si += c * wj;
                    }
                }
                for (jj, wj) in w.iter().enumerate() {
                    let f = beta * wj;
                    let cj = &mut m[(k + 1 + jj) * n + k + 1..(k + 2 + jj) * n];
                    for (c, si) in cj.iter_mut().zip(s.iter()) {
                        *c -= f * si;
                    }
                }
            }
        }
    }
    (d, e)
}

/// Overwrites `x` with the Householder vector `v` such that
/// `(I − β v vᵀ) x = α e₁`; returns `(α, β)`, or `None` if `x = 0`.
fn householder(x: &mut [f64]) -> Option<(f64, f64)> {
    let norm = super::matrix::norm(x);
    if norm == 0.0 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    x[0] -= alpha;
    let vv: f64 = x.iter().map(|v| v * v).sum();
    if vv == 0.0 {
        return Some((alpha, 0.0));
    }
    Some((alpha, 2.0 / vv))
}

/// Smallest singular value of the upper bidiagonal matrix `(d, e)`.
pub(crate) fn bidiagonal_min_singular(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    if n == 0 {
        return 0.0;
    }
    let mut f = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        f.push(d[i]);
        if i + 1 < n {
            f.push(e[i]);
        }
    }
    let f2: Vec<f64> = f.iter().map(|x| x * x).collect();
    let max_f2 = f2.iter().cloned().fold(0.0_f64, f64::max);
    if max_f2 == 0.0 {
        return 0.0;
    }
    let pivmin = f64::MIN_POSITIVE * max_f2.max(1.0);

    let mut hi = 0.0_f64;
    for i in 0..f.len() {
        let left = if i > 0 { f[i - 1].abs() } else { 0.0 };
        hi = hi.max(left + f[i].abs());
    }
    hi = hi.max(f[f.len() - 1].abs()) * (1.0 + 4.0 * f64::EPSILON) + pivmin;
    let mut lo = 0.0_f64;

    // #{σ < x} for x > 0.
    let below = |x: f64| -> usize {
        let mut count = 0usize;
        let mut q = -x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for &b2 in &f2 {
            q = -x - b2 / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count.saturating_sub(n)
    };

    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal() {
        assert!((smallest_singular_value(&RealMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-15);
        let d = RealMatrix::diagonal(&[3.0, 2.0, 0.5]);
        assert!((smallest_singular_value(&d).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn shear_matches_characteristic_polynomial() {
        // AᵀA = [[1,1],[1,2]] has eigenvalues (3 ± √5)/2.
        let a = RealMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let expect = ((3.0 - 5f64.sqrt()) / 2.0).sqrt();
        assert!((expect - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let s = smallest_singular_value(&a).unwrap();
        assert!((s / expect - 1.0).abs() < 1e-12, "{s} vs {expect}");
    }

    #[test]
    fn singular_returns_zero() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(smallest_singular_value(&a).unwrap(), 0.0);
    }

    #[test]
    fn non_square_rejected() {
        let a = RealMatrix::from_row_major(1, 2, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            smallest_singular_value(&a),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn one_by_one() {
        let a = RealMatrix::from_row_major(1, 1, vec![-0.25]).unwrap();
        assert!((smallest_singular_value(&a).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn graded_bidiagonal_keeps_relative_accuracy() {
        // B = [[1, 1], [0, 1e-9]]: σ_min ≈ 1e-9/√2 (σ_min σ_max = 1e-9, σ_max ≈ √2).
        let s = bidiagonal_min_singular(&[1.0, 1e-9], &[1.0]);
        let expect = 1e-9 / 2f64.sqrt();
        assert!((s / expect - 1.0).abs() < 1e-8, "{s} vs {expect}");
    }
}
