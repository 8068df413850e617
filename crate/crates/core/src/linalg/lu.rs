use super::matrix::{RealMatrix, RealVector};
use crate::error::{Error, Result};

/// Pivots smaller than this multiple of the largest initial column norm
/// mark the matrix as singular.
pub const PIVOT_THRESHOLD: f64 = 1e-13;

/// LU factorization `PA = LU` with partial pivoting.
///
/// `L` (unit lower) and `U` share one row-major buffer.
#[derive(Debug, Clone)]
pub struct LuFactor {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        let n = a.require_square()?;
        let threshold = PIVOT_THRESHOLD * a.max_column_norm();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if !(pivot >= threshold) || pivot == 0.0 {
                return Err(Error::SingularMatrix { pivot, threshold });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv = 1.0 / lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..(k + 1) * n];
            for row in tail.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        row[j] -= l * pivot_row[j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `Ay = b`.
    pub fn solve(&self, b: &RealVector) -> Result<RealVector> {
        self.check_dim(b)?;
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&y[i + 1..]).map(|(u, v)| u * v).sum();
            y[i] = (y[i] - s) / self.lu[i * n + i];
        }
        Ok(RealVector::from_vec(y))
    }

    /// Solves `Aᵀy = b`.
    pub fn solve_transpose(&self, b: &RealVector) -> Result<RealVector> {
        self.check_dim(b)?;
        let n = self.n;
        // Aᵀ = Uᵀ Lᵀ P, so solve Uᵀ w = b, Lᵀ z = w, then y = Pᵀ z.
        let mut w = b.as_slice().to_vec();
        for i in 0..n {
            let wi = w[i] / self.lu[i * n + i];
            w[i] = wi;
            for j in i + 1..n {
                w[j] -= self.lu[i * n + j] * wi;
            }
        }
        for i in (0..n).rev() {
            let wi = w[i];
            for j in 0..i {
                w[j] -= self.lu[i * n + j] * wi;
            }
        }
        let mut y = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            y[p] = w[k];
        }
        Ok(RealVector::from_vec(y))
    }

    /// Explicit inverse, column by column.
    pub fn inverse(&self) -> RealMatrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for k in 0..n {
            let col = self
                .solve(&RealVector::basis(n, k))
                .expect("dimension checked");
            for i in 0..n {
                data[i * n + k] = col[i];
            }
        }
        RealMatrix::from_raw(n, n, data)
    }

    fn check_dim(&self, b: &RealVector) -> Result<()> {
        if b.dim() == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                actual: b.dim(),
            })
        }
    }
}

/// Solves `Ay = b` by LU with partial pivoting.
pub fn lu_solve(a: &RealMatrix, b: &RealVector) -> Result<RealVector> {
    let n = a.require_square()?;
    if b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.dim(),
        });
    }
    LuFactor::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> RealVector {
        RealVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn identity_solve() {
        let y = lu_solve(&RealMatrix::identity(3), &v(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let y = lu_solve(&RealMatrix::diagonal(&[2.0, 4.0]), &v(&[2.0, 4.0])).unwrap();
        assert_eq!(y.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn needs_pivoting() {
        let a = RealMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let y = lu_solve(&a, &v(&[3.0, 5.0])).unwrap();
        assert_eq!(y.as_slice(), &[5.0, 3.0]);
    }

    #[test]
    fn transpose_solve() {
        let a =
            RealMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[0.0, 3.0, 1.0], &[1.0, 0.0, 4.0]]).unwrap();
        let lu = LuFactor::new(&a).unwrap();
        let b = v(&[1.0, -2.0, 0.5]);
        let y = lu.solve_transpose(&b).unwrap();
        let r = a.transpose().mul_vec(&y).unwrap().sub(&b);
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = RealMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(
            LuFactor::new(&a),
            Err(Error::SingularMatrix { .. })
        ));
        let z = RealMatrix::from_row_major(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(
            LuFactor::new(&z),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn non_square_and_bad_rhs() {
        let a = RealMatrix::from_row_major(2, 3, vec![1.0; 6]).unwrap();
        assert!(matches!(
            lu_solve(&a, &v(&[1.0, 1.0])),
            Err(Error::NonSquare { .. })
        ));
        let b = RealMatrix::identity(2);
        assert!(matches!(
            lu_solve(&b, &v(&[1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
