use super::lu::LuFactor;
use super::matrix::{RealMatrix, RealVector};
use super::ortho::{dist_to_subspace, orthonormalize_in};
use crate::error::Result;

/// Paired lists `(X_k, X_k*)` with `⟨X_j*, X_k⟩ = δ_jk`.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    ambient_dim: usize,
    primal: Vec<RealVector>,
    dual: Vec<RealVector>,
}

impl BiorthogonalSystem {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn primal(&self) -> &[RealVector] {
        &self.primal
    }

    pub fn dual(&self) -> &[RealVector] {
        &self.dual
    }

    pub fn len(&self) -> usize {
        self.primal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty()
    }

    /// `max_{j,k} |⟨dual[j], primal[k]⟩ − δ_jk|`.
    pub fn max_biorthogonality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (j, d) in self.dual.iter().enumerate() {
            for (k, p) in self.primal.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((d.dot(p) - target).abs());
            }
        }
        worst
    }

    /// `‖dual[k]‖₂ · dist(primal[k], span{primal[i] : i ≠ k})`, which equals 1
    /// for a complete biorthogonal system.
    pub fn norm_distance_products(&self) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|k| {
                let others: Vec<RealVector> = self
                    .primal
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, v)| v.clone())
                    .collect();
                let basis = orthonormalize_in(self.ambient_dim, &others)?;
                Ok(self.dual[k].norm() * dist_to_subspace(&self.primal[k], &basis)?)
            })
            .collect()
    }
}

/// Dual system of the columns of an invertible matrix:
/// `primal[k] = A e_k`, `dual[k] = (A⁻¹)ᵀ e_k` (row `k` of `A⁻¹`).
pub fn dual_basis(a: &RealMatrix) -> Result<BiorthogonalSystem> {
    let n = a.require_square()?;
    let lu = LuFactor::new(a)?;
    let inv = lu.inverse();
    Ok(BiorthogonalSystem {
        ambient_dim: n,
        primal: a.columns(),
        dual: (0..n).map(|k| inv.row(k)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn identity_is_self_dual() {
        let s = dual_basis(&RealMatrix::identity(4)).unwrap();
        for k in 0..4 {
            assert_eq!(s.dual()[k], RealVector::basis(4, k));
        }
        assert_eq!(s.max_biorthogonality_error(), 0.0);
    }

    #[test]
    fn diagonal_duals_are_reciprocals() {
        let s = dual_basis(&RealMatrix::diagonal(&[2.0, 4.0])).unwrap();
        assert_eq!(s.dual()[0].as_slice(), &[0.5, 0.0]);
        assert_eq!(s.dual()[1].as_slice(), &[0.0, 0.25]);
        for p in s.norm_distance_products().unwrap() {
            assert!((p - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_rejected() {
        let a = RealMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(matches!(dual_basis(&a), Err(Error::SingularMatrix { .. })));
    }
}
