use super::matrix::{axpy, dot, norm, RealVector};
use crate::error::{Error, Result};

/// A vector whose Gram-Schmidt residual falls below this fraction of its
/// input norm is treated as lying in the span of its predecessors.
pub const DEPENDENCE_THRESHOLD: f64 = 1e-12;

/// Orthonormal basis of a subspace of `R^ambient_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    ambient_dim: usize,
    vectors: Vec<RealVector>,
}

impl OrthonormalBasis {
    /// Basis of the zero subspace.
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            vectors: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Dimension of the spanned subspace.
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[RealVector] {
        &self.vectors
    }

    /// `Σ ⟨q_i, v⟩ q_i` written into `out`.
    fn project_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        for q in &self.vectors {
            axpy(dot(q.as_slice(), v), q.as_slice(), out);
        }
    }

    /// `v - Pv`, with one re-projection pass so that the result is
    /// orthogonal to the basis to working precision.
    pub fn residual(&self, v: &RealVector) -> Result<RealVector> {
        self.check(v)?;
        let mut r = v.as_slice().to_vec();
        for _ in 0..2 {
            for q in &self.vectors {
                let c = dot(q.as_slice(), &r);
                axpy(-c, q.as_slice(), &mut r);
            }
        }
        Ok(RealVector::from_vec(r))
    }

    fn check(&self, v: &RealVector) -> Result<()> {
        if v.dim() == self.ambient_dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                actual: v.dim(),
            })
        }
    }
}

/// Orthonormalizes `vectors` in order by Gram-Schmidt with one full
/// re-orthogonalization pass.
///
/// All vectors must share a dimension; an empty list yields an error since
/// the ambient dimension is unknown (use [`OrthonormalBasis::empty`]).
pub fn orthonormalize(vectors: &[RealVector]) -> Result<OrthonormalBasis> {
    let ambient_dim = vectors
        .first()
        .map(RealVector::dim)
        .ok_or_else(|| Error::InvalidQuery("no vectors to orthonormalize".into()))?;
    orthonormalize_in(ambient_dim, vectors)
}

/// As [`orthonormalize`], accepting an empty list.
pub fn orthonormalize_in(ambient_dim: usize, vectors: &[RealVector]) -> Result<OrthonormalBasis> {
    let mut basis: Vec<RealVector> = Vec::with_capacity(vectors.len());
    for (index, v) in vectors.iter().enumerate() {
        if v.dim() != ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: ambient_dim,
                actual: v.dim(),
            });
        }
        let input_norm = v.norm();
        let mut w = v.as_slice().to_vec();
        for pass in 0..2 {
            for q in &basis {
                let c = dot(q.as_slice(), &w);
                axpy(-c, q.as_slice(), &mut w);
            }
            if pass == 0 && !(norm(&w) > DEPENDENCE_THRESHOLD * input_norm) {
                return Err(Error::NumericallyDependent { index });
            }
        }
        let r = norm(&w);
        if !(r > 0.0) {
            return Err(Error::NumericallyDependent { index });
        }
        w.iter_mut().for_each(|x| *x /= r);
        basis.push(RealVector::from_vec(w));
    }
    Ok(OrthonormalBasis {
        ambient_dim,
        vectors: basis,
    })
}

/// Orthogonal projection `Pv = Σ ⟨q_i, v⟩ q_i` onto the span of `basis`.
pub fn project_onto(basis: &OrthonormalBasis, v: &RealVector) -> Result<RealVector> {
    basis.check(v)?;
    let mut out = vec![0.0; v.dim()];
    basis.project_into(v.as_slice(), &mut out);
    Ok(RealVector::from_vec(out))
}

/// `‖v − Pv‖₂`, the Euclidean distance from `v` to the span of `basis`.
pub fn dist_to_subspace(v: &RealVector, basis: &OrthonormalBasis) -> Result<f64> {
    Ok(basis.residual(v)?.norm())
}
