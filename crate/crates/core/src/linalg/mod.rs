//! Dense linear algebra: LU solves, smallest singular value, orthogonal
//! projections, subspace distances and dual bases.
//!
//! Everything here is a pure function of its inputs.

mod dual;
mod lu;
mod matrix;
mod ortho;
mod singular;

pub use dual::{dual_basis, BiorthogonalSystem};
pub use lu::{lu_solve, LuFactor, PIVOT_THRESHOLD};
pub use matrix::{RealMatrix, RealVector};
pub use ortho::{
    dist_to_subspace, orthonormalize, orthonormalize_in, project_onto, OrthonormalBasis,
    DEPENDENCE_THRESHOLD,
};
pub use singular::{smallest_singular_value, smallest_singular_value_unchecked};
