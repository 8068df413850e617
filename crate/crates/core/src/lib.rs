//! Constructive machinery behind the bound `s_n(A) = O(n^{-1/2})` for
//! random square matrices, with seeded experiments that check it.
//!
//! * [`linalg`]: LU, smallest singular value, projections, dual bases.
//! * [`ensembles`]: reproducible counter-based sampling of i.i.d. entries.
//! * [`witness`]: the witness vector `x = X_1 − P_1 X_1` and its audit.
//! * [`structure`]: least common denominators and small-ball estimates.
//! * [`harness`]: Monte Carlo tail sweeps, scaling and distance studies.
//! * [`cli`]: the `lsv` command-line front end.

pub mod cli;
pub mod ensembles;
pub mod error;
pub mod format;
pub mod harness;
pub mod linalg;
pub mod stats;
pub mod structure;
pub mod witness;

pub use error::{Error, Result};
