//! Arithmetic structure of directions: least common denominators and
//! small-ball (Lévy concentration) probabilities of weighted sums.

mod lcd;
mod small_ball;

pub use lcd::{
    dist_to_lattice, gaussian_subspace, lcd_subspace_sampled, lcd_vector, LcdQuery, LcdResult,
    SubspaceLcdResult, BISECTION_TOL,
};
pub use small_ball::{small_ball_estimate, SmallBallEstimate};
