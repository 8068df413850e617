//! Seeded Monte Carlo experiments on `s_n(A)` and the quantities that
//! bound it.
//!
//! Trial `t` always reads stream `t` of the master seed; singular draws are
//! redrawn on substreams and counted. Trials run in parallel but results
//! are gathered in trial order, so every output is independent of the
//! worker count.

mod audit;
mod fit;
mod markov;
mod sampling;
mod scaling;
mod tail;

pub use audit::{audit_batch, WitnessTrial};
pub use fit::{fit_tail_model, FitPoint, TailFit};
pub use markov::{check_markov_sum_bound, FiniteDistribution, MarkovSumCheck, MAX_OUTCOMES};
pub use sampling::MAX_REDRAWS;
pub use scaling::{
    distance_tail_experiment, median_scaling_report, scaled_singular_values, DistanceExceedance,
    DistanceTail, ScalingRow, DISTANCE_THRESHOLDS,
};
pub use tail::{
    run_tail_sweep, tail_csv, Direction, TailEstimate, TailSweep, TailSweepConfig, TAIL_CSV_HEADER,
};
