use rayon::prelude::*;

use crate::ensembles::{sample_matrix, Ensemble, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{LuFactor, RealMatrix};

/// Redraws allowed per trial before the trial is recorded as failed.
pub const MAX_REDRAWS: u32 = 64;

/// One trial's matrix after discarding singular draws.
pub(crate) struct Draw {
    pub matrix: RealMatrix,
    pub lu: LuFactor,
    /// Singular draws discarded before this one.
    pub redraws: u32,
}

/// Draws trial `t` (stream `t`), redrawing on fresh substreams while the
/// pivot test reports a singular matrix.
pub(crate) fn draw_invertible(
    ensemble: Ensemble,
    n: usize,
    master_seed: u64,
    trial: u64,
) -> std::result::Result<Draw, (u32, Error)> {
    let base = SeedSpec::new(master_seed, trial);
    let mut redraws = 0;
    for attempt in 0..=MAX_REDRAWS {
        let matrix =
            sample_matrix(ensemble, n, base.resample(attempt)).map_err(|e| (redraws, e))?;
        match LuFactor::new(&matrix) {
            Ok(lu) => {
                return Ok(Draw {
                    matrix,
                    lu,
                    redraws,
                })
            }
            Err(Error::SingularMatrix { .. }) => redraws += 1,
            Err(e) => return Err((redraws, e)),
        }
    }
    Err((
        redraws,
        Error::InsufficientData(format!(
            "trial {trial}: {redraws} consecutive singular draws"
        )),
    ))
}

/// Per-trial result of a parallel map over trials.
pub(crate) struct TrialOutcome<T> {
    pub value: Option<T>,
    pub redraws: u32,
}

/// Runs `f` on every trial's invertible draw, in parallel, returning the
/// outcomes in trial order.
pub(crate) fn map_trials<T, F>(
    ensemble: Ensemble,
    n: usize,
    trials: u64,
    master_seed: u64,
    f: F,
) -> Vec<TrialOutcome<T>>
where
    T: Send,
    F: Fn(u64, &Draw) -> Option<T> + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| match draw_invertible(ensemble, n, master_seed, t) {
            Ok(d) => TrialOutcome {
                value: f(t, &d),
                redraws: d.redraws,
            },
            Err((redraws, _)) => TrialOutcome {
                value: None,
                redraws,
            },
        })
        .collect()
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidDimension(n))
    } else {
        Ok(())
    }
}
