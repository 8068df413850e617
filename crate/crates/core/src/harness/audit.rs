use serde::Serialize;

use super::sampling::{check_n, draw_invertible};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::witness::{audit_column, WitnessReport};
use rayon::prelude::*;

/// Witness audit of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessTrial {
    pub trial: u64,
    pub singular_redraws: u32,
    /// Set when the trial could not be audited.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten)]
    pub report: Option<WitnessReport>,
}

impl WitnessTrial {
    pub fn is_clean(&self) -> bool {
        self.error.is_none() && self.report.as_ref().is_some_and(WitnessReport::is_clean)
    }
}

/// Audits `trials` seeded matrices with column `column` (0-based)
/// distinguished. Results are in trial order.
pub fn audit_batch(
    ensemble: Ensemble,
    n: usize,
    trials: u64,
    master_seed: u64,
    column: usize,
) -> Result<Vec<WitnessTrial>> {
    check_n(n)?;
    if column >= n {
        return Err(Error::InvalidQuery(format!(
            "column {} out of range 1..={n}",
            column + 1
        )));
    }
    Ok((0..trials)
        .into_par_iter()
        .map(|t| match draw_invertible(ensemble, n, master_seed, t) {
            Ok(d) => match audit_column(&d.matrix, column) {
                Ok(r) => WitnessTrial {
                    trial: t,
                    singular_redraws: d.redraws,
                    error: None,
                    report: Some(r),
                },
                Err(e) => WitnessTrial {
                    trial: t,
                    singular_redraws: d.redraws,
                    error: Some(e.to_string()),
                    report: None,
                },
            },
            Err((redraws, e)) => WitnessTrial {
                trial: t,
                singular_redraws: redraws,
                error: Some(e.to_string()),
                report: None,
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batch_is_clean() {
        let b = audit_batch(Ensemble::Uniform, 6, 8, 2, 0).unwrap();
        assert_eq!(b.len(), 8);
        assert!(b.iter().all(WitnessTrial::is_clean));
        assert!(audit_batch(Ensemble::Uniform, 6, 1, 2, 6).is_err());
        assert!(audit_batch(Ensemble::Uniform, 1, 1, 2, 0).is_err());
    }
}
