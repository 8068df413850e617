use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::sampling::{check_n, map_trials};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::format::sig10;
use crate::linalg::smallest_singular_value_unchecked;
use crate::stats::wilson_interval;
use crate::witness;

/// Which tail of `√n s_n(A)` a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `s_n > K n^{-1/2}`.
    Upper,
    /// `s_n ≤ ε n^{-1/2}`.
    Lower,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" => Ok(Direction::Upper),
            "lower" => Ok(Direction::Lower),
            _ => Err(Error::InvalidQuery(format!(
                "unknown direction '{s}' (expected upper | lower)"
            ))),
        }
    }
}

impl Serialize for Direction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSweepConfig {
    pub ensemble: Ensemble,
    pub n_values: Vec<usize>,
    /// `K` for upper sweeps, `ε` for lower sweeps.
    pub k_values: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub direction: Direction,
    /// Run the full witness audit on every trial whose index is a multiple
    /// of this value; `None` disables the cross-check.
    pub witness_every: Option<u64>,
}

impl TailSweepConfig {
    pub fn new(
        ensemble: Ensemble,
        n_values: Vec<usize>,
        k_values: Vec<f64>,
        trials: u64,
        master_seed: u64,
        direction: Direction,
    ) -> Self {
        Self {
            ensemble,
            n_values,
            k_values,
            trials,
            master_seed,
            direction,
            witness_every: Some(100),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::InvalidQuery("no n values".into()));
        }
        for &n in &self.n_values {
            check_n(n)?;
        }
        if self.k_values.is_empty() {
            return Err(Error::InvalidQuery("no K values".into()));
        }
        if let Some(k) = self
            .k_values
            .iter()
            .find(|k| !(**k >= 0.0 && k.is_finite()))
        {
            return Err(Error::InvalidQuery(format!(
                "thresholds must be finite and >= 0, got {k}"
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidQuery("trials must be at least 1".into()));
        }
        if self.witness_every == Some(0) {
            return Err(Error::InvalidQuery("witness_every must be positive".into()));
        }
        Ok(())
    }
}

/// Tail frequency at one `(n, K)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEstimate {
    pub ensemble: Ensemble,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: f64,
    pub direction: Direction,
    /// Scored trials.
    pub trials: u64,
    pub exceed_count: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Singular draws discarded and redrawn.
    pub singular_count: u64,
    pub master_seed: u64,
    /// Upper-tail rows with `K < 2` lie outside the range `K ≥ 2` of the
    /// subgaussian tail bound.
    pub outside_bound_range: bool,
}

/// Sweep output plus bookkeeping that does not enter the CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailSweep {
    pub estimates: Vec<TailEstimate>,
    /// Trials abandoned after exhausting redraws.
    pub failed_trials: u64,
    pub witness_audits: u64,
    /// Audited trials with at least one violated identity.
    pub witness_violations: u64,
    /// Audits that could not be completed (degenerate geometry).
    pub witness_errors: u64,
}

struct TrialResult {
    s_n: f64,
    witness: Option<WitnessStatus>,
}

enum WitnessStatus {
    Clean,
    Violated,
    Error,
}

/// Computes `s_n` once per trial and counts the tail event for every
/// threshold on the shared draws, so counts are pointwise monotone in `K`.
pub fn run_tail_sweep(cfg: &TailSweepConfig) -> Result<TailSweep> {
    cfg.validate()?;
    let mut n_values = cfg.n_values.clone();
    n_values.sort_unstable();
    let mut k_values = cfg.k_values.clone();
    k_values.sort_by(f64::total_cmp);

    let mut out = TailSweep {
        estimates: Vec::new(),
        failed_trials: 0,
        witness_audits: 0,
        witness_violations: 0,
        witness_errors: 0,
    };
    for n in n_values {
        let outcomes = map_trials(cfg.ensemble, n, cfg.trials, cfg.master_seed, |t, d| {
            let s_n = smallest_singular_value_unchecked(&d.matrix);
            let witness = cfg.witness_every.filter(|every| t % every == 0).map(|_| {
                match witness::audit(&d.matrix) {
                    Ok(r) if r.is_clean() => WitnessStatus::Clean,
                    Ok(_) => WitnessStatus::Violated,
                    Err(_) => WitnessStatus::Error,
                }
            });
            Some(TrialResult { s_n, witness })
        });

        let singular_count: u64 = outcomes.iter().map(|o| o.redraws as u64).sum();
        let scored: Vec<&TrialResult> = outcomes.iter().filter_map(|o| o.value.as_ref()).collect();
        out.failed_trials += cfg.trials - scored.len() as u64;
        for r in &scored {
            match r.witness {
                None => {}
                Some(WitnessStatus::Clean) => out.witness_audits += 1,
                Some(WitnessStatus::Violated) => {
                    out.witness_audits += 1;
                    out.witness_violations += 1;
                }
                Some(WitnessStatus::Error) => {
                    out.witness_audits += 1;
                    out.witness_errors += 1;
                }
            }
        }

        let scale = (n as f64).sqrt();
        for &k in &k_values {
            let threshold = k / scale;
            let exceed_count = scored
                .iter()
                .filter(|r| match cfg.direction {
                    Direction::Upper => r.s_n > threshold,
                    Direction::Lower => r.s_n <= threshold,
                })
                .count() as u64;
            let trials = scored.len() as u64;
            let ci = wilson_interval(exceed_count, trials);
            out.estimates.push(TailEstimate {
                ensemble: cfg.ensemble,
                n,
                k,
                direction: cfg.direction,
                trials,
                exceed_count,
                p_hat: if trials == 0 {
                    0.0
                } else {
                    exceed_count as f64 / trials as f64
                },
                ci_low: ci.low,
                ci_high: ci.high,
                singular_count,
                master_seed: cfg.master_seed,
                outside_bound_range: cfg.direction == Direction::Upper && k < 2.0,
            });
        }
    }
    Ok(out)
}

pub const TAIL_CSV_HEADER: &str =
    "ensemble,n,K,direction,trials,exceed_count,p_hat,ci_low,ci_high,singular_count,master_seed";

/// One header line and one row per estimate, `\n`-terminated.
pub fn tail_csv(estimates: &[TailEstimate]) -> String {
    let mut s = String::with_capacity(64 * (estimates.len() + 1));
    s.push_str(TAIL_CSV_HEADER);
    s.push('\n');
    for e in estimates {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            e.ensemble,
            e.n,
            sig10(e.k),
            e.direction,
            e.trials,
            e.exceed_count,
            sig10(e.p_hat),
            sig10(e.ci_low),
            sig10(e.ci_high),
            e.singular_count,
            e.master_seed
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(direction: Direction, ks: Vec<f64>) -> TailSweepConfig {
        TailSweepConfig::new(Ensemble::Gaussian, vec![6, 4], ks, 50, 9, direction)
    }

    #[test]
    fn zero_threshold_cases() {
        let up = run_tail_sweep(&cfg(Direction::Upper, vec![0.0])).unwrap();
        assert!(up.estimates.iter().all(|e| e.p_hat == 1.0));
        let low = run_tail_sweep(&cfg(Direction::Lower, vec![0.0])).unwrap();
        assert!(low.estimates.iter().all(|e| e.p_hat == 0.0));
    }

    #[test]
    fn rows_sorted_and_flagged() {
        let s = run_tail_sweep(&cfg(Direction::Upper, vec![4.0, 1.0])).unwrap();
        let keys: Vec<(usize, f64)> = s.estimates.iter().map(|e| (e.n, e.k)).collect();
        assert_eq!(keys, vec![(4, 1.0), (4, 4.0), (6, 1.0), (6, 4.0)]);
        assert!(s.estimates[0].outside_bound_range);
        assert!(!s.estimates[1].outside_bound_range);
        assert_eq!(s.witness_audits, 2);
        assert_eq!(s.witness_violations, 0);
    }

    #[test]
    fn invalid_configs() {
        let mut c = cfg(Direction::Upper, vec![1.0]);
        c.n_values = vec![1];
        assert_eq!(run_tail_sweep(&c), Err(Error::InvalidDimension(1)));
        let mut c = cfg(Direction::Upper, vec![]);
        assert!(run_tail_sweep(&c).is_err());
        c.k_values = vec![-1.0];
        assert!(run_tail_sweep(&c).is_err());
        let mut c = cfg(Direction::Upper, vec![1.0]);
        c.trials = 0;
        assert!(run_tail_sweep(&c).is_err());
    }

    #[test]
    fn csv_layout() {
        let s = run_tail_sweep(&cfg(Direction::Lower, vec![0.1])).unwrap();
        let csv = tail_csv(&s.estimates);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TAIL_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("gaussian,4,0.1,lower,50,"));
        assert!(lines[1].ends_with(",0,9"));
        assert!(csv.ends_with('\n') && !csv.contains('\r'));
    }
}
