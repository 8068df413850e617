//! The `lsv` command line.
//!
//! Every command writes one data file (`--out`) and a manifest next to it
//! (`<out>.manifest.json`). `lsv --replay <manifest>` re-runs the recorded
//! command in memory and checks the data file is reproduced byte for byte.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use crate::ensembles::{Ensemble, SeedSpec};
use crate::error::Error;
use crate::format::{sig10, to_json};
use crate::harness::{
    audit_batch, distance_tail_experiment, median_scaling_report, run_tail_sweep, tail_csv,
    Direction, DistanceTail, TailSweepConfig,
};
use crate::linalg::RealVector;
use crate::structure::{
    gaussian_subspace, lcd_subspace_sampled, lcd_vector, small_ball_estimate, LcdQuery, LcdResult,
    SmallBallEstimate,
};

pub use manifest::RunManifest;

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for a runtime failure, including a failed replay.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit code for invalid flags or parameters.
pub const EXIT_USAGE: i32 = 2;

/// Stream-domain tags separating the subspace basis from sampled directions.
const DOMAIN_SUBSPACE: u8 = 1;
const DOMAIN_DIRECTIONS: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lsv",
    version,
    about = "Seeded experiments on the smallest singular value of random square matrices"
)]
struct Cli {
    /// Worker threads. Output does not depend on this value.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Re-run the command recorded in a manifest and compare its data file.
    #[arg(long, value_name = "MANIFEST")]
    replay: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Tail frequencies of √n·s_n over a grid of n and K (CSV).
    Tail(TailArgs),
    /// Audit the witness-vector identities on seeded matrices (JSON).
    Witness(WitnessArgs),
    /// Least common denominator of a vector or a random subspace (JSON).
    Lcd(LcdArgs),
    /// Monte Carlo small-ball probability of a weighted sum (JSON).
    Smallball(SmallBallArgs),
    /// Median and IQR of √n·s_n for each n (CSV).
    Scaling(ScalingArgs),
    /// Empirical law of dist(X_1, H_1) (JSON).
    Distance(DistanceArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Tail(_) => "tail",
            Command::Witness(_) => "witness",
            Command::Lcd(_) => "lcd",
            Command::Smallball(_) => "smallball",
            Command::Scaling(_) => "scaling",
            Command::Distance(_) => "distance",
        }
    }

    fn out(&self) -> &Path {
        match self {
            Command::Tail(a) => &a.out,
            Command::Witness(a) => &a.out,
            Command::Lcd(a) => &a.out,
            Command::Smallball(a) => &a.out,
            Command::Scaling(a) => &a.out,
            Command::Distance(a) => &a.out,
        }
    }

    fn master_seed(&self) -> Option<u64> {
        match self {
            Command::Tail(a) => Some(a.seed),
            Command::Witness(a) => Some(a.seed),
            Command::Lcd(a) => a.seed,
            Command::Smallball(a) => Some(a.seed),
            Command::Scaling(a) => Some(a.seed),
            Command::Distance(a) => Some(a.seed),
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct TailArgs {
    #[arg(long, default_value = "gaussian")]
    ensemble: Ensemble,
    /// Matrix dimension; repeat for several.
    #[arg(long = "n", required = true)]
    n: Vec<usize>,
    /// Threshold K (upper) or ε (lower); repeat for several.
    #[arg(long = "k", required = true)]
    k: Vec<f64>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "upper")]
    direction: Direction,
    /// Audit the witness identities on every N-th trial; 0 disables.
    #[arg(long, default_value_t = 100, value_name = "N")]
    witness_every: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct WitnessArgs {
    #[arg(long, default_value = "gaussian")]
    ensemble: Ensemble,
    #[arg(long = "n")]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distinguished column, 1-based.
    #[arg(long, default_value_t = 1)]
    column: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("target").required(true).args(["vector", "subspace_dim"])))]
struct LcdArgs {
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    vector: Option<Vec<f64>>,
    /// Dimension of a random Gaussian subspace of Rⁿ.
    #[arg(long, requires_all = ["n", "seed"])]
    subspace_dim: Option<usize>,
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to √n/2.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 1e4)]
    theta_max: f64,
    /// Directions sampled in subspace mode.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long)]
    grid_step: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SmallBallArgs {
    /// Comma-separated weights, normalized to unit length.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        required = true
    )]
    weights: Vec<f64>,
    #[arg(long, default_value = "gaussian")]
    ensemble: Ensemble,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ScalingArgs {
    #[arg(long, default_value = "gaussian")]
    ensemble: Ensemble,
    #[arg(long = "n", required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct DistanceArgs {
    #[arg(long, default_value = "gaussian")]
    ensemble: Ensemble,
    #[arg(long = "n")]
    n: usize,
    #[arg(long, default_value_t = 5000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include every per-trial distance in the output.
    #[arg(long)]
    samples: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Why a command stopped.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidQuery(_) | Error::InvalidDimension(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl Failure {
    fn report(&self) -> i32 {
        match self {
            Failure::Usage(m) => {
                eprintln!("error: {m}\n\nFor more information, try '--help'.");
                EXIT_USAGE
            }
            Failure::Runtime(m) => {
                eprintln!("error: {m}");
                EXIT_RUNTIME
            }
        }
    }
}

/// Data file contents plus the exit code the command asks for.
struct Output {
    data: Vec<u8>,
    status: i32,
    summary: String,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let pool = match cli.threads {
        Some(0) => return Failure::Usage("--threads must be at least 1".into()).report(),
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return Failure::Runtime(format!("thread pool: {e}")).report(),
    };
    let result = pool.install(|| match (&cli.replay, &cli.command) {
        (Some(m), None) => replay(m),
        (None, Some(cmd)) => record(cmd, &argv),
        _ => Err(Failure::Usage(
            "give exactly one of a subcommand or --replay <MANIFEST>".into(),
        )),
    });
    match result {
        Ok(code) => code,
        Err(f) => f.report(),
    }
}

fn record(cmd: &Command, argv: &[OsString]) -> Result<i32, Failure> {
    let started = Instant::now();
    let out = execute(cmd)?;
    let elapsed = started.elapsed().as_secs_f64();
    let path = cmd.out();
    write_atomic(path, &out.data)?;
    let manifest = RunManifest {
        command: cmd.name().to_string(),
        version: format!("lsv {}", env!("CARGO_PKG_VERSION")),
        argv: manifest::recorded_argv(argv),
        parameters: serde_json::to_value(cmd)
            .map_err(|e| Failure::Runtime(format!("manifest: {e}")))?,
        master_seed: cmd.master_seed(),
        wall_clock_seconds: elapsed,
        outputs: vec![absolute(path).display().to_string()],
    };
    let mpath = manifest::manifest_path(path);
    if let Err(e) = write_atomic(&mpath, &json(&manifest)?) {
        let _ = fs::remove_file(path);
        return Err(e);
    }
    if !out.summary.is_empty() {
        eprintln!("{}", out.summary);
    }
    Ok(out.status)
}

fn replay(path: &Path) -> Result<i32, Failure> {
    let m = RunManifest::read(path).map_err(Failure::Runtime)?;
    let argv = std::iter::once("lsv".to_string()).chain(m.argv.iter().cloned());
    let cli = Cli::try_parse_from(argv)
        .map_err(|e| Failure::Runtime(format!("manifest argv does not parse: {e}")))?;
    let cmd = cli
        .command
        .ok_or_else(|| Failure::Runtime("manifest argv has no subcommand".into()))?;
    let target = m
        .outputs
        .first()
        .ok_or_else(|| Failure::Runtime("manifest lists no outputs".into()))?;
    let out = execute(&cmd)?;
    let recorded = fs::read(target).map_err(|e| Failure::Runtime(format!("{target}: {e}")))?;
    if recorded != out.data {
        return Err(Failure::Runtime(format!(
            "replay mismatch: {target} differs from the re-executed output"
        )));
    }
    eprintln!("replay ok: {target}");
    Ok(out.status)
}

fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Writes via a sibling temporary file so a failed run leaves nothing behind.
fn write_atomic(path: &Path, data: &[u8]) -> Result<(), Failure> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let res = fs::write(&tmp, data).and_then(|_| fs::rename(&tmp, path));
    res.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::Runtime(format!("{}: {e}", path.display()))
    })
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    to_json(value)
        .map(String::into_bytes)
        .map_err(|e| Failure::Runtime(format!("serialization: {e}")))
}

fn execute(cmd: &Command) -> Result<Output, Failure> {
    match cmd {
        Command::Tail(a) => cmd_tail(a),
        Command::Witness(a) => cmd_witness(a),
        Command::Lcd(a) => cmd_lcd(a),
        Command::Smallball(a) => cmd_smallball(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Distance(a) => cmd_distance(a),
    }
}

fn cmd_tail(a: &TailArgs) -> Result<Output, Failure> {
    let mut cfg = TailSweepConfig::new(
        a.ensemble,
        a.n.clone(),
        a.k.clone(),
        a.trials,
        a.seed,
        a.direction,
    );
    cfg.witness_every = (a.witness_every > 0).then_some(a.witness_every);
    let sweep = run_tail_sweep(&cfg)?;
    let mut summary = format!(
        "witness audits: {} ({} with violations, {} degenerate)",
        sweep.witness_audits, sweep.witness_violations, sweep.witness_errors
    );
    if sweep.failed_trials > 0 {
        summary.push_str(&format!(
            "\n{} trials exhausted their singular redraws and were not scored",
            sweep.failed_trials
        ));
    }
    if sweep.estimates.iter().any(|e| e.outside_bound_range) {
        summary.push_str("\nnote: rows with K < 2 lie outside the range K >= 2 of the tail bound");
    }
    Ok(Output {
        data: tail_csv(&sweep.estimates).into_bytes(),
        status: EXIT_OK,
        summary,
    })
}

fn cmd_witness(a: &WitnessArgs) -> Result<Output, Failure> {
    if a.column == 0 {
        return Err(Failure::Usage("--column is 1-based".into()));
    }
    let batch = audit_batch(a.ensemble, a.n, a.trials, a.seed, a.column - 1)?;
    let bad = batch.iter().filter(|t| !t.is_clean()).count();
    Ok(Output {
        data: json(&batch)?,
        status: if bad == 0 { EXIT_OK } else { EXIT_RUNTIME },
        summary: format!(
            "{} trials audited, {bad} with violations or errors",
            batch.len()
        ),
    })
}

#[derive(Serialize)]
struct LcdOutput {
    mode: &'static str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    vector: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    subspace_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounded_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<RealVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    /// `null` when no admissible `θ ≤ θ_max` exists.
    theta_star: Option<f64>,
    unbounded: bool,
    achieved_dist: f64,
    certificate: Vec<i64>,
    slack: f64,
    grid_step: f64,
    alpha: f64,
    gamma: f64,
    theta_max: f64,
}

impl LcdOutput {
    fn new(mode: &'static str, n: usize, r: &LcdResult) -> Self {
        Self {
            mode,
            n,
            vector: None,
            subspace_dim: None,
            samples: None,
            bounded_samples: None,
            direction: None,
            master_seed: None,
            theta_star: r.theta_star,
            unbounded: r.theta_star.is_none(),
            achieved_dist: r.achieved_dist,
            certificate: r.certificate.clone(),
            slack: r.slack,
            grid_step: r.grid_step,
            alpha: r.query.alpha,
            gamma: r.query.gamma,
            theta_max: r.query.theta_max,
        }
    }
}

fn cmd_lcd(a: &LcdArgs) -> Result<Output, Failure> {
    let query = |n: usize| {
        let alpha = a.alpha.unwrap_or((n as f64).sqrt() / 2.0);
        let q = LcdQuery::new(alpha, a.gamma, a.theta_max);
        match a.grid_step {
            Some(s) => q.with_grid_step(s),
            None => q,
        }
    };
    let out = if let Some(v) = &a.vector {
        let n = v.len();
        if a.n.is_some_and(|m| m != n) {
            return Err(Failure::Usage(format!(
                "--n {} does not match the {n} coordinates of --vector",
                a.n.unwrap_or_default()
            )));
        }
        let vec = RealVector::new(v.clone())?;
        let r = lcd_vector(&vec, &query(n))?;
        LcdOutput {
            vector: Some(v.clone()),
            ..LcdOutput::new("vector", n, &r)
        }
    } else {
        let (d, n, seed) = match (a.subspace_dim, a.n, a.seed) {
            (Some(d), Some(n), Some(s)) => (d, n, s),
            _ => return Err(Failure::Usage("--subspace-dim needs --n and --seed".into())),
        };
        let q = query(n);
        q.validate()?;
        let root = SeedSpec::new(seed, 0);
        let basis = gaussian_subspace(n, d, root.in_domain(DOMAIN_SUBSPACE))?;
        let r = lcd_subspace_sampled(&basis, &q, a.samples, root.in_domain(DOMAIN_DIRECTIONS))?;
        LcdOutput {
            subspace_dim: Some(d),
            samples: Some(r.samples),
            bounded_samples: Some(r.bounded_samples),
            direction: Some(r.direction.clone()),
            master_seed: Some(seed),
            ..LcdOutput::new("subspace", n, &r.result)
        }
    };
    let summary = match out.theta_star {
        Some(t) => format!("theta_star = {}", sig10(t)),
        None => format!("no admissible theta <= {}", sig10(out.theta_max)),
    };
    Ok(Output {
        data: json(&out)?,
        status: EXIT_OK,
        summary,
    })
}

#[derive(Serialize)]
struct SmallBallOutput {
    weights: RealVector,
    #[serde(flatten)]
    estimate: SmallBallEstimate,
}

fn cmd_smallball(a: &SmallBallArgs) -> Result<Output, Failure> {
    let w = RealVector::new(a.weights.clone())?;
    let norm = w.norm();
    if !(norm > 0.0) {
        return Err(Failure::Usage("--weights must not be all zero".into()));
    }
    let w = w.scaled(1.0 / norm);
    let est = small_ball_estimate(
        &w,
        a.ensemble,
        a.epsilon,
        a.trials,
        SeedSpec::new(a.seed, 0),
    )?;
    let summary = format!(
        "p_hat = {} [{}, {}]",
        sig10(est.p_hat),
        sig10(est.ci.low),
        sig10(est.ci.high)
    );
    Ok(Output {
        data: json(&SmallBallOutput {
            weights: w,
            estimate: est,
        })?,
        status: EXIT_OK,
        summary,
    })
}

/// Header of the `scaling` CSV.
pub const SCALING_CSV_HEADER: &str = "ensemble,n,trials,median,q1,q3,iqr,singular_count";

fn cmd_scaling(a: &ScalingArgs) -> Result<Output, Failure> {
    let mut ns = a.n.clone();
    ns.sort_unstable();
    ns.dedup();
    let rows = median_scaling_report(a.ensemble, &ns, a.trials, a.seed)?;
    let mut csv = String::from(SCALING_CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.ensemble,
            r.n,
            r.trials,
            sig10(r.median),
            sig10(r.q1),
            sig10(r.q3),
            sig10(r.iqr),
            r.singular_count
        ));
    }
    Ok(Output {
        data: csv.into_bytes(),
        status: EXIT_OK,
        summary: String::new(),
    })
}

fn cmd_distance(a: &DistanceArgs) -> Result<Output, Failure> {
    let mut t: DistanceTail = distance_tail_experiment(a.ensemble, a.n, a.trials, a.seed)?;
    let summary = format!("KS distance to |N(0,1)|: {}", sig10(t.ks_half_normal));
    if !a.samples {
        t.samples.clear();
    }
    Ok(Output {
        data: json(&t)?,
        status: EXIT_OK,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_mapping() {
        assert!(matches!(
            Failure::from(Error::InvalidQuery("x".into())),
            Failure::Usage(_)
        ));
        assert!(matches!(
            Failure::from(Error::InvalidDimension(1)),
            Failure::Usage(_)
        ));
        assert!(matches!(
            Failure::from(Error::NonFinite(0)),
            Failure::Runtime(_)
        ));
    }
}
