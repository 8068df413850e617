//! C ABI over `lsv-core`.
//!
//! Conventions:
//!
//! * Every fallible function returns an [`LsvStatus`] and writes results
//!   through out-pointers. On failure the out-pointers are left untouched
//!   and [`lsv_last_error`] describes the failure.
//! * Matrices are opaque [`LsvMatrix`] handles, created by
//!   `lsv_matrix_*` constructors and released with [`lsv_matrix_free`].
//! * Strings returned through `char **` are owned by the caller and must be
//!   released with [`lsv_string_free`].
//! * Ensembles and tail directions are passed as the `LSV_ENSEMBLE_*` and
//!   `LSV_DIRECTION_*` integer constants.
//! * Panics never cross the boundary; they surface as
//!   `LSV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use lsv_core::ensembles::{sample_matrix, Ensemble, SeedSpec};
use lsv_core::format::to_json;
use lsv_core::harness::{run_tail_sweep, tail_csv, Direction, TailSweepConfig};
use lsv_core::linalg::{smallest_singular_value, RealMatrix, RealVector};
use lsv_core::structure::{lcd_vector, small_ball_estimate, LcdQuery};
use lsv_core::witness::audit_column;
use lsv_core::Error;

pub const LSV_ENSEMBLE_GAUSSIAN: i32 = 0;
pub const LSV_ENSEMBLE_RADEMACHER: i32 = 1;
pub const LSV_ENSEMBLE_UNIFORM: i32 = 2;
pub const LSV_ENSEMBLE_STUDENT_T5: i32 = 3;

pub const LSV_DIRECTION_UPPER: i32 = 0;
pub const LSV_DIRECTION_LOWER: i32 = 1;

/// Result codes. `LSV_STATUS_OK` is zero; every other value is an error.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SingularMatrix = 3,
    NonSquare = 4,
    DimensionMismatch = 5,
    NumericallyDependent = 6,
    InvalidDimension = 7,
    DegenerateGeometry = 8,
    EnumerationTooLarge = 9,
    InsufficientData = 10,
    NonFinite = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for LsvStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::SingularMatrix { .. } => LsvStatus::SingularMatrix,
            Error::NonSquare { .. } => LsvStatus::NonSquare,
            Error::DimensionMismatch { .. } => LsvStatus::DimensionMismatch,
            Error::NumericallyDependent { .. } => LsvStatus::NumericallyDependent,
            Error::InvalidDimension(_) => LsvStatus::InvalidDimension,
            Error::DegenerateGeometry(_) => LsvStatus::DegenerateGeometry,
            Error::InvalidQuery(_) => LsvStatus::InvalidArgument,
            Error::EnumerationTooLarge(_) => LsvStatus::EnumerationTooLarge,
            Error::InsufficientData(_) => LsvStatus::InsufficientData,
            Error::NonFinite(_) => LsvStatus::NonFinite,
        }
    }
}

/// Opaque square or rectangular real matrix.
pub struct LsvMatrix {
    inner: RealMatrix,
}

/// Scalar part of a witness audit.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LsvWitnessSummary {
    pub n: usize,
    /// 1-based index of the distinguished column.
    pub distinguished_column: usize,
    pub norm_x: f64,
    pub ainv_x_norm: f64,
    pub ratio_sum_sq: f64,
    pub s_n: f64,
    /// `norm_x / ainv_x_norm`, an upper bound on `s_n`.
    pub implied_bound: f64,
    /// Number of failed checks; zero for a clean audit.
    pub violation_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LsvLcdResult {
    /// 1 when an admissible `theta <= theta_max` was found, else 0.
    pub bounded: i32,
    /// NaN when unbounded.
    pub theta_star: f64,
    pub achieved_dist: f64,
    pub slack: f64,
    pub grid_step: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LsvSmallBall {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    /// Wilson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Outcome = Result<(), (LsvStatus, String)>;

fn fail(status: LsvStatus, msg: impl Into<String>) -> Outcome {
    Err((status, msg.into()))
}

fn core_err(e: Error) -> (LsvStatus, String) {
    (LsvStatus::from(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> Outcome) -> LsvStatus {
    let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err((LsvStatus::Panic, format!("panic: {msg}")))
    });
    match result {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LsvStatus::Ok
        }
        Err((status, msg)) => {
            set_last_error(msg);
            status
        }
    }
}

fn ensemble(code: i32) -> Result<Ensemble, (LsvStatus, String)> {
    usize::try_from(code)
        .ok()
        .and_then(|i| Ensemble::ALL.get(i).copied())
        .ok_or((
            LsvStatus::InvalidArgument,
            format!("unknown ensemble code {code}"),
        ))
}

unsafe fn matrix_ref<'a>(m: *const LsvMatrix) -> Result<&'a RealMatrix, (LsvStatus, String)> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or((LsvStatus::NullPointer, "matrix handle is null".into()))
}

unsafe fn input<'a, T>(
    p: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (LsvStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err((LsvStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(LsvStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> Result<*mut c_char, (LsvStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|_| {
        (
            LsvStatus::InvalidArgument,
            "output contains a NUL byte".into(),
        )
    })
}

fn check_out<T>(out: *mut T) -> Outcome {
    if out.is_null() {
        return fail(LsvStatus::NullPointer, "output pointer is null");
    }
    Ok(())
}

/// Copies a `rows x cols` row-major array into a new matrix handle.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_from_row_major(
    rows: usize,
    cols: usize,
    data: *const f64,
    out: *mut *mut LsvMatrix,
) -> LsvStatus {
    guard(|| {
        check_out(out)?;
        let len = rows.checked_mul(cols).ok_or((
            LsvStatus::InvalidArgument,
            "rows * cols overflows".to_string(),
        ))?;
        let values = input(data, len, "data")?.to_vec();
        let inner = RealMatrix::from_row_major(rows, cols, values).map_err(core_err)?;
        write(out, Box::into_raw(Box::new(LsvMatrix { inner })))
    })
}

/// Draws an `n x n` matrix with i.i.d. entries from the given ensemble.
/// The result depends only on `(ensemble, n, master_seed, stream_index)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_sample(
    ensemble_code: i32,
    n: usize,
    master_seed: u64,
    stream_index: u64,
    out: *mut *mut LsvMatrix,
) -> LsvStatus {
    guard(|| {
        check_out(out)?;
        let kind = ensemble(ensemble_code)?;
        let inner =
            sample_matrix(kind, n, SeedSpec::new(master_seed, stream_index)).map_err(core_err)?;
        write(out, Box::into_raw(Box::new(LsvMatrix { inner })))
    })
}

/// Releases a matrix handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_free(m: *mut LsvMatrix) {
    if !m.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(m))));
    }
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_rows(m: *const LsvMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.n_rows())
}

/// Number of columns, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_cols(m: *const LsvMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.inner.n_cols())
}

/// Copies the entries in row-major order into `buf`, which must hold at
/// least `rows * cols` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lsv_matrix_copy_row_major(
    m: *const LsvMatrix,
    buf: *mut f64,
    len: usize,
) -> LsvStatus {
    guard(|| {
        let a = matrix_ref(m)?;
        let src = a.as_slice();
        if len < src.len() {
            return fail(
                LsvStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", src.len()),
            );
        }
        check_out(buf)?;
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        Ok(())
    })
}

/// Smallest singular value of a square matrix; 0 when it is numerically
/// singular.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_smallest_singular_value(
    m: *const LsvMatrix,
    out: *mut f64,
) -> LsvStatus {
    guard(|| {
        let a = matrix_ref(m)?;
        check_out(out)?;
        let s = smallest_singular_value(a).map_err(core_err)?;
        write(out, s)
    })
}

/// Builds the witness vector with column `column` (0-based) distinguished
/// and audits every identity it relies on.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_witness_audit(
    m: *const LsvMatrix,
    column: usize,
    out: *mut LsvWitnessSummary,
) -> LsvStatus {
    guard(|| {
        let a = matrix_ref(m)?;
        check_out(out)?;
        let r = audit_column(a, column).map_err(core_err)?;
        write(
            out,
            LsvWitnessSummary {
                n: r.n,
                distinguished_column: r.distinguished_column,
                norm_x: r.norm_x,
                ainv_x_norm: r.ainv_x_norm,
                ratio_sum_sq: r.ratio_sum_sq,
                s_n: r.s_n,
                implied_bound: r.implied_bound,
                violation_count: r.violations.len(),
            },
        )
    })
}

/// As [`lsv_witness_audit`], returning the full report as JSON.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer. Release the string
/// with [`lsv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lsv_witness_audit_json(
    m: *const LsvMatrix,
    column: usize,
    out: *mut *mut c_char,
) -> LsvStatus {
    guard(|| {
        let a = matrix_ref(m)?;
        check_out(out)?;
        let r = audit_column(a, column).map_err(core_err)?;
        let json = to_json(&r).map_err(|e| (LsvStatus::InvalidArgument, e.to_string()))?;
        write(out, c_string(json)?)
    })
}

/// Least common denominator of `a` (length `n`). A nonpositive
/// `grid_step` selects the default step. When `certificate` is non-null it
/// receives the `n` coordinates of the nearest lattice point.
///
/// # Safety
/// `a` must point to `n` doubles, `certificate` must be null or point to
/// `n` writable `int64_t`, and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_lcd_vector(
    a: *const f64,
    n: usize,
    alpha: f64,
    gamma: f64,
    theta_max: f64,
    grid_step: f64,
    certificate: *mut i64,
    out: *mut LsvLcdResult,
) -> LsvStatus {
    guard(|| {
        check_out(out)?;
        let v = RealVector::new(input(a, n, "a")?.to_vec()).map_err(core_err)?;
        let mut q = LcdQuery::new(alpha, gamma, theta_max);
        if grid_step > 0.0 {
            q = q.with_grid_step(grid_step);
        }
        let r = lcd_vector(&v, &q).map_err(core_err)?;
        if !certificate.is_null() {
            ptr::copy_nonoverlapping(r.certificate.as_ptr(), certificate, r.certificate.len());
        }
        write(
            out,
            LsvLcdResult {
                bounded: r.is_bounded() as i32,
                theta_star: r.theta_star.unwrap_or(f64::NAN),
                achieved_dist: r.achieved_dist,
                slack: r.slack,
                grid_step: r.grid_step,
            },
        )
    })
}

/// Monte Carlo estimate of `P(|sum_i w_i xi_i| <= epsilon)` for unit-norm
/// weights `w` of length `n` and i.i.d. `xi` from the ensemble.
///
/// # Safety
/// `weights` must point to `n` doubles and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsv_small_ball(
    weights: *const f64,
    n: usize,
    ensemble_code: i32,
    epsilon: f64,
    trials: u64,
    master_seed: u64,
    out: *mut LsvSmallBall,
) -> LsvStatus {
    guard(|| {
        check_out(out)?;
        let kind = ensemble(ensemble_code)?;
        let w = RealVector::new(input(weights, n, "weights")?.to_vec()).map_err(core_err)?;
        let e = small_ball_estimate(&w, kind, epsilon, trials, SeedSpec::new(master_seed, 0))
            .map_err(core_err)?;
        write(
            out,
            LsvSmallBall {
                trials: e.trials,
                hits: e.hits,
                p_hat: e.p_hat,
                ci_low: e.ci.low,
                ci_high: e.ci.high,
            },
        )
    })
}

/// Runs a tail sweep and returns the CSV table, byte-identical to the
/// `lsv tail` output for the same arguments.
///
/// # Safety
/// `n_values` and `k_values` must point to `n_len` and `k_len` readable
/// values and `out` must be a valid pointer. Release the string with
/// [`lsv_string_free`].
#[no_mangle]
pub unsafe extern "C" fn lsv_tail_sweep_csv(
    ensemble_code: i32,
    n_values: *const usize,
    n_len: usize,
    k_values: *const f64,
    k_len: usize,
    trials: u64,
    master_seed: u64,
    direction: i32,
    out: *mut *mut c_char,
) -> LsvStatus {
    guard(|| {
        check_out(out)?;
        let kind = ensemble(ensemble_code)?;
        let direction = match direction {
            LSV_DIRECTION_UPPER => Direction::Upper,
            LSV_DIRECTION_LOWER => Direction::Lower,
            d => return fail(LsvStatus::InvalidArgument, format!("unknown direction {d}")),
        };
        let cfg = TailSweepConfig::new(
            kind,
            input(n_values, n_len, "n_values")?.to_vec(),
            input(k_values, k_len, "k_values")?.to_vec(),
            trials,
            master_seed,
            direction,
        );
        let sweep = run_tail_sweep(&cfg).map_err(core_err)?;
        write(out, c_string(tail_csv(&sweep.estimates))?)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lsv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the most recent failure on the calling thread, or null
/// after a success. Valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn lsv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, e.g. `"0.1.0"`. Static storage.
#[no_mangle]
pub extern "C" fn lsv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
