//! C ABI over `tucker_hooi`.
//!
//! Objects cross the boundary as opaque handles (`TkTensor`, `TkSolution`)
//! that the caller releases with the matching `*_free` function. Every entry
//! point returns a [`TkStatus`]; on failure a description is available from
//! [`tk_last_error`] on the same thread. Panics are caught and reported as
//! `TK_STATUS_PANIC`.
//!
//! Arrays are column-major with mode 0 varying fastest; modes are zero-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tucker_hooi::io::{read_tensor_file, write_trace_json, write_tensor_file};
use tucker_hooi::solver::Initializer;
use tucker_hooi::{synthetic, Algorithm, DenseTensor, Error, Solution, SolverConfig, StopReason};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    Io = 4,
    Format = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkAlgorithm {
    Hooi = 0,
    Greedy = 1,
    Tuckals3 = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkStopReason {
    Converged = 0,
    MaxSweeps = 1,
    Aborted = 2,
}

/// Solver settings; start from [`tk_solve_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TkSolveOptions {
    pub algorithm: TkAlgorithm,
    pub max_sweeps: usize,
    pub change_tol: f64,
    pub gap_tol: f64,
    /// Nonzero selects a seeded random start instead of truncated HOSVD.
    pub random_init: u8,
    pub seed: u64,
}

/// Dense tensor handle.
pub struct TkTensor(DenseTensor);

/// Fitted model plus its per-sweep trace.
pub struct TkSolution(Solution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TkStatus {
    match e {
        Error::ShapeMismatch(_)
        | Error::ModeOutOfRange { .. }
        | Error::DuplicateMode(_)
        | Error::RankOutOfRange { .. } => TkStatus::ShapeMismatch,
        Error::InvalidConfig(_) | Error::NonFinite(_) | Error::ShapeOverflow => {
            TkStatus::InvalidArgument
        }
        Error::NotOrthonormal(_)
        | Error::RankDeficient { .. }
        | Error::NoConvergence(_)
        | Error::NotInSolutionSet { .. } => TkStatus::Numerical,
        Error::BadMagic | Error::TruncatedPayload | Error::Malformed(_) | Error::Json(_) => {
            TkStatus::Format
        }
        Error::Io(_) | Error::Csv(_) => TkStatus::Io,
    }
}

struct Failure(TkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(TkStatus::Io, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TkStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TkStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_path<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(TkStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `src` into `dst[..cap]`; fails without writing if it does not fit.
unsafe fn copy_out(src: &[f64], dst: *mut f64, cap: usize) -> Result<(), Failure> {
    if cap < src.len() {
        return Err(Failure(
            TkStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    if !src.is_empty() {
        if dst.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn tk_solve_options_default() -> TkSolveOptions {
    let d = SolverConfig::default();
    TkSolveOptions {
        algorithm: TkAlgorithm::Hooi,
        max_sweeps: d.max_sweeps,
        change_tol: d.change_tol,
        gap_tol: d.gap_tol,
        random_init: 0,
        seed: d.seed,
    }
}

/// Creates a tensor by copying `shape[..order]` and the column-major `data`
/// (whose length must be the product of the shape).
///
/// # Safety
/// `shape` must point to `order` values and `data` to that many elements.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_new(
    order: usize,
    shape: *const usize,
    data: *const f64,
    out: *mut *mut TkTensor,
) -> TkStatus {
    guard(|| {
        let shape = slice(shape, order, "shape")?.to_vec();
        let len = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| {
            Failure(TkStatus::InvalidArgument, "shape overflow".into())
        })?;
        let data = slice(data, len, "data")?.to_vec();
        store(out, TkTensor(DenseTensor::new(shape, data)?))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_read(path: *const c_char, out: *mut *mut TkTensor) -> TkStatus {
    guard(|| store(out, TkTensor(read_tensor_file(c_path(path)?)?)))
}

/// # Safety
/// `t` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_write(t: *const TkTensor, path: *const c_char) -> TkStatus {
    guard(|| {
        let t = as_ref(t, "tensor")?;
        write_tensor_file(&t.0, c_path(path)?)?;
        Ok(())
    })
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_order(t: *const TkTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.order())
}

/// Number of elements, or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_len(t: *const TkTensor) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Writes the shape into `shape[..cap]`.
///
/// # Safety
/// `t` must be a live handle and `shape` writable for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_shape(t: *const TkTensor, shape: *mut usize, cap: usize) -> TkStatus {
    guard(|| {
        let dims = as_ref(t, "tensor")?.0.shape();
        if cap < dims.len() {
            return Err(Failure(TkStatus::BufferTooSmall, format!("{} modes", dims.len())));
        }
        if shape.is_null() {
            return Err(null("shape"));
        }
        ptr::copy_nonoverlapping(dims.as_ptr(), shape, dims.len());
        Ok(())
    })
}

/// Borrowed pointer to the column-major data, valid while `t` lives.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_data(t: *const TkTensor) -> *const f64 {
    t.as_ref().map_or(ptr::null(), |t| t.0.as_slice().as_ptr())
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_tensor_free(t: *mut TkTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Seeded planted Tucker tensor with Gaussian noise of relative norm `noise`.
///
/// # Safety
/// `shape` and `ranks` must each point to `order` values.
#[no_mangle]
pub unsafe extern "C" fn tk_gen_synthetic(
    order: usize,
    shape: *const usize,
    ranks: *const usize,
    noise: f64,
    seed: u64,
    out: *mut *mut TkTensor,
) -> TkStatus {
    guard(|| {
        let shape = slice(shape, order, "shape")?;
        let ranks = slice(ranks, order, "ranks")?;
        store(out, TkTensor(synthetic::gen_synthetic(shape, ranks, noise, seed)?))
    })
}

/// Fits a rank-`ranks` Tucker model. A run that stops early because an update
/// fails still returns `TK_STATUS_OK`; check [`tk_solution_stop_reason`].
///
/// # Safety
/// `t` must be a live handle, `ranks` must point to one value per mode and
/// `options` may be null (defaults) or point to valid options.
#[no_mangle]
pub unsafe extern "C" fn tk_solve(
    t: *const TkTensor,
    ranks: *const usize,
    options: *const TkSolveOptions,
    out: *mut *mut TkSolution,
) -> TkStatus {
    guard(|| {
        let x = &as_ref(t, "tensor")?.0;
        let ranks = slice(ranks, x.order(), "ranks")?;
        let opts = options.as_ref().copied().unwrap_or_else(|| tk_solve_options_default());
        let config = SolverConfig {
            algorithm: match opts.algorithm {
                TkAlgorithm::Hooi => Algorithm::Hooi,
                TkAlgorithm::Greedy => Algorithm::Greedy,
                TkAlgorithm::Tuckals3 => Algorithm::Tuckals3,
            },
            max_sweeps: opts.max_sweeps,
            change_tol: opts.change_tol,
            gap_tol: opts.gap_tol,
            init: if opts.random_init != 0 { Initializer::Random } else { Initializer::Hosvd },
            seed: opts.seed,
            ..SolverConfig::default()
        };
        store(out, TkSolution(tucker_hooi::solve(x, ranks, &config)?))
    })
}

/// `||core||_F^2`, or NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_objective(s: *const TkSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.model.objective())
}

/// `||X - X_hat||_F / ||X||_F`, or NaN for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_relative_residual(s: *const TkSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.model.relative_residual)
}

/// Normalized KKT aggregate at the returned factors, or NaN for null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_kkt(s: *const TkSolution) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.trace.final_kkt.aggregate_normalized)
}

/// Number of completed sweeps, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_sweeps(s: *const TkSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.trace.records.len())
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_stop_reason(s: *const TkSolution, out: *mut TkStopReason) -> TkStatus {
    guard(|| {
        let reason = match as_ref(s, "solution")?.0.trace.stop_reason {
            StopReason::Converged => TkStopReason::Converged,
            StopReason::MaxSweeps => TkStopReason::MaxSweeps,
            StopReason::Aborted { .. } => TkStopReason::Aborted,
        };
        if out.is_null() {
            return Err(null("out"));
        }
        *out = reason;
        Ok(())
    })
}

/// Objective after sweep `k` (zero-based) into `out`.
///
/// # Safety
/// `s` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_sweep_objective(s: *const TkSolution, k: usize, out: *mut f64) -> TkStatus {
    guard(|| {
        let records = &as_ref(s, "solution")?.0.trace.records;
        let rec = records.get(k).ok_or_else(|| {
            Failure(TkStatus::InvalidArgument, format!("sweep {k} of {}", records.len()))
        })?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = rec.objective;
        Ok(())
    })
}

/// Copies factor `n` (column-major, `rows x cols`) into `buf[..cap]` and its
/// dimensions into `rows` / `cols` when those are non-null. Passing a null
/// `buf` with `cap == 0` only queries the dimensions.
///
/// # Safety
/// `s` must be a live handle; non-null pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_factor(
    s: *const TkSolution,
    n: usize,
    rows: *mut usize,
    cols: *mut usize,
    buf: *mut f64,
    cap: usize,
) -> TkStatus {
    guard(|| {
        let factors = &as_ref(s, "solution")?.0.model.factors;
        if n >= factors.len() {
            return Err(Failure(TkStatus::InvalidArgument, format!("mode {n} of {}", factors.len())));
        }
        let f = factors.get(n).as_matrix();
        if !rows.is_null() {
            *rows = f.rows();
        }
        if !cols.is_null() {
            *cols = f.cols();
        }
        if buf.is_null() && cap == 0 {
            return Ok(());
        }
        copy_out(f.as_slice(), buf, cap)
    })
}

/// Copies the core tensor into a new handle.
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_core(s: *const TkSolution, out: *mut *mut TkTensor) -> TkStatus {
    guard(|| store(out, TkTensor(as_ref(s, "solution")?.0.model.core.clone())))
}

/// Writes the JSON trace; `input` must be the tensor that was solved.
///
/// # Safety
/// Both handles must be live and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_write_trace(
    s: *const TkSolution,
    input: *const TkTensor,
    path: *const c_char,
) -> TkStatus {
    guard(|| {
        let sol = &as_ref(s, "solution")?.0;
        let x = &as_ref(input, "input")?.0;
        let sink = BufWriter::new(File::create(c_path(path)?)?);
        write_trace_json(&sol.trace, x, sink)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_solution_free(s: *mut TkSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::BadMagic), TkStatus::Format);
        assert_eq!(status_of(&Error::DuplicateMode(1)), TkStatus::ShapeMismatch);
        assert_eq!(status_of(&Error::NoConvergence(3)), TkStatus::Numerical);
        assert_eq!(status_of(&Error::InvalidConfig("x".into())), TkStatus::InvalidArgument);
    }

    #[test]
    fn panics_become_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, TkStatus::Panic);
        let msg = unsafe { CStr::from_ptr(tk_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "panic: boom");
    }

    #[test]
    fn interior_nul_is_sanitized() {
        set_last_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(tk_last_error()) }.to_str().unwrap();
        assert_eq!(msg, "a b");
    }
}
