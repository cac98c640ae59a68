//! C ABI over `toral-core`.
//!
//! Objects are opaque handles created by `*_new` functions and released by
//! the matching `*_free`. Every fallible call returns a [`ToralStatus`]; the
//! message of the last failure on the calling thread is available through
//! [`toral_last_error`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use toral_core::lattice::{enumerate_shell, LatticeShell};
use toral_core::measures::MeasureModel;
use toral_core::quadform::{assemble_gram_capped, GramSpectrum, DEFAULT_GRAM_CAP};
use toral_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToralStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Overflow = 4,
    Resource = 5,
    NonConvergence = 6,
    Certificate = 7,
    Unsupported = 8,
    Degenerate = 9,
    Empty = 10,
    Io = 11,
    Json = 12,
    Utf8 = 13,
    OutOfRange = 14,
    Panic = 15,
}

/// Lattice shell `{k ∈ Z^d : |k|² = n}`.
pub struct ToralShell(LatticeShell);

/// Measure on the torus.
pub struct ToralMeasure(MeasureModel);

/// Gram matrix spectrum of a shell against a measure.
pub struct ToralGram(GramSpectrum);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ToralStatus {
    match e {
        Error::InvalidArgument(_) => ToralStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => ToralStatus::DimensionMismatch,
        Error::Overflow { .. } => ToralStatus::Overflow,
        Error::Resource { .. } => ToralStatus::Resource,
        Error::NonConvergence { .. } => ToralStatus::NonConvergence,
        Error::Certificate { .. } => ToralStatus::Certificate,
        Error::Unsupported { .. } => ToralStatus::Unsupported,
        Error::Degenerate(_) => ToralStatus::Degenerate,
        Error::Empty(_) => ToralStatus::Empty,
        Error::Io(_) => ToralStatus::Io,
        Error::Json(_) => ToralStatus::Json,
    }
}

fn fail(status: ToralStatus, msg: impl Into<String>) -> ToralStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> ToralStatus) -> ToralStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(ToralStatus::Panic, "internal panic"),
    }
}

fn core_result<T>(r: toral_core::Result<T>, out: impl FnOnce(T)) -> ToralStatus {
    match r {
        Ok(v) => {
            out(v);
            ToralStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn toral_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length
/// excluding the terminator, or 0 if there is none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn toral_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Number of representations of `n` as an ordered sum of `d` squares.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn toral_sum_of_squares_count(d: size_t, n: i64, out: *mut u64) -> ToralStatus {
    guard(|| {
        if out.is_null() {
            return fail(ToralStatus::NullPointer, "out is null");
        }
        core_result(toral_core::arith::sum_of_squares_count(d, n), |c| *out = c.count)
    })
}

/// Enumerates the shell `|k|² = n` in `Z^d`.
///
/// # Safety
/// `out` must be valid for writing. The handle must be released with
/// [`toral_shell_free`].
#[no_mangle]
pub unsafe extern "C" fn toral_shell_new(d: size_t, n: i64, out: *mut *mut ToralShell) -> ToralStatus {
    guard(|| {
        if out.is_null() {
            return fail(ToralStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        core_result(enumerate_shell(d, n), |s| {
            *out = Box::into_raw(Box::new(ToralShell(s)))
        })
    })
}

/// # Safety
/// `shell` must be null or a handle from [`toral_shell_new`].
#[no_mangle]
pub unsafe extern "C" fn toral_shell_len(shell: *const ToralShell) -> size_t {
    shell.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `shell` must be null or a handle from [`toral_shell_new`].
#[no_mangle]
pub unsafe extern "C" fn toral_shell_dim(shell: *const ToralShell) -> size_t {
    shell.as_ref().map_or(0, |s| s.0.d)
}

/// Writes point `index` (in lexicographic order) into `out[0..dim]`.
///
/// # Safety
/// `shell` must be a live handle and `out` valid for `dim` writes.
#[no_mangle]
pub unsafe extern "C" fn toral_shell_point(
    shell: *const ToralShell,
    index: size_t,
    out: *mut i64,
) -> ToralStatus {
    guard(|| {
        let Some(s) = shell.as_ref() else {
            return fail(ToralStatus::NullPointer, "shell is null");
        };
        if out.is_null() {
            return fail(ToralStatus::NullPointer, "out is null");
        }
        let Some(p) = s.0.points.get(index) else {
            return fail(ToralStatus::OutOfRange, format!("index {index} >= {}", s.0.len()));
        };
        ptr::copy_nonoverlapping(p.as_ptr(), out, p.len());
        ToralStatus::Ok
    })
}

/// # Safety
/// `shell` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toral_shell_free(shell: *mut ToralShell) {
    if !shell.is_null() {
        drop(Box::from_raw(shell));
    }
}

/// Parses a measure from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn toral_measure_from_json(
    json: *const c_char,
    out: *mut *mut ToralMeasure,
) -> ToralStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(ToralStatus::NullPointer, "null argument");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(ToralStatus::Utf8, "measure JSON is not UTF-8");
        };
        core_result(MeasureModel::from_json(text), |m| {
            *out = Box::into_raw(Box::new(ToralMeasure(m)))
        })
    })
}

/// # Safety
/// `m` must be null or a handle from [`toral_measure_from_json`].
#[no_mangle]
pub unsafe extern "C" fn toral_measure_dim(m: *const ToralMeasure) -> size_t {
    m.as_ref().map_or(0, |m| m.0.d())
}

/// Fourier coefficient `μ̂(k)` for `k = k[0..dim]`.
///
/// # Safety
/// `m` must be a live handle, `k` valid for `dim` reads, `re` and `im` valid
/// for writing.
#[no_mangle]
pub unsafe extern "C" fn toral_measure_fourier_coeff(
    m: *const ToralMeasure,
    k: *const i64,
    dim: size_t,
    re: *mut f64,
    im: *mut f64,
) -> ToralStatus {
    guard(|| {
        let Some(m) = m.as_ref() else {
            return fail(ToralStatus::NullPointer, "measure is null");
        };
        if k.is_null() || re.is_null() || im.is_null() {
            return fail(ToralStatus::NullPointer, "null argument");
        }
        let k = std::slice::from_raw_parts(k, dim);
        core_result(m.0.fourier_coeff(k), |c| {
            *re = c.re;
            *im = c.im;
        })
    })
}

/// # Safety
/// `m` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toral_measure_free(m: *mut ToralMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Assembles and diagonalizes the Gram matrix of `shell` against `m`.
/// `cap = 0` selects the default size cap.
///
/// # Safety
/// `shell` and `m` must be live handles and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn toral_gram_new(
    shell: *const ToralShell,
    m: *const ToralMeasure,
    cap: size_t,
    out: *mut *mut ToralGram,
) -> ToralStatus {
    guard(|| {
        let (Some(s), Some(m)) = (shell.as_ref(), m.as_ref()) else {
            return fail(ToralStatus::NullPointer, "null handle");
        };
        if out.is_null() {
            return fail(ToralStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let cap = if cap == 0 { DEFAULT_GRAM_CAP } else { cap };
        core_result(assemble_gram_capped(&s.0.points, &m.0, cap), |g| {
            *out = Box::into_raw(Box::new(ToralGram(g)))
        })
    })
}

/// Smallest and largest eigenvalue.
///
/// # Safety
/// `g` must be a live handle; `lambda_min` and `lambda_max` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn toral_gram_extremes(
    g: *const ToralGram,
    lambda_min: *mut f64,
    lambda_max: *mut f64,
) -> ToralStatus {
    guard(|| {
        let Some(g) = g.as_ref() else {
            return fail(ToralStatus::NullPointer, "gram is null");
        };
        if lambda_min.is_null() || lambda_max.is_null() {
            return fail(ToralStatus::NullPointer, "null argument");
        }
        *lambda_min = g.0.lambda_min();
        *lambda_max = g.0.lambda_max();
        ToralStatus::Ok
    })
}

/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn toral_gram_dim(g: *const ToralGram) -> size_t {
    g.as_ref().map_or(0, |g| g.0.freqs.len())
}

/// # Safety
/// `g` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toral_gram_free(g: *mut ToralGram) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_error_truncates() {
        set_error("abcdef".into());
        let mut buf = [0 as c_char; 4];
        let n = unsafe { toral_last_error(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(n, 6);
        let s = unsafe { CStr::from_ptr(buf.as_ptr()) };
        assert_eq!(s.to_str().unwrap(), "abc");
    }

    #[test]
    fn version_is_terminated() {
        let v = unsafe { CStr::from_ptr(toral_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
