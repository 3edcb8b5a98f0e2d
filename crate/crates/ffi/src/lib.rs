//! C ABI over the divergence and ensemble routines of `subeth`.
//!
//! Matrices cross the boundary as two row-major `double` arrays (real and
//! imaginary parts). States live behind opaque [`SubethDensity`] handles that
//! the caller releases with [`subeth_density_free`]. Every fallible function
//! returns a [`SubethStatus`]; on failure [`subeth_last_error`] describes the
//! error until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subeth::divergences::{self, BsForm};
use subeth::states::StateFile;
use subeth::{ensembles, linalg, ComplexMatrix, DensityMatrix, Error, C64};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubethStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    /// Input is not a valid density matrix (Hermitian, unit trace, PSD).
    InvalidState = 4,
    /// Reference state is singular where it must be invertible, or the
    /// support condition fails.
    Support = 5,
    Numerical = 6,
    Parse = 7,
    Panic = 8,
}

/// A validated density matrix.
pub struct SubethDensity {
    inner: DensityMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SubethStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } | Error::InconsistentDims(_) => {
            SubethStatus::DimensionMismatch
        }
        Error::NotHermitian { .. } | Error::InvalidTrace { .. } | Error::NotPositive { .. } | Error::NonFinite => {
            SubethStatus::InvalidState
        }
        Error::NotStrictlyPositive { .. } | Error::SupportViolation | Error::OutsideDomain { .. } => SubethStatus::Support,
        Error::EigenFailure => SubethStatus::Numerical,
        Error::Parse(_) => SubethStatus::Parse,
        _ => SubethStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SubethStatus>) -> SubethStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SubethStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            SubethStatus::Panic
        }
    }
}

fn check<T>(r: subeth::Result<T>) -> Result<T, SubethStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> SubethStatus {
    set_error(format!("{what} is null"));
    SubethStatus::NullPointer
}

unsafe fn read_matrix(re: *const f64, im: *const f64, dim: usize) -> Result<ComplexMatrix, SubethStatus> {
    if re.is_null() {
        return Err(null("real part"));
    }
    let len = dim.checked_mul(dim).ok_or_else(|| {
        set_error("dimension overflows".into());
        SubethStatus::InvalidArgument
    })?;
    let re = std::slice::from_raw_parts(re, len);
    let entries = if im.is_null() {
        re.iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, len);
        re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect()
    };
    check(ComplexMatrix::new(dim, dim, entries))
}

unsafe fn handle<'a>(p: *const SubethDensity, what: &str) -> Result<&'a DensityMatrix, SubethStatus> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

unsafe fn emit(out: *mut *mut SubethDensity, state: DensityMatrix) {
    *out = Box::into_raw(Box::new(SubethDensity { inner: state }));
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn subeth_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn subeth_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a density matrix from `dim × dim` row-major entries. `im` may be
/// null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_new(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut SubethDensity,
) -> SubethStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = read_matrix(re, im, dim)?;
        emit(out, check(DensityMatrix::new(m))?);
        Ok(())
    })
}

/// Parses a state file (the JSON schema written by the `subeth` tools).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_from_json(json: *const c_char, out: *mut *mut SubethDensity) -> SubethStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            set_error(e.to_string());
            SubethStatus::Parse
        })?;
        let file: StateFile = serde_json::from_str(text).map_err(|e| {
            set_error(e.to_string());
            SubethStatus::Parse
        })?;
        emit(out, check(file.to_density())?);
        Ok(())
    })
}

/// Canonical state `e^{-βH}/Z` of a Hermitian `H`.
///
/// # Safety
/// As for [`subeth_density_new`].
#[no_mangle]
pub unsafe extern "C" fn subeth_gibbs_state(
    h_re: *const f64,
    h_im: *const f64,
    dim: usize,
    beta: f64,
    out: *mut *mut SubethDensity,
) -> SubethStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let h = read_matrix(h_re, h_im, dim)?;
        emit(out, check(ensembles::gibbs_state(&h, beta))?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_free(state: *mut SubethDensity) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Hilbert dimension, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_dim(state: *const SubethDensity) -> usize {
    state.as_ref().map_or(0, |s| s.inner.dim())
}

/// Copies the entries into caller buffers of `len ≥ dim²` doubles each.
/// `im` may be null.
///
/// # Safety
/// Buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_entries(
    state: *const SubethDensity,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SubethStatus {
    guard(|| {
        let s = handle(state, "state")?;
        if re.is_null() {
            return Err(null("re"));
        }
        let entries = s.matrix().entries_row_major();
        if len < entries.len() {
            set_error(format!("buffer holds {len} entries, need {}", entries.len()));
            return Err(SubethStatus::DimensionMismatch);
        }
        for (k, z) in entries.iter().enumerate() {
            *re.add(k) = z.re;
            if !im.is_null() {
                *im.add(k) = z.im;
            }
        }
        Ok(())
    })
}

/// Eigenvalues in ascending order into `out[0..dim]`.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn subeth_density_eigenvalues(
    state: *const SubethDensity,
    out: *mut f64,
    len: usize,
) -> SubethStatus {
    guard(|| {
        let s = handle(state, "state")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let ev = s.eigenvalues();
        if len < ev.len() {
            set_error(format!("buffer holds {len} values, need {}", ev.len()));
            return Err(SubethStatus::DimensionMismatch);
        }
        ptr::copy_nonoverlapping(ev.as_ptr(), out, ev.len());
        Ok(())
    })
}

/// Von Neumann entropy.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_entropy(state: *const SubethDensity, out: *mut f64) -> SubethStatus {
    guard(|| {
        let s = handle(state, "state")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.entropy();
        Ok(())
    })
}

unsafe fn binary(
    sigma: *const SubethDensity,
    rho: *const SubethDensity,
    out: *mut f64,
    f: impl FnOnce(&DensityMatrix, &DensityMatrix) -> subeth::Result<f64>,
) -> SubethStatus {
    guard(|| {
        let a = handle(sigma, "sigma")?;
        let b = handle(rho, "rho")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = check(f(a, b))?;
        Ok(())
    })
}

/// Umegaki relative entropy `S(σ‖ρ)`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_umegaki(
    sigma: *const SubethDensity,
    rho: *const SubethDensity,
    out: *mut f64,
) -> SubethStatus {
    binary(sigma, rho, out, divergences::umegaki)
}

/// BS relative entropy `Ŝ(σ‖ρ)` in closed form 1, 2 or 3; `ρ` must be
/// invertible.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_bs_entropy(
    sigma: *const SubethDensity,
    rho: *const SubethDensity,
    form: c_int,
    out: *mut f64,
) -> SubethStatus {
    let form = match form {
        1 => BsForm::Sandwich,
        2 => BsForm::Similarity,
        3 => BsForm::Rescaled,
        other => {
            set_error(format!("BS form must be 1, 2 or 3, got {other}"));
            return SubethStatus::InvalidArgument;
        }
    };
    binary(sigma, rho, out, |a, b| divergences::bs_entropy(a, b, form))
}

/// `½‖σ − ρ‖₁`
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_trace_distance(
    sigma: *const SubethDensity,
    rho: *const SubethDensity,
    out: *mut f64,
) -> SubethStatus {
    binary(sigma, rho, out, |a, b| linalg::trace_distance(a.matrix(), b.matrix()))
}

/// `V(ρ, J_ρ^{-1/2}(σ))`, the variance of the formal observable of `σ`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn subeth_formal_variance(
    sigma: *const SubethDensity,
    rho: *const SubethDensity,
    out: *mut f64,
) -> SubethStatus {
    binary(sigma, rho, out, |a, b| {
        let o = divergences::formal_observable(b, a)?;
        divergences::quantum_variance(b, &o.matrix)
    })
}
