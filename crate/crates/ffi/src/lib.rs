//! C ABI for the LMG battery simulator.
//!
//! Conventions:
//! - every fallible call returns an [`LmgStatus`]; on failure a message is
//!   available from [`lmg_last_error`] on the same thread;
//! - handles are opaque and must be released with their `_free` function;
//! - output arrays are caller-allocated `(ptr, len)` pairs, and `len` must be
//!   at least the size reported by the matching `_len` query (otherwise
//!   `LMG_STATUS_BUFFER_TOO_SMALL`);
//! - panics never cross the boundary; they surface as `LMG_STATUS_PANIC`.
//!
//! Safety: every pointer argument must be null or valid for the access the
//! function documents, and handles must not be used after `_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lmg_battery::bath::{run_bath_charging, BathSpec};
use lmg_battery::dicke::isotropic_energy;
use lmg_battery::ergotropy::{subsystem_report, SubsystemNormalization};
use lmg_battery::quench::uniform_time_grid;
use lmg_battery::{build_lmg_hamiltonian, diagonalize, Error, LmgParams, Quench, QuenchSpec, SpectralDecomposition};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonHermitian = 3,
    NumericFailure = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Interaction prefactor of the subsystem battery Hamiltonian.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LmgNormalization {
    /// `2/M`.
    Subsystem = 0,
    /// `2/N`.
    Full = 1,
}

/// Model parameters: `N` spins, coupling `lambda`, anisotropy `gamma`,
/// field `h`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmgModel {
    pub n: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub h: f64,
}

/// Headline numbers of a bath charging run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LmgBathSummary {
    pub w_max: f64,
    pub t_w_max: f64,
    /// Ergotropy at `t_w_max`.
    pub ergotropy_at_w_max: f64,
}

/// Diagonalized LMG Hamiltonian.
pub struct LmgSpectrum {
    spectrum: SpectralDecomposition,
}

/// Prepared quench: both spectra plus the time grid.
pub struct LmgQuench {
    quench: Quench,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(LmgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NonHermitian { .. } => LmgStatus::NonHermitian,
            Error::Invariant(_) => LmgStatus::NumericFailure,
            _ => LmgStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> LmgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LmgStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            LmgStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LmgStatus::NullPointer, format!("`{what}` is null"))
}

fn deref<'a, T>(ptr: *const T, what: &str) -> FfiResult<&'a T> {
    // SAFETY: the caller guarantees `ptr` is null or a live handle/value.
    unsafe { ptr.as_ref() }.ok_or_else(|| null(what))
}

fn write_out<T>(ptr: *mut T, value: T, what: &str) -> FfiResult {
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the contract, valid for writes.
    unsafe { ptr.write(value) };
    Ok(())
}

fn copy_out(src: &[f64], dst: *mut f64, len: usize, what: &str) -> FfiResult {
    if dst.is_null() {
        return Err(null(what));
    }
    if len < src.len() {
        return Err(Failure(
            LmgStatus::BufferTooSmall,
            format!("`{what}` holds {len} values, {} needed", src.len()),
        ));
    }
    // SAFETY: `dst` is valid for `len >= src.len()` writes per the contract.
    unsafe { std::ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

/// Like [`copy_out`] but a null destination means "not wanted".
fn copy_optional(src: &[f64], dst: *mut f64, len: usize, what: &str) -> FfiResult {
    if dst.is_null() {
        Ok(())
    } else {
        copy_out(src, dst, len, what)
    }
}

fn params(model: LmgModel) -> FfiResult<LmgParams> {
    Ok(LmgParams::new(model.n, model.lambda, model.gamma, model.h)?)
}

fn grid(t_max: f64, points: usize) -> FfiResult<Vec<f64>> {
    Ok(uniform_time_grid(t_max, points)?)
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lmg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lmg_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a nul byte"),
    };
    VERSION.as_ptr()
}

/// Diagonalizes the LMG Hamiltonian of `model`.
#[no_mangle]
pub unsafe extern "C" fn lmg_spectrum_new(model: LmgModel, out: *mut *mut LmgSpectrum) -> LmgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spectrum = diagonalize(&build_lmg_hamiltonian(&params(model)?)?)?;
        write_out(out, Box::into_raw(Box::new(LmgSpectrum { spectrum })), "out")
    })
}

/// Number of levels, `N + 1`; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lmg_spectrum_len(spectrum: *const LmgSpectrum) -> usize {
    deref(spectrum, "spectrum").map(|s| s.spectrum.dim()).unwrap_or(0)
}

/// Eigenvalues in ascending order.
#[no_mangle]
pub unsafe extern "C" fn lmg_spectrum_eigenvalues(
    spectrum: *const LmgSpectrum,
    out: *mut f64,
    len: usize,
) -> LmgStatus {
    guard(|| copy_out(deref(spectrum, "spectrum")?.spectrum.eigenvalues(), out, len, "out"))
}

/// Releases a spectrum handle; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn lmg_spectrum_free(spectrum: *mut LmgSpectrum) {
    if !spectrum.is_null() {
        // SAFETY: the handle came from `lmg_spectrum_new` and is freed once.
        drop(unsafe { Box::from_raw(spectrum) });
    }
}

/// Prepares a quench from the ground state of `model` to field `h_c`,
/// sampled on `points` uniform times in `[0, t_max]`.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_new(
    model: LmgModel,
    h_c: f64,
    t_max: f64,
    points: usize,
    out: *mut *mut LmgQuench,
) -> LmgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = QuenchSpec::new(params(model)?, h_c, grid(t_max, points)?)?;
        let quench = Quench::prepare(spec)?;
        write_out(out, Box::into_raw(Box::new(LmgQuench { quench })), "out")
    })
}

/// Number of time points; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_len(quench: *const LmgQuench) -> usize {
    deref(quench, "quench").map(|q| q.quench.times().len()).unwrap_or(0)
}

/// Number of work-distribution points, `N + 1`; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_levels(quench: *const LmgQuench) -> usize {
    deref(quench, "quench")
        .map(|q| q.quench.charge_spectrum().dim())
        .unwrap_or(0)
}

#[no_mangle]
pub unsafe extern "C" fn lmg_quench_times(quench: *const LmgQuench, out: *mut f64, len: usize) -> LmgStatus {
    guard(|| copy_out(deref(quench, "quench")?.quench.times(), out, len, "out"))
}

/// Stored work `W(t)` on the time grid.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_work(quench: *const LmgQuench, out: *mut f64, len: usize) -> LmgStatus {
    guard(|| copy_out(&deref(quench, "quench")?.quench.stored_work_series(), out, len, "out"))
}

/// Work distribution: values `mu_k - eps_0` and their probabilities.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_work_distribution(
    quench: *const LmgQuench,
    work: *mut f64,
    probability: *mut f64,
    len: usize,
) -> LmgStatus {
    guard(|| {
        let wpd = deref(quench, "quench")?.quench.work_distribution();
        copy_out(&wpd.work_values, work, len, "work")?;
        copy_out(&wpd.probabilities, probability, len, "probability")
    })
}

/// Long-time average of the stored work and its variance.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_long_time(
    quench: *const LmgQuench,
    mean: *mut f64,
    variance: *mut f64,
) -> LmgStatus {
    guard(|| {
        let q = &deref(quench, "quench")?.quench;
        write_out(mean, q.long_time_average_work(), "mean")?;
        write_out(variance, q.work_variance(), "variance")
    })
}

/// Ergotropy and work of the first `m` spins on the time grid.
/// `normalization` is an [`LmgNormalization`] value. Either output may be
/// null to skip it.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_subsystem(
    quench: *const LmgQuench,
    m: usize,
    normalization: u32,
    ergotropy: *mut f64,
    work: *mut f64,
    len: usize,
) -> LmgStatus {
    guard(|| {
        let norm = match normalization {
            n if n == LmgNormalization::Subsystem as u32 => SubsystemNormalization::Subsystem,
            n if n == LmgNormalization::Full as u32 => SubsystemNormalization::Full,
            n => {
                return Err(Failure(
                    LmgStatus::InvalidArgument,
                    format!("unknown normalization {n}"),
                ))
            }
        };
        let report = subsystem_report(&deref(quench, "quench")?.quench, m, norm)?;
        copy_optional(&report.ergotropy_series, ergotropy, len, "ergotropy")?;
        copy_optional(&report.subsystem_work_series, work, len, "work")
    })
}

/// Releases a quench handle; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn lmg_quench_free(quench: *mut LmgQuench) {
    if !quench.is_null() {
        // SAFETY: the handle came from `lmg_quench_new` and is freed once.
        drop(unsafe { Box::from_raw(quench) });
    }
}

/// Charges `model` from a Fock state of `n_init` photons at frequency
/// `omega` and coupling `g`, with photon cutoff `n_max`, over `points`
/// uniform times in `[0, t_max]`. Series outputs of length `points` may be
/// null to skip them.
#[no_mangle]
pub unsafe extern "C" fn lmg_bath_run(
    model: LmgModel,
    omega: f64,
    g: f64,
    n_init: usize,
    n_max: usize,
    t_max: f64,
    points: usize,
    summary: *mut LmgBathSummary,
    work: *mut f64,
    photons: *mut f64,
    ergotropy: *mut f64,
    len: usize,
) -> LmgStatus {
    guard(|| {
        if summary.is_null() {
            return Err(null("summary"));
        }
        let run = run_bath_charging(
            &params(model)?,
            &BathSpec::new(omega, g, n_init, n_max),
            &grid(t_max, points)?,
        )?;
        copy_optional(&run.work_series, work, len, "work")?;
        copy_optional(&run.photon_series, photons, len, "photons")?;
        copy_optional(&run.ergotropy_series, ergotropy, len, "ergotropy")?;
        let s = LmgBathSummary {
            w_max: run.w_max,
            t_w_max: run.t_w_max,
            ergotropy_at_w_max: run.ergotropy_at_w_max,
        };
        write_out(summary, s, "summary")
    })
}

/// Closed-form energy of the `l`-th isotropic level (`gamma = 1`,
/// `lambda = 1`), without the identity shift.
#[no_mangle]
pub unsafe extern "C" fn lmg_isotropic_energy(n: usize, h: f64, l: usize, out: *mut f64) -> LmgStatus {
    guard(|| write_out(out, isotropic_energy(n, h, l)?, "out"))
}
