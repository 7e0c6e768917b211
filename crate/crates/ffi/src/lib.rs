//! C ABI over `gk-core`.
//!
//! Every fallible function returns a [`GkStatus`]; on failure the message is
//! available from [`gk_last_error`] on the same thread. Objects are opaque
//! handles created by `*_new` functions and released with the matching
//! `*_free`. Strings returned through `char **` must be released with
//! [`gk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gk_core::cli::{self, Mode, RunConfig};
use gk_core::constants;
use gk_core::series::{self, Inversion};
use gk_core::solver::{self, ProblemInstance};
use gk_core::{rounding, Complex64, Field, GkError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    DimensionMismatch = 4,
    Budget = 5,
    InsufficientOrder = 6,
    Numerical = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

impl From<&GkError> for GkStatus {
    fn from(e: &GkError) -> Self {
        match e {
            GkError::Domain { .. } => GkStatus::Domain,
            GkError::InvalidArgument(_) => GkStatus::InvalidArgument,
            GkError::DimensionMismatch(_) => GkStatus::DimensionMismatch,
            GkError::Budget { .. } => GkStatus::Budget,
            GkError::InsufficientOrder { .. } => GkStatus::InsufficientOrder,
            GkError::Numerical(_) => GkStatus::Numerical,
        }
    }
}

/// Field of a problem instance.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GkField {
    Real = 0,
    Complex = 1,
}

impl From<Field> for GkField {
    fn from(f: Field) -> Self {
        match f {
            Field::Real => GkField::Real,
            Field::Complex => GkField::Complex,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GkConstants {
    pub k_real: f64,
    pub c_arcsinh1: f64,
    pub x0: f64,
    pub c0: f64,
    pub k_complex: f64,
    pub davie_real: f64,
    pub davie_complex: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GkRoundSummary {
    pub relaxation_value: f64,
    pub expected_mean: f64,
    pub mean_value: f64,
    pub std_error: f64,
    pub best_value: f64,
    pub clip_magnitude: f64,
    /// 1 when the 5σ expectation check and the discrete check pass.
    pub ok: i32,
}

/// Opaque matrix instance.
pub struct GkInstance(ProblemInstance);

/// Opaque inverse series of the Haagerup function.
pub struct GkSeries(Inversion);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, converting errors and panics to a status code.
fn guard<F: FnOnce() -> Result<(), (GkStatus, String)>>(f: F) -> GkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GkStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside gk");
            GkStatus::Panic
        }
    }
}

fn core<T>(r: gk_core::Result<T>) -> Result<T, (GkStatus, String)> {
    r.map_err(|e| (GkStatus::from(&e), e.to_string()))
}

fn null(name: &str) -> (GkStatus, String) {
    (GkStatus::NullPointer, format!("{name} is null"))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, (GkStatus, String)> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (GkStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], (GkStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, (GkStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (GkStatus::Numerical, "string contains NUL".into()))
}

/// Message of the last failed call on this thread ("" after a success).
/// Valid until the next gk call on the same thread.
#[no_mangle]
pub extern "C" fn gk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn gk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fills `out` with the constants and Davie bounds (the first call takes
/// a few hundred milliseconds; later calls are cached).
///
/// # Safety
/// `out` must point to writable memory for one `GkConstants`.
#[no_mangle]
pub unsafe extern "C" fn gk_constants(out: *mut GkConstants) -> GkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let x0 = core(constants::haagerup_x0())?;
        *out = GkConstants {
            k_real: constants::krivine_constant(),
            c_arcsinh1: constants::arcsinh1(),
            x0: x0.x0,
            c0: x0.c0,
            k_complex: 1.0 / x0.c0,
            davie_real: constants::davie_real_bound().value,
            davie_complex: constants::davie_complex_bound().value,
        };
        Ok(())
    })
}

/// `h(x)` for `|x| ≤ 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_haagerup_h(x: f64, out: *mut f64) -> GkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = core(constants::haagerup_h(x))?;
        Ok(())
    })
}

/// Inverse series of `h` with `order` odd coefficients (at least 1).
///
/// # Safety
/// `out` must be writable; the handle is released with `gk_series_free`.
#[no_mangle]
pub unsafe extern "C" fn gk_h_inverse_new(order: usize, out: *mut *mut GkSeries) -> GkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if order == 0 {
            return Err((GkStatus::InvalidArgument, "order must be positive".into()));
        }
        *out = Box::into_raw(Box::new(GkSeries(series::h_inverse_with_order(order))));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a live handle from `gk_h_inverse_new`.
#[no_mangle]
pub unsafe extern "C" fn gk_series_free(s: *mut GkSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_series_order(s: *const GkSeries, out: *mut usize) -> GkStatus {
    guard(|| {
        let s = in_ref(s, "series")?;
        *out_ref(out, "out")? = s.0.series.order();
        Ok(())
    })
}

/// Coefficient of `x^(2k+1)` and its error estimate (`error` may be null).
///
/// # Safety
/// `s` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_series_coeff(s: *const GkSeries, k: usize, value: *mut f64, error: *mut f64) -> GkStatus {
    guard(|| {
        let s = in_ref(s, "series")?;
        let value = out_ref(value, "value")?;
        if k >= s.0.series.order() {
            return Err((
                GkStatus::InsufficientOrder,
                format!("k = {k} but the series has {} coefficients", s.0.series.order()),
            ));
        }
        *value = s.0.series.coeff(k);
        if let Some(e) = error.as_mut() {
            *e = s.0.error_bounds[k];
        }
        Ok(())
    })
}

/// Sum of the series at `x`, `|x| ≤ 1`.
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_series_eval(s: *const GkSeries, x: f64, out: *mut f64) -> GkStatus {
    guard(|| {
        let s = in_ref(s, "series")?;
        *out_ref(out, "out")? = core(s.0.series.eval(x))?;
        Ok(())
    })
}

unsafe fn store_instance(out: *mut *mut GkInstance, mtx: gk_core::Result<ProblemInstance>) -> Result<(), (GkStatus, String)> {
    let out = out_ref(out, "out")?;
    *out = ptr::null_mut();
    *out = Box::into_raw(Box::new(GkInstance(core(mtx)?)));
    Ok(())
}

/// Real `m × n` instance from `m*n` row-major entries.
///
/// # Safety
/// `entries` must hold `m*n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_instance_new_real(m: usize, n: usize, entries: *const f64, out: *mut *mut GkInstance) -> GkStatus {
    guard(|| {
        let len = m.checked_mul(n).ok_or((GkStatus::InvalidArgument, "m*n overflows".into()))?;
        let a = slice(entries, len, "entries")?;
        let rows: Vec<Vec<f64>> = if n == 0 { Vec::new() } else { a.chunks(n).map(<[f64]>::to_vec).collect() };
        store_instance(out, ProblemInstance::from_real(&rows))
    })
}

/// Complex `m × n` instance from `2*m*n` doubles: row-major `(re, im)` pairs.
///
/// # Safety
/// `re_im` must hold `2*m*n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_instance_new_complex(m: usize, n: usize, re_im: *const f64, out: *mut *mut GkInstance) -> GkStatus {
    guard(|| {
        let len = m
            .checked_mul(n)
            .and_then(|l| l.checked_mul(2))
            .ok_or((GkStatus::InvalidArgument, "m*n overflows".into()))?;
        let a = slice(re_im, len, "re_im")?;
        let rows: Vec<Vec<Complex64>> = if n == 0 {
            Vec::new()
        } else {
            a.chunks(2 * n)
                .map(|r| r.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
                .collect()
        };
        store_instance(out, ProblemInstance::new(rows, Field::Complex))
    })
}

/// Instance from the JSON instance format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_instance_from_json(json: *const c_char, out: *mut *mut GkInstance) -> GkStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (GkStatus::InvalidUtf8, e.to_string()))?;
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| (GkStatus::InvalidArgument, e.to_string()))?;
        core(gk_core::schema::validate(gk_core::schema::SchemaKind::Instance, &value))?;
        store_instance(out, ProblemInstance::from_json(value))
    })
}

/// # Safety
/// `p` must be null or a live instance handle.
#[no_mangle]
pub unsafe extern "C" fn gk_instance_free(p: *mut GkInstance) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live handle; `m`, `n` and `field` may each be null.
#[no_mangle]
pub unsafe extern "C" fn gk_instance_shape(p: *const GkInstance, m: *mut usize, n: *mut usize, field: *mut GkField) -> GkStatus {
    guard(|| {
        let p = in_ref(p, "instance")?;
        if let Some(m) = m.as_mut() {
            *m = p.0.m();
        }
        if let Some(n) = n.as_mut() {
            *n = p.0.n();
        }
        if let Some(f) = field.as_mut() {
            *f = p.0.field().into();
        }
        Ok(())
    })
}

/// Discrete optimum: exact for real instances (up to 30 columns), phase
/// grid or multistart for complex ones.
///
/// # Safety
/// `p` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_discrete_opt(p: *const GkInstance, starts: usize, seed: u64, value: *mut f64) -> GkStatus {
    guard(|| {
        let p = in_ref(p, "instance")?;
        *out_ref(value, "value")? = core(solver::discrete_opt(&p.0, starts, seed))?.value;
        Ok(())
    })
}

/// Best unit-vector relaxation value over `starts` seeded starts.
///
/// # Safety
/// `p` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_relaxation_opt(p: *const GkInstance, starts: usize, seed: u64, value: *mut f64) -> GkStatus {
    guard(|| {
        let p = in_ref(p, "instance")?;
        *out_ref(value, "value")? = core(solver::relaxation_opt(&p.0, solver::DEFAULT_ITERS, starts, seed))?.value;
        Ok(())
    })
}

/// Relaxation, embedding and Gaussian sign rounding with `samples` draws.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gk_round(p: *const GkInstance, samples: usize, starts: usize, seed: u64, out: *mut GkRoundSummary) -> GkStatus {
    guard(|| {
        let p = in_ref(p, "instance")?;
        let out = out_ref(out, "out")?;
        let r = core(rounding::rounding_certificate(&p.0, samples, starts, seed))?;
        *out = GkRoundSummary {
            relaxation_value: r.relaxation_value,
            expected_mean: r.expected_mean,
            mean_value: r.mean_value,
            std_error: r.std_error,
            best_value: r.best.value,
            clip_magnitude: r.clip_magnitude,
            ok: r.ok as i32,
        };
        Ok(())
    })
}

/// Full solve report (discrete, relaxation and ratio) as JSON.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable. Free the string with
/// `gk_string_free`.
#[no_mangle]
pub unsafe extern "C" fn gk_solve_json(p: *const GkInstance, starts: usize, seed: u64, out: *mut *mut c_char) -> GkStatus {
    guard(|| {
        let p = in_ref(p, "instance")?;
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = RunConfig {
            starts,
            seed,
            ..RunConfig::default()
        };
        core(cfg.validate())?;
        let r = core(cli::solve(&p.0, Mode::Both, &cfg))?;
        let text = serde_json::to_string(&r).map_err(|e| (GkStatus::Numerical, e.to_string()))?;
        *out = into_c_string(text)?;
        Ok(())
    })
}
