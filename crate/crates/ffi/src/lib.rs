//! C ABI over `spinsqueeze`. Every fallible call returns an `SsStatus`; on
//! failure `ss_last_error_message` describes the most recent error on the
//! calling thread. Handles are opaque and owned by the caller, who releases
//! them with the matching `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spinsqueeze::experiments::{preset, run_scenario, Scenario, ScenarioResult, ShotNoise};
use spinsqueeze::tomography::{self, CharacteristicGrid, ProbeParams, SplittingModel, WignerGrid};
use spinsqueeze::{Error, C64};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    UnknownPreset = 4,
    InvalidArgument = 5,
    Numerical = 6,
    NotFound = 7,
    Io = 8,
    Panic = 9,
}

pub struct SsScenario(Scenario);
pub struct SsResult(ScenarioResult);
pub struct SsWigner(WignerGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e.root() {
        Error::Config { .. } | Error::UnsupportedFormat(_) => SsStatus::Config,
        Error::UnknownPreset(_) => SsStatus::UnknownPreset,
        Error::StepUnderflow { .. } | Error::NoConvergence(_) | Error::Truncation(_) => SsStatus::Numerical,
        Error::Io(_) => SsStatus::Io,
        _ => SsStatus::InvalidArgument,
    }
}

struct Fail(SsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            SsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(SsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SsStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn writable<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    match (p.is_null(), n) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(null(what)),
        _ => Ok(std::slice::from_raw_parts(p, n)),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_from_preset(name: *const c_char, out: *mut *mut SsScenario) -> SsStatus {
    guard(|| {
        let slot = writable(out, "out")?;
        let s = preset(text(name, "name")?)?;
        s.validate()?;
        *slot = Box::into_raw(Box::new(SsScenario(s)));
        Ok(())
    })
}

/// Scenario from TOML text in the command-line config format.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_from_toml(toml: *const c_char, out: *mut *mut SsScenario) -> SsStatus {
    guard(|| {
        let slot = writable(out, "out")?;
        let s = spinsqueeze::cli::scenario_from_str(text(toml, "toml")?)?;
        *slot = Box::into_raw(Box::new(SsScenario(s)));
        Ok(())
    })
}

/// Enables binomial shot noise; `shots == 0` turns it off.
///
/// # Safety
/// `scn` must come from an `ss_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_set_noise(scn: *mut SsScenario, shots: u32, seed: u64) -> SsStatus {
    guard(|| {
        let s = writable(scn, "scenario")?;
        s.0.noise = (shots > 0).then_some(ShotNoise { shots, seed });
        Ok(())
    })
}

/// # Safety
/// `scn` must be NULL or come from an `ss_scenario_*` constructor, and is
/// invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_scenario_free(scn: *mut SsScenario) {
    if !scn.is_null() {
        drop(Box::from_raw(scn));
    }
}

/// Runs the scenario to completion (seconds to minutes).
///
/// # Safety
/// `scn` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_run(scn: *const SsScenario, out: *mut *mut SsResult) -> SsStatus {
    guard(|| {
        let slot = writable(out, "out")?;
        let s = scn.as_ref().ok_or_else(|| null("scenario"))?;
        *slot = Box::into_raw(Box::new(SsResult(run_scenario(&s.0)?)));
        Ok(())
    })
}

/// Summary quantity by name; `sigma` may be NULL.
///
/// # Safety
/// `res` must be a live result handle, `name` NUL-terminated, `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_result_quantity(
    res: *const SsResult,
    name: *const c_char,
    value: *mut f64,
    sigma: *mut f64,
) -> SsStatus {
    guard(|| {
        let r = res.as_ref().ok_or_else(|| null("result"))?;
        let n = text(name, "name")?;
        let v = writable(value, "value")?;
        let q = r.0.quantity(n).ok_or_else(|| Fail(SsStatus::NotFound, format!("no quantity `{n}` in result")))?;
        *v = q.value;
        if let Some(s) = sigma.as_mut() {
            *s = q.sigma;
        }
        Ok(())
    })
}

/// Whole result as JSON; release the string with `ss_string_free`.
///
/// # Safety
/// `res` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_result_json(res: *const SsResult, out: *mut *mut c_char) -> SsStatus {
    guard(|| {
        let slot = writable(out, "out")?;
        let r = res.as_ref().ok_or_else(|| null("result"))?;
        let js = serde_json::to_string(&r.0).map_err(|e| Fail(SsStatus::Io, e.to_string()))?;
        *slot = CString::new(js).map_err(|e| Fail(SsStatus::Io, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `res` must be NULL or a result handle, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_result_free(res: *mut SsResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ss_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// W(x, p) from χ sampled on a uniform `n_re × n_im` grid. `chi` holds
/// interleaved (re, im) pairs, row-major with Im β as the slow index.
///
/// # Safety
/// Arrays must hold `n_re`, `n_im` and `2·n_re·n_im` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_wigner_from_chi(
    beta_re: *const f64,
    n_re: usize,
    beta_im: *const f64,
    n_im: usize,
    chi: *const f64,
    pad: usize,
    out: *mut *mut SsWigner,
) -> SsStatus {
    guard(|| {
        let slot = writable(out, "out")?;
        let re = slice(beta_re, n_re, "beta_re")?;
        let im = slice(beta_im, n_im, "beta_im")?;
        let n = n_re
            .checked_mul(n_im)
            .and_then(|n| n.checked_mul(2))
            .ok_or_else(|| Fail(SsStatus::InvalidArgument, "grid too large".into()))?;
        let z = slice(chi, n, "chi")?;
        let grid = CharacteristicGrid {
            beta_re: re.to_vec(),
            beta_im: im.to_vec(),
            values: z.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect(),
        };
        grid.validate()?;
        *slot = Box::into_raw(Box::new(SsWigner(tomography::wigner_from_characteristic(&grid, pad)?)));
        Ok(())
    })
}

/// # Safety
/// `w` must be a live Wigner handle; `nx`, `np` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_wigner_dims(w: *const SsWigner, nx: *mut usize, np: *mut usize) -> SsStatus {
    guard(|| {
        let g = &w.as_ref().ok_or_else(|| null("wigner"))?.0;
        *writable(nx, "nx")? = g.x.len();
        *writable(np, "np")? = g.p.len();
        Ok(())
    })
}

/// Copies the axes and values (row-major, p slow). Any output may be NULL.
///
/// # Safety
/// Non-NULL outputs must hold nx, np and nx·np doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn ss_wigner_copy(w: *const SsWigner, x: *mut f64, p: *mut f64, values: *mut f64) -> SsStatus {
    guard(|| {
        let g = &w.as_ref().ok_or_else(|| null("wigner"))?.0;
        for (dst, src) in [(x, &g.x), (p, &g.p), (values, &g.values)] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
            }
        }
        Ok(())
    })
}

/// # Safety
/// `w` must be NULL or a Wigner handle, and is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_wigner_free(w: *mut SsWigner) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// 10·log₁₀(e^{2r}).
#[no_mangle]
pub extern "C" fn ss_squeezing_db(r: f64) -> f64 {
    tomography::squeezing_db(r)
}

/// Closed-form probe splitting p↓(t) of a squeezed thermal state under a
/// resonant probe of rate `strength` (rad/s) and motional phase `phase`.
///
/// # Safety
/// `durations` and `p_down` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_analytic_splitting(
    r: f64,
    theta: f64,
    nbar: f64,
    contrast: f64,
    strength: f64,
    phase: f64,
    durations: *const f64,
    n: usize,
    p_down: *mut f64,
) -> SsStatus {
    guard(|| {
        let t = slice(durations, n, "durations")?;
        if n > 0 && p_down.is_null() {
            return Err(null("p_down"));
        }
        let model = SplittingModel { r, theta, nbar, contrast };
        let probe = ProbeParams::new(strength, phase, t.to_vec());
        let p = tomography::analytic_splitting(&model, &probe)?;
        if n > 0 {
            ptr::copy_nonoverlapping(p.as_ptr(), p_down, n);
        }
        Ok(())
    })
}
