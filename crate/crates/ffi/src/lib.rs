//! C ABI over `mbl_otto`. Configurations and results are opaque handles;
//! every fallible call returns an [`MblStatus`] and leaves a message for
//! [`mbl_last_error`] on failure. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mbl_otto::analytics::{self, PowerInput, PredictionInput};
use mbl_otto::ensemble::{self, EngineVariant, EnsembleRun, RunConfig};
use mbl_otto::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MblStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numeric = 3,
    Statistics = 4,
    Resource = 5,
    State = 6,
    Domain = 7,
    Singularity = 8,
    FailureThreshold = 9,
    Io = 10,
    Panic = 11,
}

/// Engine variant selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MblVariant {
    Standard = 0,
    EqualDisorder = 1,
    Bandwidth = 2,
}

/// Opaque ensemble configuration.
pub struct MblRunConfig(RunConfig);

/// Opaque ensemble result.
pub struct MblEnsembleResult(EnsembleRun);

/// Disorder-averaged values at one grid point. Standard errors are NaN when
/// undefined; `eta` is NaN when the mean of Q4 is not positive.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MblGridPoint {
    pub wb: f64,
    pub beta_c: f64,
    pub beta_h: f64,
    pub speed: f64,
    pub realizations: usize,
    pub w1: f64,
    pub q2: f64,
    pub w3: f64,
    pub q4: f64,
    pub w_tot: f64,
    pub w_tot_stderr: f64,
    pub eta: f64,
    pub eta_stderr: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MblPredictionInput {
    pub wb: f64,
    /// May be INFINITY.
    pub beta_c: f64,
    pub beta_h: f64,
    pub mean_gap: f64,
    pub sites: usize,
    pub eps: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MblPrediction {
    pub q2: f64,
    pub q2_leading: f64,
    pub q4: f64,
    pub w_tot: f64,
    pub eta: f64,
    pub eta_hot_corrected: f64,
    /// 1 when every regime condition holds.
    pub regime_ok: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MblPowerInput {
    pub eps_ev: f64,
    pub subengine_sites: usize,
    pub pitch_nm: f64,
    pub wb_fraction: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MblPowerEstimate {
    pub mean_gap_ev: f64,
    pub wb_ev: f64,
    pub tau_cycle_s: f64,
    pub power_w: f64,
    pub power_density_w_per_m3: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MblStatus {
    match e {
        Error::Parameter(_) => MblStatus::InvalidArgument,
        Error::Numeric { .. } => MblStatus::Numeric,
        Error::State(_) => MblStatus::State,
        Error::Statistics(_) => MblStatus::Statistics,
        Error::Resource(_) => MblStatus::Resource,
        Error::Domain(_) => MblStatus::Domain,
        Error::Singularity(_) => MblStatus::Singularity,
        Error::FailureThreshold { .. } => MblStatus::FailureThreshold,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => MblStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, turning errors and panics into a status plus a message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MblStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MblStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MblStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            MblStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mbl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mbl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration with defaults (h: 2 to 20, W_b = <delta>/16, beta_C = inf,
/// beta_H = 0, adiabatic, standard engine).
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`mbl_run_config_free`].
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_new(
    sites: usize,
    realizations: usize,
    master_seed: u64,
    out: *mut *mut MblRunConfig,
) -> MblStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let c = RunConfig::new(sites, realizations, master_seed);
        c.validate()?;
        *out = Box::into_raw(Box::new(MblRunConfig(c)));
        Ok(())
    })
}

/// Parses a configuration from the JSON form echoed in artifacts.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_from_json(json: *const c_char, out: *mut *mut MblRunConfig) -> MblStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Error::param(format!("invalid UTF-8: {e}")))?;
        let c: RunConfig = serde_json::from_str(text).map_err(Error::from)?;
        c.validate()?;
        *out = Box::into_raw(Box::new(MblRunConfig(c)));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_free(config: *mut MblRunConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets the disorder strengths at the two ends of the tuning.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_set_disorder(config: *mut MblRunConfig, h_eth: f64, h_mbl: f64) -> MblStatus {
    guard(|| {
        let c = &mut as_mut(config, "config")?.0;
        let mut next = c.clone();
        next.h_eth = h_eth;
        next.h_mbl = h_mbl;
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// Sets the cycle: W_b as a fraction of the mean gap, bath inverse
/// temperatures (beta_c may be INFINITY) and tuning speed (0 = adiabatic).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_set_cycle(
    config: *mut MblRunConfig,
    wb_fraction: f64,
    beta_c: f64,
    beta_h: f64,
    speed: f64,
) -> MblStatus {
    guard(|| {
        let c = &mut as_mut(config, "config")?.0;
        let mut next = c.clone();
        next.cycle.wb = wb_fraction;
        next.cycle.wb_absolute = false;
        next.cycle.beta_c = beta_c;
        next.cycle.beta_h = beta_h;
        next.cycle.speed = speed;
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mbl_run_config_set_variant(config: *mut MblRunConfig, variant: MblVariant) -> MblStatus {
    guard(|| {
        let c = &mut as_mut(config, "config")?.0;
        let mut next = c.clone();
        next.variant = match variant {
            MblVariant::Standard => EngineVariant::Standard,
            MblVariant::EqualDisorder => EngineVariant::EqualDisorder,
            MblVariant::Bandwidth => EngineVariant::Bandwidth,
        };
        next.validate()?;
        *c = next;
        Ok(())
    })
}

/// Runs the ensemble on `threads` workers (0: all cores).
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer; the result is
/// released with [`mbl_result_free`].
#[no_mangle]
pub unsafe extern "C" fn mbl_run_ensemble(
    config: *const MblRunConfig,
    threads: usize,
    out: *mut *mut MblEnsembleResult,
) -> MblStatus {
    guard(|| {
        let c = &as_ref(config, "config")?.0;
        let out = as_mut(out, "out")?;
        let threads = (threads > 0).then_some(threads);
        let run = ensemble::with_threads(threads, || ensemble::run_ensemble(c))??;
        *out = Box::into_raw(Box::new(MblEnsembleResult(run)));
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mbl_result_free(result: *mut MblEnsembleResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of grid points, or 0 for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mbl_result_len(result: *const MblEnsembleResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.summary.points.len())
}

/// Ensemble mean gap, or NaN for NULL.
///
/// # Safety
/// `result` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mbl_result_mean_gap(result: *const MblEnsembleResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.summary.metadata.mean_gap)
}

/// Copies grid point `index` into `out`.
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbl_result_point(
    result: *const MblEnsembleResult,
    index: usize,
    out: *mut MblGridPoint,
) -> MblStatus {
    guard(|| {
        let r = &as_ref(result, "result")?.0;
        let out = as_mut(out, "out")?;
        let p = r
            .summary
            .points
            .get(index)
            .ok_or_else(|| Error::param(format!("grid point {index} out of range")))?;
        *out = MblGridPoint {
            wb: p.wb,
            beta_c: p.beta_c,
            beta_h: p.beta_h,
            speed: p.speed,
            realizations: p.realizations,
            w1: p.w1.mean,
            q2: p.q2.mean,
            w3: p.w3.mean,
            q4: p.q4.mean,
            w_tot: p.w_tot.mean,
            w_tot_stderr: p.w_tot.stderr.unwrap_or(f64::NAN),
            eta: p.eta.map_or(f64::NAN, |e| e.mean),
            eta_stderr: p.eta.and_then(|e| e.stderr).unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Full summary as JSON; release with [`mbl_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbl_result_to_json(result: *const MblEnsembleResult, out: *mut *mut c_char) -> MblStatus {
    guard(|| {
        let r = &as_ref(result, "result")?.0;
        let out = as_mut(out, "out")?;
        let text = serde_json::to_string(&r.summary).map_err(Error::from)?;
        *out = CString::new(text).map_err(|e| Error::State(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mbl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Closed-form work, heat and efficiency of the adiabatic engine.
///
/// # Safety
/// `input` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mbl_predict_cycle(input: *const MblPredictionInput, out: *mut MblPrediction) -> MblStatus {
    guard(|| {
        let i = as_ref(input, "input")?;
        let out = as_mut(out, "out")?;
        let p = analytics::predicted_cycle(&PredictionInput {
            wb: i.wb,
            beta_c: i.beta_c,
            beta_h: i.beta_h,
            mean_gap: i.mean_gap,
            sites: i.sites,
            eps: i.eps,
        })?;
        *out = MblPrediction {
            q2: p.q2,
            q2_leading: p.q2_leading,
            q4: p.q4,
            w_tot: p.w_tot,
            eta: p.eta,
            eta_hot_corrected: p.eta_hot_corrected,
            regime_ok: p.regime_ok as i32,
        };
        Ok(())
    })
}

/// Fills `out` with the phosphorus-in-silicon platform parameters.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mbl_power_input_si_p(out: *mut MblPowerInput) -> MblStatus {
    guard(|| {
        let p = PowerInput::silicon_phosphorus();
        *as_mut(out, "out")? = MblPowerInput {
            eps_ev: p.eps_ev,
            subengine_sites: p.subengine_sites,
            pitch_nm: p.pitch_nm,
            wb_fraction: p.wb_fraction,
        };
        Ok(())
    })
}

/// Order-of-magnitude power of a platform.
///
/// # Safety
/// `input` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mbl_power_estimate(input: *const MblPowerInput, out: *mut MblPowerEstimate) -> MblStatus {
    guard(|| {
        let i = as_ref(input, "input")?;
        let out = as_mut(out, "out")?;
        let e = analytics::power_estimate(&PowerInput {
            eps_ev: i.eps_ev,
            subengine_sites: i.subengine_sites,
            pitch_nm: i.pitch_nm,
            wb_fraction: i.wb_fraction,
        })?;
        *out = MblPowerEstimate {
            mean_gap_ev: e.mean_gap_ev,
            wb_ev: e.wb_ev,
            tau_cycle_s: e.tau_cycle_s,
            power_w: e.power_w,
            power_density_w_per_m3: e.power_density_w_per_m3,
        };
        Ok(())
    })
}
