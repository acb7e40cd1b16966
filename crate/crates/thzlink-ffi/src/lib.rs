//! C ABI for the link simulator.
//!
//! Conventions:
//! - Every fallible call returns a `ThzStatus` code; `THZ_OK` (0) means
//!   success. On failure a human-readable message is stored per thread and
//!   can be read with [`thz_last_error_message`].
//! - `ThzConfig` and `ThzSweepResult` are opaque handles owned by the
//!   library; release them with the matching `*_free` function. Passing a
//!   handle to any call after freeing it is undefined behaviour, as in any
//!   C API.
//! - All `char*` arguments are NUL-terminated UTF-8. Strings returned by
//!   the library are freed with [`thz_string_free`].
//! - No call panics across the boundary: internal panics are caught and
//!   reported as `THZ_ERR_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use thzlink::error::SimError;
use thzlink::harness::{run_sweep, LinkConfig, SweepResult};
use thzlink::impairments::{required_backoff, PaModel};
use thzlink::modulation::Modulation;
use thzlink::numerology::Numerology;
use thzlink::waveform::Waveform;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThzStatus {
    /// Success.
    ThzOk = 0,
    /// I/O failure.
    ThzErrIo = 1,
    /// Invalid configuration or argument.
    ThzErrConfig = 2,
    /// Numerical breakdown, estimation failure, or infeasible search.
    ThzErrNumerical = 3,
    /// A required pointer argument was NULL.
    ThzErrNull = 4,
    /// A string argument was not valid UTF-8.
    ThzErrUtf8 = 5,
    /// An index was out of range.
    ThzErrRange = 6,
    /// Internal error (caught panic).
    ThzErrInternal = 7,
}

/// One measured point of a BLER sweep.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct ThzSnrPoint {
    pub snr_db: f64,
    pub blocks: u64,
    pub errors: u64,
    pub numerical_failures: u64,
    pub bler: f64,
}

/// Result of a PA back-off search.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct ThzBackoffResult {
    pub backoff_db: f64,
    pub evm_pct: f64,
    pub aclr_db: f64,
}

/// Opaque link configuration handle.
pub struct ThzConfig {
    inner: LinkConfig,
}

/// Opaque sweep result handle.
pub struct ThzSweepResult {
    inner: SweepResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = owned);
}

fn status_of(err: &SimError) -> ThzStatus {
    match err {
        SimError::InvalidConfig(_) | SimError::InvalidArgument(_) => ThzStatus::ThzErrConfig,
        SimError::EstimationFailed(_) | SimError::Infeasible(_) | SimError::Numerical(_) => {
            ThzStatus::ThzErrNumerical
        }
        SimError::Io(_) => ThzStatus::ThzErrIo,
    }
}

fn fail(err: SimError) -> ThzStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// Run `f` with panics converted to `THZ_ERR_INTERNAL`.
fn guarded(f: impl FnOnce() -> ThzStatus) -> ThzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            ThzStatus::ThzErrInternal
        }
    }
}

/// # Safety
/// `s` must be a valid NUL-terminated string or NULL.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, ThzStatus> {
    if s.is_null() {
        set_error("NULL string argument");
        return Err(ThzStatus::ThzErrNull);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        ThzStatus::ThzErrUtf8
    })
}

macro_rules! not_null {
    ($p:expr) => {
        if $p.is_null() {
            set_error(concat!("NULL pointer argument: ", stringify!($p)));
            return ThzStatus::ThzErrNull;
        }
    };
}

/// Message of the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn thz_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version ("major.minor.patch"); a static string, never freed.
#[no_mangle]
pub extern "C" fn thz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parse a TOML link configuration. On success `*out` owns the handle.
///
/// # Safety
/// `toml_text` must be NUL-terminated; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_config_parse(
    toml_text: *const c_char,
    out: *mut *mut ThzConfig,
) -> ThzStatus {
    guarded(|| {
        not_null!(out);
        let text = match read_str(toml_text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match LinkConfig::from_toml_str(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(ThzConfig { inner: cfg }));
                ThzStatus::ThzOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Apply one dotted-path override, e.g. key `waveform.modulation`,
/// value `64qam`. The value is parsed as a TOML literal, falling back to
/// a string, so `960`, `true` and `sc-fdma` all work unquoted.
///
/// # Safety
/// `cfg` must be a live handle; `key`/`value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn thz_config_set(
    cfg: *mut ThzConfig,
    key: *const c_char,
    value: *const c_char,
) -> ThzStatus {
    guarded(|| {
        not_null!(cfg);
        let (key, value) = match (read_str(key), read_str(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        let current = (*cfg).inner.to_toml_string();
        let assignment = format!("{key}={value}");
        match LinkConfig::from_toml_str_with_overrides(&current, &[assignment]) {
            Ok(updated) => {
                (*cfg).inner = updated;
                ThzStatus::ThzOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Render the resolved configuration as TOML into a newly allocated
/// string; release it with `thz_string_free`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_config_to_toml(
    cfg: *const ThzConfig,
    out: *mut *mut c_char,
) -> ThzStatus {
    guarded(|| {
        not_null!(cfg);
        not_null!(out);
        let text = (*cfg).inner.to_toml_string();
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                ThzStatus::ThzOk
            }
            Err(_) => {
                set_error("config rendering contained an interior NUL");
                ThzStatus::ThzErrInternal
            }
        }
    })
}

/// Release a configuration handle. NULL is a no-op.
///
/// # Safety
/// `cfg` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn thz_config_free(cfg: *mut ThzConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Release a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must come from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn thz_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Run the configured BLER-vs-SNR sweep. Blocking; on success `*out`
/// owns the result handle.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_sweep_run(
    cfg: *const ThzConfig,
    out: *mut *mut ThzSweepResult,
) -> ThzStatus {
    guarded(|| {
        not_null!(cfg);
        not_null!(out);
        match run_sweep(&(*cfg).inner) {
            Ok(res) => {
                *out = Box::into_raw(Box::new(ThzSweepResult { inner: res }));
                ThzStatus::ThzOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of measured SNR points in a sweep result.
///
/// # Safety
/// `res` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn thz_sweep_num_points(res: *const ThzSweepResult) -> usize {
    if res.is_null() {
        return 0;
    }
    let res = &*res;
    res.inner.points.len()
}

/// Copy point `index` into `*out`.
///
/// # Safety
/// `res` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_sweep_point(
    res: *const ThzSweepResult,
    index: usize,
    out: *mut ThzSnrPoint,
) -> ThzStatus {
    guarded(|| {
        not_null!(res);
        not_null!(out);
        let res = &*res;
        match res.inner.points.get(index) {
            Some(p) => {
                *out = ThzSnrPoint {
                    snr_db: p.snr_db,
                    blocks: p.blocks,
                    errors: p.errors,
                    numerical_failures: p.numerical_failures,
                    bler: p.bler(),
                };
                ThzStatus::ThzOk
            }
            None => {
                set_error("point index out of range");
                ThzStatus::ThzErrRange
            }
        }
    })
}

/// Required SNR (dB) to reach the 10% BLER target. Writes NaN and sets
/// `*achieved = false` when the sweep never crossed the target (error
/// floor).
///
/// # Safety
/// `res` must be a live handle; `out`/`achieved` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn thz_sweep_required_snr(
    res: *const ThzSweepResult,
    out: *mut f64,
    achieved: *mut bool,
) -> ThzStatus {
    guarded(|| {
        not_null!(res);
        not_null!(out);
        not_null!(achieved);
        match (*res).inner.required_snr_db {
            Some(v) => {
                *out = v;
                *achieved = true;
            }
            None => {
                *out = f64::NAN;
                *achieved = false;
            }
        }
        ThzStatus::ThzOk
    })
}

/// Release a sweep result handle. NULL is a no-op.
///
/// # Safety
/// `res` must be a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn thz_sweep_free(res: *mut ThzSweepResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Smallest PA back-off (dB) meeting the ACLR limit and the
/// modulation's EVM limit, for `waveform` ("ofdm" or "sc-fdma") and
/// `modulation` ("qpsk", "16qam", "64qam", "256qam") on a Rapp PA with
/// smoothness `smoothness_p`, probing `slots` slots of random data.
///
/// # Safety
/// `waveform`/`modulation` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_required_backoff(
    waveform: *const c_char,
    modulation: *const c_char,
    scs_khz: u32,
    prb_count: usize,
    smoothness_p: f64,
    slots: usize,
    seed: u64,
    out: *mut ThzBackoffResult,
) -> ThzStatus {
    guarded(|| {
        not_null!(out);
        let (wf, md) = match (read_str(waveform), read_str(modulation)) {
            (Ok(w), Ok(m)) => (w, m),
            (Err(code), _) | (_, Err(code)) => return code,
        };
        let result = (|| {
            let wf = Waveform::parse(wf)?;
            let md = Modulation::parse(md)?;
            let num = Numerology::derive(scs_khz, prb_count)?;
            let pa = PaModel::Rapp { smoothness_p, sat_amplitude: 1.0 };
            required_backoff(wf, md, &num, &pa, slots, seed)
        })();
        match result {
            Ok(r) => {
                *out = ThzBackoffResult {
                    backoff_db: r.backoff_db,
                    evm_pct: r.evm_pct,
                    aclr_db: r.aclr_db,
                };
                ThzStatus::ThzOk
            }
            Err(e) => fail(e),
        }
    })
}
