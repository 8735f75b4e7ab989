//! C ABI for the respn library: opaque handles, integer status codes, and
//! a thread-local last-error message.
//!
//! Every returned string is owned by the caller and must be released with
//! [`respn_string_free`]; handles are released with their matching `_free`
//! function. All functions are panic-safe at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use respn::io;
use respn::model::Net;
use respn::reliability::{device_availability, mission_availability, AvailabilityModel};
use respn::sim::{simulate, Outcome, SimConfig, Trace};
use respn::validate::validate_net;

/// Status code returned by fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RespnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input text was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Document syntax or schema error; see `respn_last_error`.
    ParseError = 3,
    /// The model failed validation; see `respn_last_error`.
    InvalidModel = 4,
    /// The simulation rejected its configuration.
    SimError = 5,
    /// Serialization failed.
    SerializeError = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

/// Opaque net handle.
pub struct RespnNet {
    inner: Net,
}

/// Opaque trace handle.
pub struct RespnTrace {
    inner: Trace,
}

/// Simulation parameters for `respn_simulate`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RespnSimParams {
    pub seed: u64,
    pub max_time: f64,
    pub trajectory_sample_interval: f64,
    pub max_events: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn respn_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded<T>(default: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(v) => v,
        Err(_) => {
            set_error("internal panic");
            default
        }
    }
}

unsafe fn read_utf8<'a>(text: *const c_char) -> Result<&'a str, RespnStatus> {
    if text.is_null() {
        set_error("null text argument");
        return Err(RespnStatus::NullArgument);
    }
    CStr::from_ptr(text).to_str().map_err(|_| {
        set_error("text is not valid UTF-8");
        RespnStatus::InvalidUtf8
    })
}

fn give_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Parses a net document (see docs/pnet-format.md) into a handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn respn_net_parse(
    text: *const c_char,
    out: *mut *mut RespnNet,
) -> RespnStatus {
    guarded(RespnStatus::Panic, || {
        if out.is_null() {
            set_error("null output argument");
            return RespnStatus::NullArgument;
        }
        let text = match read_utf8(text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match io::parse_net(text) {
            Ok(net) => {
                *out = Box::into_raw(Box::new(RespnNet { inner: net }));
                RespnStatus::Ok
            }
            Err(err @ io::IoError::Invalid(_)) => {
                set_error(&err.to_string());
                RespnStatus::InvalidModel
            }
            Err(err) => {
                set_error(&err.to_string());
                RespnStatus::ParseError
            }
        }
    })
}

/// Canonical document text for the net; free with `respn_string_free`.
/// Returns null on error.
#[no_mangle]
pub extern "C" fn respn_net_serialize(net: *const RespnNet) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(net) = (unsafe { net.as_ref() }) else {
            set_error("null net handle");
            return ptr::null_mut();
        };
        match io::serialize_net(&net.inner) {
            Ok(text) => give_string(text),
            Err(err) => {
                set_error(&err.to_string());
                ptr::null_mut()
            }
        }
    })
}

/// Validates the net; `report_json` (optional) receives the full report.
/// Returns `Ok` when valid, `InvalidModel` otherwise.
#[no_mangle]
pub extern "C" fn respn_net_validate(
    net: *const RespnNet,
    report_json: *mut *mut c_char,
) -> RespnStatus {
    guarded(RespnStatus::Panic, || {
        let Some(net) = (unsafe { net.as_ref() }) else {
            set_error("null net handle");
            return RespnStatus::NullArgument;
        };
        let report = validate_net(&net.inner);
        if !report_json.is_null() {
            let text = serde_json::to_string(&report).unwrap_or_default();
            unsafe { *report_json = give_string(text) };
        }
        if report.is_valid() {
            RespnStatus::Ok
        } else {
            set_error(&report.to_string());
            RespnStatus::InvalidModel
        }
    })
}

#[no_mangle]
pub extern "C" fn respn_net_free(net: *mut RespnNet) {
    if !net.is_null() {
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Default simulation parameters: seed 0, horizon 1e6, unit sampling.
#[no_mangle]
pub extern "C" fn respn_sim_params_default() -> RespnSimParams {
    RespnSimParams {
        seed: 0,
        max_time: 1e6,
        trajectory_sample_interval: 1.0,
        max_events: 100_000,
    }
}

/// Runs one deterministic simulation of the net.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn respn_simulate(
    net: *const RespnNet,
    params: RespnSimParams,
    out: *mut *mut RespnTrace,
) -> RespnStatus {
    guarded(RespnStatus::Panic, || {
        if out.is_null() {
            set_error("null output argument");
            return RespnStatus::NullArgument;
        }
        let Some(net) = (unsafe { net.as_ref() }) else {
            set_error("null net handle");
            return RespnStatus::NullArgument;
        };
        let config = SimConfig {
            seed: params.seed,
            max_time: params.max_time,
            policy_override: None,
            trajectory_sample_interval: params.trajectory_sample_interval,
            max_events: params.max_events,
        };
        match simulate(&net.inner, &config) {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(RespnTrace { inner: trace }));
                RespnStatus::Ok
            }
            Err(err) => {
                set_error(&err.to_string());
                RespnStatus::SimError
            }
        }
    })
}

/// Outcome code: 0 success, 1 timeout, 2 deadlock, 3 resource failure,
/// -1 null handle.
#[no_mangle]
pub extern "C" fn respn_trace_outcome(trace: *const RespnTrace) -> i32 {
    let Some(trace) = (unsafe { trace.as_ref() }) else { return -1 };
    match trace.inner.outcome {
        Outcome::Success => 0,
        Outcome::Timeout => 1,
        Outcome::Deadlock => 2,
        Outcome::ResourceFailure => 3,
    }
}

#[no_mangle]
pub extern "C" fn respn_trace_final_time(trace: *const RespnTrace) -> f64 {
    unsafe { trace.as_ref() }.map(|t| t.inner.final_time).unwrap_or(f64::NAN)
}

#[no_mangle]
pub extern "C" fn respn_trace_event_count(trace: *const RespnTrace) -> u64 {
    unsafe { trace.as_ref() }.map(|t| t.inner.events.len() as u64).unwrap_or(0)
}

/// Final level of the named resource; NaN when absent.
///
/// # Safety
/// `resource` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn respn_trace_resource_level(
    trace: *const RespnTrace,
    resource: *const c_char,
) -> f64 {
    guarded(f64::NAN, || {
        let Some(trace) = (unsafe { trace.as_ref() }) else { return f64::NAN };
        let Ok(resource) = (unsafe { read_utf8(resource) }) else { return f64::NAN };
        trace.inner.final_state.resources.get(resource).copied().unwrap_or(f64::NAN)
    })
}

/// Final token count of the named place; -1 when absent.
///
/// # Safety
/// `place` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn respn_trace_token_count(
    trace: *const RespnTrace,
    place: *const c_char,
) -> i64 {
    guarded(-1, || {
        let Some(trace) = (unsafe { trace.as_ref() }) else { return -1 };
        let Ok(place) = (unsafe { read_utf8(place) }) else { return -1 };
        trace.inner.final_state.tokens.get(place).map(|&n| n as i64).unwrap_or(-1)
    })
}

#[no_mangle]
pub extern "C" fn respn_trace_events_csv(trace: *const RespnTrace) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(trace) = (unsafe { trace.as_ref() }) else {
            set_error("null trace handle");
            return ptr::null_mut();
        };
        give_string(io::events_csv(&trace.inner))
    })
}

#[no_mangle]
pub extern "C" fn respn_trace_trajectories_csv(trace: *const RespnTrace) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(trace) = (unsafe { trace.as_ref() }) else {
            set_error("null trace handle");
            return ptr::null_mut();
        };
        give_string(io::trajectories_csv(&trace.inner))
    })
}

#[no_mangle]
pub extern "C" fn respn_trace_timeline_svg(trace: *const RespnTrace) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(trace) = (unsafe { trace.as_ref() }) else {
            set_error("null trace handle");
            return ptr::null_mut();
        };
        give_string(io::timeline_svg(&trace.inner))
    })
}

/// Full trace as JSON (events, trajectory, outcome, final state).
#[no_mangle]
pub extern "C" fn respn_trace_json(trace: *const RespnTrace) -> *mut c_char {
    guarded(ptr::null_mut(), || {
        let Some(trace) = (unsafe { trace.as_ref() }) else {
            set_error("null trace handle");
            return ptr::null_mut();
        };
        give_string(serde_json::to_string(&trace.inner).unwrap_or_default())
    })
}

#[no_mangle]
pub extern "C" fn respn_trace_free(trace: *mut RespnTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// `1 - (1 - p)^k`; returns -1.0 for out-of-range arguments.
#[no_mangle]
pub extern "C" fn respn_device_availability(p: f64, k: u32) -> f64 {
    if !(0.0..=1.0).contains(&p) || k == 0 {
        return -1.0;
    }
    device_availability(p, k)
}

/// Mission availability for an availability-model JSON document.
///
/// # Safety
/// `model_json` must be a valid NUL-terminated string, `out` a valid f64
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn respn_mission_availability(
    model_json: *const c_char,
    out: *mut f64,
) -> RespnStatus {
    guarded(RespnStatus::Panic, || {
        if out.is_null() {
            set_error("null output argument");
            return RespnStatus::NullArgument;
        }
        let text = match read_utf8(model_json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let model: AvailabilityModel = match serde_json::from_str(text) {
            Ok(m) => m,
            Err(err) => {
                set_error(&err.to_string());
                return RespnStatus::ParseError;
            }
        };
        if let Err(err) = model.validate() {
            set_error(&err.to_string());
            return RespnStatus::InvalidModel;
        }
        *out = mission_availability(&model);
        RespnStatus::Ok
    })
}

/// Frees a string returned by this library.
#[no_mangle]
pub extern "C" fn respn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
