//! C ABI for the simulator: an opaque scenario handle configured with the
//! same key=value settings as the CLI and config file, plus a blocking
//! simulate call returning plain-old-data metrics.
//!
//! Error reporting: every fallible call returns an `AxsimStatus`; the
//! accompanying message is kept per thread and read back with
//! `axsim_last_error`. Handles are not thread-safe; run concurrent
//! scenarios on separate handles.

use std::cell::RefCell;
use std::ffi::CStr;
use std::ptr;

use libc::{c_char, size_t};

use axsim::config::RunSpec;
use axsim::SimError;

/// Opaque scenario under construction.
pub struct AxsimScenario {
    spec: RunSpec,
}

/// Status codes mirroring the simulator's error classes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AxsimStatus {
    AxsimOk = 0,
    AxsimErrInvalidArgument = 1,
    AxsimErrInvalidConfig = 2,
    AxsimErrChannelUnusable = 3,
    AxsimErrTable = 4,
    AxsimErrNonTerminating = 5,
    AxsimErrIo = 6,
}

/// Scenario metrics, plain old data.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct AxsimMetrics {
    pub goodput_mbps: f64,
    pub mean_txop_ms: f64,
    pub txop_p95_ms: f64,
    pub mean_dl_cycles: f64,
    pub goodput_stderr_mbps: f64,
    pub dl_mcs: u8,
    pub ul_mcs: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_for(err: &SimError) -> AxsimStatus {
    match err {
        SimError::McsOutOfRange(_) | SimError::InvalidConfig(_) => AxsimStatus::AxsimErrInvalidConfig,
        SimError::ChannelUnusable(_) | SimError::DegenerateChannel => {
            AxsimStatus::AxsimErrChannelUnusable
        }
        SimError::TableSchema(_) | SimError::TableValidation(_) => AxsimStatus::AxsimErrTable,
        SimError::NonTerminating(_) => AxsimStatus::AxsimErrNonTerminating,
        SimError::Io(_) => AxsimStatus::AxsimErrIo,
    }
}

fn fail(err: SimError) -> AxsimStatus {
    let status = status_for(&err);
    set_error(err.to_string());
    status
}

fn invalid_argument(msg: &str) -> AxsimStatus {
    set_error(msg.to_string());
    AxsimStatus::AxsimErrInvalidArgument
}

/// New scenario with default settings. Free with `axsim_scenario_free`.
#[no_mangle]
pub extern "C" fn axsim_scenario_new() -> *mut AxsimScenario {
    Box::into_raw(Box::new(AxsimScenario {
        spec: RunSpec::default(),
    }))
}

/// # Safety
/// `scenario` must be a pointer from `axsim_scenario_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn axsim_scenario_free(scenario: *mut AxsimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        return None;
    }
    CStr::from_ptr(p).to_str().ok()
}

/// Apply one key=value setting (same keys as the CLI flags and config
/// file, e.g. "strategy", "load", "snr", "mcs", "tf-bytes").
///
/// # Safety
/// `scenario` must be a live handle; `key` and `value` must be
/// NUL-terminated UTF-8 strings.
#[no_mangle]
pub unsafe extern "C" fn axsim_scenario_set(
    scenario: *mut AxsimScenario,
    key: *const c_char,
    value: *const c_char,
) -> AxsimStatus {
    let Some(scenario) = scenario.as_mut() else {
        return invalid_argument("null scenario handle");
    };
    let (Some(key), Some(value)) = (cstr(key), cstr(value)) else {
        return invalid_argument("key/value must be valid UTF-8 C strings");
    };
    match scenario.spec.apply_kv(key, value) {
        Ok(()) => AxsimStatus::AxsimOk,
        Err(e) => fail(e),
    }
}

/// Load a flat key=value config file into the scenario, overriding any
/// settings already applied.
///
/// # Safety
/// `scenario` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn axsim_scenario_load_file(
    scenario: *mut AxsimScenario,
    path: *const c_char,
) -> AxsimStatus {
    let Some(scenario) = scenario.as_mut() else {
        return invalid_argument("null scenario handle");
    };
    let Some(path) = cstr(path) else {
        return invalid_argument("path must be a valid UTF-8 C string");
    };
    match RunSpec::from_file(std::path::Path::new(path)) {
        Ok(spec) => {
            scenario.spec = spec;
            AxsimStatus::AxsimOk
        }
        Err(e) => fail(e),
    }
}

/// Run the scenario and fill `out`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn axsim_simulate(
    scenario: *const AxsimScenario,
    out: *mut AxsimMetrics,
) -> AxsimStatus {
    let Some(scenario) = scenario.as_ref() else {
        return invalid_argument("null scenario handle");
    };
    if out.is_null() {
        return invalid_argument("null metrics pointer");
    }
    let result = scenario
        .spec
        .resolve()
        .and_then(|cfg| axsim::simulate(&cfg));
    match result {
        Ok(r) => {
            ptr::write(
                out,
                AxsimMetrics {
                    goodput_mbps: r.metrics.goodput_mbps,
                    mean_txop_ms: r.metrics.mean_txop_ms,
                    txop_p95_ms: r.metrics.txop_p95_ms,
                    mean_dl_cycles: r.metrics.mean_dl_cycles,
                    goodput_stderr_mbps: r.metrics.goodput_stderr_mbps,
                    dl_mcs: r.dl_mcs,
                    ul_mcs: r.ul_mcs,
                },
            );
            AxsimStatus::AxsimOk
        }
        Err(e) => fail(e),
    }
}

/// Copy the current thread's last error message (NUL-terminated, possibly
/// truncated) into `buf` and return the untruncated length.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null (length query).
#[no_mangle]
pub unsafe extern "C" fn axsim_last_error(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Stable name for a status code.
#[no_mangle]
pub extern "C" fn axsim_status_name(status: AxsimStatus) -> *const c_char {
    let name: &'static CStr = match status {
        AxsimStatus::AxsimOk => c"ok",
        AxsimStatus::AxsimErrInvalidArgument => c"invalid_argument",
        AxsimStatus::AxsimErrInvalidConfig => c"invalid_config",
        AxsimStatus::AxsimErrChannelUnusable => c"channel_unusable",
        AxsimStatus::AxsimErrTable => c"table",
        AxsimStatus::AxsimErrNonTerminating => c"non_terminating",
        AxsimStatus::AxsimErrIo => c"io",
    };
    name.as_ptr()
}

/// ABI version; bump on any breaking change to this header.
#[no_mangle]
pub extern "C" fn axsim_abi_version() -> u32 {
    1
}
