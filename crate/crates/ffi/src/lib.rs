//! C interface to `snell-core`.
//!
//! Models live behind the opaque [`SnellModel`] handle. Every fallible call
//! returns a [`SnellStatus`]; on failure, [`snell_last_error_message`] gives
//! a description that stays valid until the next failing call on the same
//! thread. Handles are not synchronized; share one across threads only with
//! external locking.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use snell_core::{
    binomial_kappa, lower_snell, snell_envelope, BinomialParams, Error, Family, LowerSnellResult, Model, Payoff,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnellStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The model or a parameter failed validation.
    Validation = 3,
    /// An enumeration would exceed the configured budget.
    Budget = 4,
    Io = 5,
    /// A node label or member index does not exist.
    NotFound = 6,
    /// The caller's buffer is too short; the required length was written.
    BufferTooSmall = 7,
    /// The library panicked; the handle involved should be freed.
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnellPayoff {
    Put = 0,
    Call = 1,
}

/// Parameters of the binomial model with an up-probability interval.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SnellBinomialParams {
    pub steps: u32,
    pub s0: f64,
    pub up: f64,
    pub down: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub strike: f64,
    pub payoff: SnellPayoff,
}

/// A model together with its lower Snell envelope.
pub struct SnellModel {
    model: Model<f64>,
    lower: LowerSnellResult<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: SnellStatus, message: impl Into<String>) -> SnellStatus {
    set_error(message.into());
    status
}

fn from_core(e: Error) -> SnellStatus {
    let status = match e {
        Error::EnumerationTooLarge { .. } => SnellStatus::Budget,
        Error::Io(_) => SnellStatus::Io,
        Error::UnknownNode(_) => SnellStatus::NotFound,
        _ => SnellStatus::Validation,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`SnellStatus::Internal`].
fn guard(f: impl FnOnce() -> SnellStatus) -> SnellStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(SnellStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SnellStatus> {
    if s.is_null() {
        return Err(fail(SnellStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(SnellStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

unsafe fn handle<'a>(m: *const SnellModel) -> Result<&'a SnellModel, SnellStatus> {
    m.as_ref().ok_or_else(|| fail(SnellStatus::NullPointer, "null model handle"))
}

fn check_out<T>(out: *mut T) -> Result<(), SnellStatus> {
    if out.is_null() {
        Err(fail(SnellStatus::NullPointer, "null output pointer"))
    } else {
        Ok(())
    }
}

unsafe fn publish(model: Model<f64>, out: *mut *mut SnellModel) -> SnellStatus {
    match lower_snell(&model.tree, &model.family, &model.payoff) {
        Ok(lower) => {
            *out = Box::into_raw(Box::new(SnellModel { model, lower }));
            SnellStatus::Ok
        }
        Err(e) => from_core(e),
    }
}

macro_rules! try_ffi {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

/// Parses a model from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer to write to.
#[no_mangle]
pub unsafe extern "C" fn snell_model_from_json(json: *const c_char, out: *mut *mut SnellModel) -> SnellStatus {
    guard(|| {
        try_ffi!(check_out(out));
        let text = try_ffi!(read_str(json));
        match Model::<f64>::from_json(text) {
            Ok(m) => publish(m, out),
            Err(e) => from_core(e),
        }
    })
}

/// Loads a model from a JSON file.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer to write to.
#[no_mangle]
pub unsafe extern "C" fn snell_model_load(path: *const c_char, out: *mut *mut SnellModel) -> SnellStatus {
    guard(|| {
        try_ffi!(check_out(out));
        let path = try_ffi!(read_str(path));
        match snell_core::models::load_model::<f64>(path) {
            Ok(m) => publish(m, out),
            Err(e) => from_core(e),
        }
    })
}

/// Builds the binomial model with up-probability in `[p_lo, p_hi]`.
///
/// # Safety
/// `params` must point to an initialized struct and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn snell_model_binomial(
    params: *const SnellBinomialParams,
    out: *mut *mut SnellModel,
) -> SnellStatus {
    guard(|| {
        try_ffi!(check_out(out));
        let Some(p) = params.as_ref() else {
            return fail(SnellStatus::NullPointer, "null parameters");
        };
        let params = BinomialParams {
            steps: p.steps as usize,
            s0: p.s0,
            up: p.up,
            down: p.down,
            p_lo: p.p_lo,
            p_hi: p.p_hi,
            strike: p.strike,
            payoff: match p.payoff {
                SnellPayoff::Put => Payoff::Put,
                SnellPayoff::Call => Payoff::Call,
            },
        };
        match binomial_kappa(&params) {
            Ok(m) => publish(m, out),
            Err(e) => from_core(e),
        }
    })
}

/// Releases a handle. Null is accepted and ignored.
///
/// # Safety
/// `model` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn snell_model_free(model: *mut SnellModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of nodes in the tree.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_model_node_count(model: *const SnellModel, out: *mut usize) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    *out = m.model.tree.len();
    SnellStatus::Ok
}

/// Label of the node at breadth-first position `index` (the root is 0).
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_model_node_label(
    model: *const SnellModel,
    index: usize,
    out: *mut u64,
) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    match m.model.tree.nodes().nth(index) {
        Some(n) => {
            *out = m.model.tree.label(n);
            SnellStatus::Ok
        }
        None => fail(SnellStatus::NotFound, format!("no node at position {index}")),
    }
}

/// Number of measures in the family, saturating at `UINT64_MAX`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_model_member_count(model: *const SnellModel, out: *mut u64) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    *out = u64::try_from(m.model.family.member_count()).unwrap_or(u64::MAX);
    SnellStatus::Ok
}

/// Lower Snell envelope at the root: the robust value of the stopping problem.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_lower_value(model: *const SnellModel, out: *mut f64) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    *out = m.lower.root_value;
    SnellStatus::Ok
}

/// Lower Snell envelope at the node with the given label.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_lower_envelope(model: *const SnellModel, label: u64, out: *mut f64) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    match m.model.tree.node(label) {
        Ok(n) => {
            *out = *m.lower.envelope.value(n);
            SnellStatus::Ok
        }
        Err(e) => from_core(e),
    }
}

/// Region of the robust optimal stopping time as node labels.
///
/// `*len` receives the region size. When `capacity` is too small nothing is
/// copied and [`SnellStatus::BufferTooSmall`] is returned, so a first call
/// with `capacity = 0` and a null buffer sizes the second.
///
/// # Safety
/// `buffer` must hold `capacity` elements (or be null with `capacity = 0`),
/// `model` must be a live handle and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_tau_down_region(
    model: *const SnellModel,
    buffer: *mut u64,
    capacity: usize,
    len: *mut usize,
) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(len));
    let labels = m.lower.tau_down.labels(&m.model.tree);
    *len = labels.len();
    if capacity < labels.len() {
        return fail(
            SnellStatus::BufferTooSmall,
            format!("region has {} nodes, buffer holds {capacity}", labels.len()),
        );
    }
    if buffer.is_null() {
        return fail(SnellStatus::NullPointer, "null buffer");
    }
    ptr::copy_nonoverlapping(labels.as_ptr(), buffer, labels.len());
    SnellStatus::Ok
}

/// Root value of the classical envelope under the member with canonical
/// index `member`.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_member_value(model: *const SnellModel, member: u64, out: *mut f64) -> SnellStatus {
    guard(|| {
        let m = try_ffi!(handle(model));
        try_ffi!(check_out(out));
        let Some(q) = m.model.family.member(u128::from(member)) else {
            return fail(SnellStatus::NotFound, format!("no member {member}"));
        };
        match snell_envelope(&m.model.tree, &q, &m.model.payoff) {
            Ok(u) => {
                *out = *u.value(m.model.tree.root());
                SnellStatus::Ok
            }
            Err(e) => from_core(e),
        }
    })
}

/// Canonical JSON rendering of the model; free it with [`snell_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn snell_model_to_json(model: *const SnellModel, out: *mut *mut c_char) -> SnellStatus {
    let m = try_ffi!(handle(model));
    try_ffi!(check_out(out));
    match CString::new(m.model.to_json()) {
        Ok(c) => {
            *out = c.into_raw();
            SnellStatus::Ok
        }
        Err(_) => fail(SnellStatus::Internal, "rendered JSON contains a nul byte"),
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn snell_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, or null if none.
#[no_mangle]
pub extern "C" fn snell_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn snell_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
