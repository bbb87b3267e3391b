//! C ABI over the sandpile library. Objects are opaque heap handles released with the matching
//! `*_free`; every fallible call returns an [`SpStatus`] and leaves a message readable through
//! [`sp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use sandpile::circuit::{compile, CircuitInstance, TriggerStyle};
use sandpile::io::{parse_config, parse_model, write_config};
use sandpile::parallel1d::predict_1d;
use sandpile::prediction::{solve_first_col, solve_pred, solve_s_pred};
use sandpile::{stabilize, Cell, Configuration, Error, Policy, SandpileModel};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    Utf8 = 2,
    Parse = 3,
    InvalidModel = 4,
    IncompleteModel = 5,
    InvalidInstance = 6,
    DimensionMismatch = 7,
    Overflow = 8,
    Watchdog = 9,
    InvariantViolation = 10,
    Unsupported = 11,
    NotApplicable = 12,
    Internal = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpPolicy {
    Parallel = 0,
    SequentialLexMin = 1,
    SequentialRandom = 2,
}

/// Opaque model handle.
pub struct SpModel(SandpileModel);
/// Opaque configuration handle.
pub struct SpConfig(Configuration);
/// Opaque circuit handle.
pub struct SpCircuit(CircuitInstance);

thread_local! {
    static LAST: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST.with(|l| *l.borrow_mut() = c);
}

fn status_of(e: &Error) -> SpStatus {
    match e {
        Error::Parse { .. } => SpStatus::Parse,
        Error::InvalidModel(_) => SpStatus::InvalidModel,
        Error::IncompleteModel => SpStatus::IncompleteModel,
        Error::InvalidInstance(_) => SpStatus::InvalidInstance,
        Error::DimensionMismatch { .. } => SpStatus::DimensionMismatch,
        Error::Overflow(_) => SpStatus::Overflow,
        Error::Watchdog { .. } => SpStatus::Watchdog,
        Error::InvariantViolation(_) | Error::GadgetDefect { .. } => SpStatus::InvariantViolation,
        Error::Unsupported(_) | Error::BasisSelectionFailed(_) => SpStatus::Unsupported,
        Error::NotApplicable(_) => SpStatus::NotApplicable,
        _ => SpStatus::Internal,
    }
}

fn fail(e: Error) -> SpStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> SpStatus {
    set_error(format!("{what} is null"));
    SpStatus::NullPointer
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, SpStatus> {
    if p.is_null() {
        return Err(null("text"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("text is not UTF-8".into());
        SpStatus::Utf8
    })
}

unsafe fn cell<'a>(p: *const i64, dim: usize) -> Result<Cell, SpStatus> {
    if p.is_null() {
        return Err(null("coordinates"));
    }
    Ok(Cell::new(std::slice::from_raw_parts(p, dim)))
}

macro_rules! try_sp {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! lib {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return fail(e),
        }
    };
}

/// Message of the last failed call on this thread. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn sp_last_error() -> *const c_char {
    LAST.with(|l| l.borrow().as_ptr())
}

/// Parses a `sandpile-model v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_model_parse(text_: *const c_char, out: *mut *mut SpModel) -> SpStatus {
    if out.is_null() {
        return null("out");
    }
    let t = try_sp!(text(text_));
    let m = lib!(parse_model(t));
    *out = Box::into_raw(Box::new(SpModel(m)));
    SpStatus::Ok
}

/// Built-in families: `von-neumann`, `moore`, `kadanoff-1d`, `decreasing-1d`.
///
/// # Safety
/// `family` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_model_builtin(
    family: *const c_char,
    dim: usize,
    r: i64,
    out: *mut *mut SpModel,
) -> SpStatus {
    if out.is_null() {
        return null("out");
    }
    let f = try_sp!(text(family));
    let fam = lib!(f.parse());
    let m = lib!(SandpileModel::builtin(fam, dim, r, &[(1, 1)]));
    *out = Box::into_raw(Box::new(SpModel(m)));
    SpStatus::Ok
}

/// # Safety
/// `m` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sp_model_free(m: *mut SpModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_dim(m: *const SpModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `m` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_threshold(m: *const SpModel) -> u64 {
    m.as_ref().map_or(0, |m| m.0.threshold())
}

/// # Safety
/// `m` must be a live model handle.
#[no_mangle]
pub unsafe extern "C" fn sp_model_is_complete(m: *const SpModel) -> bool {
    m.as_ref().map_or(false, |m| m.0.is_complete())
}

/// An empty configuration.
#[no_mangle]
pub extern "C" fn sp_config_new(dim: usize) -> *mut SpConfig {
    Box::into_raw(Box::new(SpConfig(Configuration::new(dim))))
}

/// Parses a `sandpile-config v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_config_parse(text_: *const c_char, out: *mut *mut SpConfig) -> SpStatus {
    if out.is_null() {
        return null("out");
    }
    let t = try_sp!(text(text_));
    let c = lib!(parse_config(t));
    *out = Box::into_raw(Box::new(SpConfig(c)));
    SpStatus::Ok
}

/// # Safety
/// `c` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sp_config_free(c: *mut SpConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Sets the count of the cell with `dim` coordinates at `coords`.
///
/// # Safety
/// `c` must be a live handle and `coords` point to `dim` integers.
#[no_mangle]
pub unsafe extern "C" fn sp_config_set(c: *mut SpConfig, coords: *const i64, dim: usize, count: u64) -> SpStatus {
    let Some(c) = c.as_mut() else { return null("configuration") };
    if dim != c.0.dim() {
        return fail(Error::DimensionMismatch { expected: c.0.dim(), found: dim });
    }
    let x = try_sp!(cell(coords, dim));
    lib!(c.0.set(&x, count));
    SpStatus::Ok
}

/// Count of a cell; 0 for a null handle or wrong dimension.
///
/// # Safety
/// `c` must be a live handle and `coords` point to `dim` integers.
#[no_mangle]
pub unsafe extern "C" fn sp_config_get(c: *const SpConfig, coords: *const i64, dim: usize) -> u64 {
    match (c.as_ref(), coords.is_null()) {
        (Some(c), false) if dim == c.0.dim() => c.0.get(&Cell::new(std::slice::from_raw_parts(coords, dim))),
        _ => 0,
    }
}

/// Total grains (saturating at `u64::MAX`).
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sp_config_total(c: *const SpConfig) -> u64 {
    c.as_ref().map_or(0, |c| c.0.total().min(u64::MAX as u128) as u64)
}

/// Serializes to the text format. Release the string with [`sp_string_free`].
///
/// # Safety
/// `c` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_config_to_string(c: *const SpConfig, out: *mut *mut c_char) -> SpStatus {
    let Some(c) = c.as_ref() else { return null("configuration") };
    if out.is_null() {
        return null("out");
    }
    *out = CString::new(write_config(&c.0)).unwrap_or_default().into_raw();
    SpStatus::Ok
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Stabilizes `c`; writes a new handle to `out` and the number of topplings to `topplings`
/// (which may be null).
///
/// # Safety
/// Handles must be live; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sp_stabilize(
    m: *const SpModel,
    c: *const SpConfig,
    policy: SpPolicy,
    seed: u64,
    out: *mut *mut SpConfig,
    topplings: *mut u64,
) -> SpStatus {
    let (Some(m), Some(c)) = (m.as_ref(), c.as_ref()) else { return null("handle") };
    if out.is_null() {
        return null("out");
    }
    let p = match policy {
        SpPolicy::Parallel => Policy::Parallel,
        SpPolicy::SequentialLexMin => Policy::SequentialLexMin,
        SpPolicy::SequentialRandom => Policy::SequentialRandom(seed),
    };
    let s = lib!(stabilize(&m.0, &c.0, p));
    if !topplings.is_null() {
        *topplings = s.topplings.min(u64::MAX as u128) as u64;
    }
    *out = Box::into_raw(Box::new(SpConfig(s.configuration)));
    SpStatus::Ok
}

/// Does `target` topple when `c` stabilizes (`addition` null), or when a grain is added at
/// `addition` to the stable `c`?
///
/// # Safety
/// Handles must be live; coordinate pointers hold the model dimension or are null.
#[no_mangle]
pub unsafe extern "C" fn sp_predict(
    m: *const SpModel,
    c: *const SpConfig,
    target: *const i64,
    addition: *const i64,
    answer: *mut bool,
) -> SpStatus {
    let (Some(m), Some(c)) = (m.as_ref(), c.as_ref()) else { return null("handle") };
    if answer.is_null() {
        return null("answer");
    }
    let d = m.0.dim();
    let x = try_sp!(cell(target, d));
    let r = if addition.is_null() {
        solve_pred(&m.0, &c.0, &x)
    } else {
        let y = try_sp!(cell(addition, d));
        solve_s_pred(&m.0, &c.0, &x, &y)
    };
    *answer = lib!(r);
    SpStatus::Ok
}

/// First-column prediction in one dimension; `parallel` selects the tree algorithm.
///
/// # Safety
/// Handles must be live and `answer` valid.
#[no_mangle]
pub unsafe extern "C" fn sp_predict_first_col_1d(
    m: *const SpModel,
    c: *const SpConfig,
    target: i64,
    parallel: bool,
    answer: *mut bool,
) -> SpStatus {
    let (Some(m), Some(c)) = (m.as_ref(), c.as_ref()) else { return null("handle") };
    if answer.is_null() {
        return null("answer");
    }
    *answer = lib!(if parallel {
        predict_1d(&m.0, &c.0, target)
    } else {
        solve_first_col(&m.0, &c.0, &Cell::new(&[target]))
    });
    SpStatus::Ok
}

/// Parses a `circuit v1` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sp_circuit_parse(text_: *const c_char, out: *mut *mut SpCircuit) -> SpStatus {
    if out.is_null() {
        return null("out");
    }
    let t = try_sp!(text(text_));
    let c = lib!(CircuitInstance::parse(t));
    *out = Box::into_raw(Box::new(SpCircuit(c)));
    SpStatus::Ok
}

/// # Safety
/// `c` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn sp_circuit_free(c: *mut SpCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Direct evaluation.
///
/// # Safety
/// `c` must be live and `answer` valid.
#[no_mangle]
pub unsafe extern "C" fn sp_circuit_eval(c: *const SpCircuit, answer: *mut bool) -> SpStatus {
    let Some(c) = c.as_ref() else { return null("circuit") };
    if answer.is_null() {
        return null("answer");
    }
    *answer = c.0.evaluate();
    SpStatus::Ok
}

/// Compiles into `m` and runs the avalanche; `answer` is the toppling of the question cell.
/// `out` (may be null) receives the compiled configuration.
///
/// # Safety
/// Handles must be live and `answer` valid.
#[no_mangle]
pub unsafe extern "C" fn sp_circuit_run(
    c: *const SpCircuit,
    m: *const SpModel,
    answer: *mut bool,
    out: *mut *mut SpConfig,
) -> SpStatus {
    let (Some(c), Some(m)) = (c.as_ref(), m.as_ref()) else { return null("handle") };
    if answer.is_null() {
        return null("answer");
    }
    let comp = lib!(compile(&c.0, &m.0, TriggerStyle::Free));
    *answer = lib!(comp.run(&m.0));
    if !out.is_null() {
        *out = Box::into_raw(Box::new(SpConfig(comp.configuration)));
    }
    SpStatus::Ok
}
