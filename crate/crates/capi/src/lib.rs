//! C ABI surface for ripscan.
//!
//! Conventions:
//! - Every constructor hands back an opaque handle through an out pointer
//!   and returns a [`RipscanStatus`]; handles are freed with the matching
//!   `*_free` function and must not be used afterwards.
//! - Strings returned through `char **` out pointers are UTF-8, owned by
//!   the caller, and released with [`ripscan_string_free`].
//! - On any non-zero status the thread-local message from
//!   [`ripscan_last_error`] describes what went wrong.
//!
//! The committed `include/ripscan.h` is generated from this file by
//! cbindgen (see `build.rs`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use ripscan::catalog::Catalog;
use ripscan::pipeline::{Pipeline, PipelineConfig, PipelineError, Stage};
use ripscan::platform::PostRecord;
use ripscan::taxonomy::RuleClassifier;

/// Result of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RipscanStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An input document did not parse (JSON or config syntax).
    ParseError = 3,
    /// The run configuration was rejected.
    ConfigError = 4,
    /// A stage input artifact is missing; run the earlier stages first.
    MissingInput = 5,
    /// A pipeline stage failed.
    StageFailed = 6,
    /// The platform stayed unreachable through every retry.
    TransportExhausted = 7,
    /// Filesystem error.
    IoError = 8,
    /// The stage name is not part of the pipeline.
    UnknownStage = 9,
    /// A panic was caught at the FFI boundary; state may be inconsistent.
    Panic = 99,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).expect("nul bytes stripped");
    });
}

fn fail(status: RipscanStatus, message: impl std::fmt::Display) -> RipscanStatus {
    set_error(message);
    status
}

fn pipeline_status(e: &PipelineError) -> RipscanStatus {
    match e {
        PipelineError::Config(_) => RipscanStatus::ConfigError,
        PipelineError::MissingInput { .. } => RipscanStatus::MissingInput,
        PipelineError::Stage { .. } => RipscanStatus::StageFailed,
        PipelineError::Transport { .. } => RipscanStatus::TransportExhausted,
        PipelineError::Io(_) => RipscanStatus::IoError,
    }
}

/// Run `f` with panics converted to [`RipscanStatus::Panic`].
fn guarded(f: impl FnOnce() -> RipscanStatus) -> RipscanStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(RipscanStatus::Panic, msg)
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid nul-terminated C string.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, RipscanStatus> {
    if ptr.is_null() {
        return Err(fail(RipscanStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| fail(RipscanStatus::InvalidUtf8, e))
}

fn give_string(out: *mut *mut c_char, value: String) -> RipscanStatus {
    let c = match CString::new(value) {
        Ok(c) => c,
        Err(e) => return fail(RipscanStatus::ParseError, e),
    };
    unsafe { *out = c.into_raw() };
    RipscanStatus::Ok
}

fn parse_post(json: &str) -> Result<PostRecord, RipscanStatus> {
    serde_json::from_str(json).map_err(|e| fail(RipscanStatus::ParseError, e))
}

/// Crate version as a static string; never freed.
#[no_mangle]
pub extern "C" fn ripscan_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing ripscan call on the same thread. Never null.
#[no_mangle]
pub extern "C" fn ripscan_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned through a `char **` out parameter.
///
/// # Safety
/// `s` must be null or a pointer previously returned by this library.
#[no_mangle]
pub unsafe extern "C" fn ripscan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// Classifier
// ---------------------------------------------------------------------------

/// Deterministic rule classifier over the piracy taxonomy.
pub struct RipscanClassifier {
    rules: RuleClassifier,
}

/// Create a classifier with the built-in signature set.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ripscan_classifier_new(
    out: *mut *mut RipscanClassifier,
) -> RipscanStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RipscanStatus::NullArgument, "null out pointer");
        }
        let handle = Box::new(RipscanClassifier { rules: RuleClassifier::default() });
        *out = Box::into_raw(handle);
        RipscanStatus::Ok
    })
}

/// Destroy a classifier handle.
///
/// # Safety
/// `classifier` must be null or a live handle from `ripscan_classifier_new`.
#[no_mangle]
pub unsafe extern "C" fn ripscan_classifier_free(classifier: *mut RipscanClassifier) {
    if !classifier.is_null() {
        drop(Box::from_raw(classifier));
    }
}

/// Binary piracy detection over a post given as JSON. Writes the verdict to
/// `out_is_piracy`.
///
/// # Safety
/// All pointers must be valid; `post_json` nul-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn ripscan_classifier_detect(
    classifier: *const RipscanClassifier,
    post_json: *const c_char,
    out_is_piracy: *mut bool,
) -> RipscanStatus {
    guarded(|| {
        if classifier.is_null() || out_is_piracy.is_null() {
            return fail(RipscanStatus::NullArgument, "null argument");
        }
        let json = match utf8_arg(post_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let post = match parse_post(json) {
            Ok(p) => p,
            Err(status) => return status,
        };
        *out_is_piracy = (*classifier).rules.detect(&post);
        RipscanStatus::Ok
    })
}

/// Full classification of a post given as JSON. On success `out_verdict_json`
/// receives the verdict document (labels, justifications); free it with
/// `ripscan_string_free`.
///
/// # Safety
/// All pointers must be valid; `post_json` nul-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn ripscan_classifier_classify(
    classifier: *const RipscanClassifier,
    post_json: *const c_char,
    author_is_bot: bool,
    out_verdict_json: *mut *mut c_char,
) -> RipscanStatus {
    guarded(|| {
        if classifier.is_null() || out_verdict_json.is_null() {
            return fail(RipscanStatus::NullArgument, "null argument");
        }
        let json = match utf8_arg(post_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let post = match parse_post(json) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let verdict = (*classifier).rules.classify(&post, author_is_bot);
        let body = serde_json::to_string(&verdict).expect("verdict serializes");
        give_string(out_verdict_json, body)
    })
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Licensed-title catalog for fuzzy matching.
pub struct RipscanCatalog {
    catalog: Catalog,
}

/// Load a catalog from a JSONL file.
///
/// # Safety
/// `path` must be nul-terminated UTF-8; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ripscan_catalog_open(
    path: *const c_char,
    out: *mut *mut RipscanCatalog,
) -> RipscanStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RipscanStatus::NullArgument, "null out pointer");
        }
        let path = match utf8_arg(path) {
            Ok(s) => PathBuf::from(s),
            Err(status) => return status,
        };
        match Catalog::ingest_path(&path) {
            Ok(catalog) => {
                *out = Box::into_raw(Box::new(RipscanCatalog { catalog }));
                RipscanStatus::Ok
            }
            Err(e) => fail(RipscanStatus::ParseError, e),
        }
    })
}

/// Destroy a catalog handle.
///
/// # Safety
/// `catalog` must be null or a live handle from `ripscan_catalog_open`.
#[no_mangle]
pub unsafe extern "C" fn ripscan_catalog_free(catalog: *mut RipscanCatalog) {
    if !catalog.is_null() {
        drop(Box::from_raw(catalog));
    }
}

/// Match a post (JSON) against the catalog. `threshold` in [0, 1]; pass 0.8
/// for the default. `out_matches_json` receives a JSON array ordered best
/// match first; free it with `ripscan_string_free`.
///
/// # Safety
/// All pointers must be valid; `post_json` nul-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn ripscan_catalog_match(
    catalog: *const RipscanCatalog,
    post_json: *const c_char,
    threshold: f64,
    out_matches_json: *mut *mut c_char,
) -> RipscanStatus {
    guarded(|| {
        if catalog.is_null() || out_matches_json.is_null() {
            return fail(RipscanStatus::NullArgument, "null argument");
        }
        let json = match utf8_arg(post_json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let post = match parse_post(json) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let matches = (*catalog).catalog.match_post(&post, threshold);
        let body = serde_json::to_string(&matches).expect("matches serialize");
        give_string(out_matches_json, body)
    })
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

/// A configured pipeline run over the simulated platform.
pub struct RipscanPipeline {
    pipeline: Pipeline,
}

/// Create a pipeline from configuration text in the flat `key = value`
/// format. Pass null for an all-defaults run (paths resolve against the
/// current working directory).
///
/// # Safety
/// `config_text` must be null or nul-terminated UTF-8; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_new(
    config_text: *const c_char,
    out: *mut *mut RipscanPipeline,
) -> RipscanStatus {
    guarded(|| {
        if out.is_null() {
            return fail(RipscanStatus::NullArgument, "null out pointer");
        }
        let mut cfg = PipelineConfig::default();
        if !config_text.is_null() {
            let body = match utf8_arg(config_text) {
                Ok(s) => s,
                Err(status) => return status,
            };
            if let Err(e) = cfg.apply_str(body) {
                return fail(RipscanStatus::ConfigError, e);
            }
        }
        match Pipeline::new(cfg) {
            Ok(pipeline) => {
                *out = Box::into_raw(Box::new(RipscanPipeline { pipeline }));
                RipscanStatus::Ok
            }
            Err(e) => {
                let status = pipeline_status(&e);
                fail(status, e)
            }
        }
    })
}

/// Destroy a pipeline handle.
///
/// # Safety
/// `pipeline` must be null or a live handle from `ripscan_pipeline_new`.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_free(pipeline: *mut RipscanPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}

/// Run every stage in order, skipping stages already completed on disk.
///
/// # Safety
/// `pipeline` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_run(pipeline: *mut RipscanPipeline) -> RipscanStatus {
    guarded(|| {
        if pipeline.is_null() {
            return fail(RipscanStatus::NullArgument, "null pipeline");
        }
        match (*pipeline).pipeline.run() {
            Ok(_) => RipscanStatus::Ok,
            Err(e) => {
                let status = pipeline_status(&e);
                fail(status, e)
            }
        }
    })
}

/// Run one named stage: synth, probe, gate, expand, hydrate, detect,
/// categorize, match, graph, estimate, report, or track.
///
/// # Safety
/// `pipeline` must be a live handle; `stage` nul-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_run_stage(
    pipeline: *mut RipscanPipeline,
    stage: *const c_char,
) -> RipscanStatus {
    guarded(|| {
        if pipeline.is_null() {
            return fail(RipscanStatus::NullArgument, "null pipeline");
        }
        let name = match utf8_arg(stage) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let Some(stage) = Stage::from_name(name) else {
            return fail(RipscanStatus::UnknownStage, format!("unknown stage {name:?}"));
        };
        match (*pipeline).pipeline.run_stage(stage) {
            Ok(()) => RipscanStatus::Ok,
            Err(e) => {
                let status = pipeline_status(&e);
                fail(status, e)
            }
        }
    })
}

/// The run id (12 hex characters derived from the configuration). Free with
/// `ripscan_string_free`.
///
/// # Safety
/// `pipeline` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_run_id(
    pipeline: *const RipscanPipeline,
    out: *mut *mut c_char,
) -> RipscanStatus {
    guarded(|| {
        if pipeline.is_null() || out.is_null() {
            return fail(RipscanStatus::NullArgument, "null argument");
        }
        give_string(out, (*pipeline).pipeline.run_id().to_string())
    })
}

/// Absolute or relative path of the run's artifact directory. Free with
/// `ripscan_string_free`.
///
/// # Safety
/// `pipeline` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ripscan_pipeline_run_dir(
    pipeline: *const RipscanPipeline,
    out: *mut *mut c_char,
) -> RipscanStatus {
    guarded(|| {
        if pipeline.is_null() || out.is_null() {
            return fail(RipscanStatus::NullArgument, "null argument");
        }
        give_string(out, (*pipeline).pipeline.run_dir().display().to_string())
    })
}
