//! C ABI over the `fakescope` library.
//!
//! Every fallible function returns an `int32_t` status (`FS_OK` or a
//! negative `FS_ERR_*` code) and writes results through out-pointers. The
//! message for the most recent failure on the calling thread is available
//! from [`fs_last_error`]. Handles are opaque and must be released with their
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use fakescope::config::RunConfig;
use fakescope::detect::DetectorKind;
use fakescope::lm::{coherence, perplexity, text_tokens, NGramModel};
use fakescope::pipeline::{Pipeline, Scorer};
use fakescope::stats::anova_oneway;
use fakescope::stylometrics::{ari, reading_time};

pub const FS_OK: i32 = 0;
/// A required pointer argument was null.
pub const FS_ERR_NULL: i32 = -1;
/// A string argument was not valid UTF-8.
pub const FS_ERR_UTF8: i32 = -2;
/// An argument or input record was rejected.
pub const FS_ERR_INVALID: i32 = -3;
/// A file could not be read or written, or an upstream artifact is missing.
pub const FS_ERR_IO: i32 = -4;
/// The text-generation service failed.
pub const FS_ERR_SERVICE: i32 = -5;
/// A Rust panic was caught at the boundary.
pub const FS_ERR_PANIC: i32 = -99;

pub const FS_DETECTOR_DEFAULT: i32 = 0;
pub const FS_DETECTOR_NAIVE_BAYES: i32 = 1;
pub const FS_DETECTOR_LOGISTIC_REGRESSION: i32 = 2;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(i32, String);

impl From<fakescope::Error> for Failure {
    fn from(e: fakescope::Error) -> Self {
        use fakescope::Error as E;
        let code = match &e {
            E::Io { .. } | E::MissingArtifact { .. } => FS_ERR_IO,
            E::Generation(_) => FS_ERR_SERVICE,
            _ => FS_ERR_INVALID,
        };
        Failure(code, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FS_OK,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("panic inside fakescope");
            FS_ERR_PANIC
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FS_ERR_NULL, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn cstr<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FS_ERR_UTF8, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn detector_kind(code: i32) -> Result<Option<DetectorKind>, Failure> {
    match code {
        FS_DETECTOR_DEFAULT => Ok(None),
        FS_DETECTOR_NAIVE_BAYES => Ok(Some(DetectorKind::NaiveBayes)),
        FS_DETECTOR_LOGISTIC_REGRESSION => Ok(Some(DetectorKind::LogisticRegression)),
        other => Err(Failure(
            FS_ERR_INVALID,
            format!("unknown detector code {other}"),
        )),
    }
}

/// Message for the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Automated readability index of `text`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_ari(text: *const c_char, out: *mut f64) -> i32 {
    guard(|| {
        let v = ari(cstr(text, "text")?)?;
        put(out, v, "out")
    })
}

/// Estimated reading time of `text` in seconds.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_reading_time(text: *const c_char, out: *mut f64) -> i32 {
    guard(|| put(out, reading_time(cstr(text, "text")?), "out"))
}

/// One-way ANOVA over `n_groups` groups stored back to back in `values`;
/// `sizes[i]` is the length of group `i`.
///
/// # Safety
/// `values` must hold the sum of `sizes`, `sizes` must hold `n_groups`
/// entries, and `f_out` and `p_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_anova_oneway(
    values: *const f64,
    sizes: *const usize,
    n_groups: usize,
    f_out: *mut f64,
    p_out: *mut f64,
) -> i32 {
    guard(|| {
        if values.is_null() || sizes.is_null() {
            return Err(null("values or sizes"));
        }
        let sizes = std::slice::from_raw_parts(sizes, n_groups);
        let total = sizes.iter().try_fold(0usize, |a, &b| a.checked_add(b));
        let total = total.ok_or_else(|| Failure(FS_ERR_INVALID, "group sizes overflow".into()))?;
        let values = std::slice::from_raw_parts(values, total);
        let mut groups = Vec::with_capacity(n_groups);
        let mut start = 0;
        for &n in sizes {
            groups.push(&values[start..start + n]);
            start += n;
        }
        let r = anova_oneway(&groups)?;
        put(f_out, r.f, "f_out")?;
        put(p_out, r.p, "p_out")
    })
}

/// Opaque n-gram language model.
pub struct FsLanguageModel(NGramModel);

/// Load a language model written by the `metrics` stage.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_lm_open(path: *const c_char, out: *mut *mut FsLanguageModel) -> i32 {
    guard(|| {
        let path = cstr(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let file =
            std::fs::File::open(path).map_err(|e| Failure(FS_ERR_IO, format!("{path}: {e}")))?;
        let model = NGramModel::read(std::io::BufReader::new(file))?;
        put(out, Box::into_raw(Box::new(FsLanguageModel(model))), "out")
    })
}

/// Perplexity of `text` under the model.
///
/// # Safety
/// `lm` must come from [`fs_lm_open`]; `text` must be a NUL-terminated
/// string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_lm_perplexity(
    lm: *const FsLanguageModel,
    text: *const c_char,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let lm = lm.as_ref().ok_or_else(|| null("lm"))?;
        let v = perplexity(&lm.0, &text_tokens(cstr(text, "text")?))?;
        put(out, v, "out")
    })
}

/// Shuffle-test coherence of `text`; `seed` picks the sampled sentences.
///
/// # Safety
/// As for [`fs_lm_perplexity`].
#[no_mangle]
pub unsafe extern "C" fn fs_lm_coherence(
    lm: *const FsLanguageModel,
    text: *const c_char,
    seed: u64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let lm = lm.as_ref().ok_or_else(|| null("lm"))?;
        let report = coherence(&lm.0, cstr(text, "text")?, seed)?;
        put(out, report.tc, "out")
    })
}

/// # Safety
/// `lm` must be null or come from [`fs_lm_open`], and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_lm_free(lm: *mut FsLanguageModel) {
    if !lm.is_null() {
        drop(Box::from_raw(lm));
    }
}

/// Opaque trained detector.
pub struct FsDetector(Scorer);

/// Load the detector trained into `out_dir`. `kind` is one of the
/// `FS_DETECTOR_*` codes; the default is the configured detector.
///
/// # Safety
/// `out_dir` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_detector_open(
    out_dir: *const c_char,
    kind: i32,
    out: *mut *mut FsDetector,
) -> i32 {
    guard(|| {
        let cfg = RunConfig {
            out_dir: PathBuf::from(cstr(out_dir, "out_dir")?),
            ..RunConfig::default()
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let scorer = Pipeline::new(cfg)?.scorer(detector_kind(kind)?)?;
        put(out, Box::into_raw(Box::new(FsDetector(scorer))), "out")
    })
}

/// Probability in [0, 1] that `text` is machine-generated.
///
/// # Safety
/// `detector` must come from [`fs_detector_open`]; `text` must be a
/// NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fs_detector_score(
    detector: *const FsDetector,
    text: *const c_char,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let d = detector.as_ref().ok_or_else(|| null("detector"))?;
        put(out, d.0.score_text(cstr(text, "text")?), "out")
    })
}

/// # Safety
/// `detector` must be null or come from [`fs_detector_open`], and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_detector_free(detector: *mut FsDetector) {
    if !detector.is_null() {
        drop(Box::from_raw(detector));
    }
}

/// Opaque pipeline bound to one configuration.
pub struct FsPipeline(Pipeline);

/// Create a pipeline from a JSON configuration (null for defaults) and an
/// optional output directory override (null to keep the configured one).
///
/// # Safety
/// Non-null strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fs_pipeline_new(
    config_json: *const c_char,
    out_dir: *const c_char,
    out: *mut *mut FsPipeline,
) -> i32 {
    guard(|| {
        let mut cfg = if config_json.is_null() {
            RunConfig::default()
        } else {
            serde_json::from_str(cstr(config_json, "config_json")?)
                .map_err(|e| Failure(FS_ERR_INVALID, format!("config: {e}")))?
        };
        if !out_dir.is_null() {
            cfg.out_dir = PathBuf::from(cstr(out_dir, "out_dir")?);
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let p = Pipeline::new(cfg)?;
        put(out, Box::into_raw(Box::new(FsPipeline(p))), "out")
    })
}

/// Run one stage by its command name: `ingest`, `generate`, `train`,
/// `calibrate`, `infer`, `metrics`, `analyze` or `run`. `input` is the corpus
/// path for `ingest` and `run` (null for the configured one).
///
/// # Safety
/// `pipeline` must come from [`fs_pipeline_new`]; `stage` must be a
/// NUL-terminated string and `input` null or one.
#[no_mangle]
pub unsafe extern "C" fn fs_pipeline_run_stage(
    pipeline: *const FsPipeline,
    stage: *const c_char,
    input: *const c_char,
) -> i32 {
    guard(|| {
        let p = &pipeline.as_ref().ok_or_else(|| null("pipeline"))?.0;
        let input = if input.is_null() {
            None
        } else {
            Some(PathBuf::from(cstr(input, "input")?))
        };
        let input = input.as_deref();
        match cstr(stage, "stage")? {
            "ingest" => p.ingest(input),
            "generate" => p.generate(),
            "train" => p.train(),
            "calibrate" => p.calibrate(None),
            "infer" => p.infer(),
            "metrics" => p.metrics(),
            "analyze" => p.analyze(),
            "run" => p.run_all(input),
            other => return Err(Failure(FS_ERR_INVALID, format!("unknown stage `{other}`"))),
        }?;
        Ok(())
    })
}

/// # Safety
/// `pipeline` must be null or come from [`fs_pipeline_new`], and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn fs_pipeline_free(pipeline: *mut FsPipeline) {
    if !pipeline.is_null() {
        drop(Box::from_raw(pipeline));
    }
}
