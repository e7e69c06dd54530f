//! C ABI over `sumeval`.
//!
//! Every fallible function returns a [`SumevalStatus`] and writes its result
//! through an out-pointer. On failure the message is kept per thread and
//! read with [`sumeval_last_error`]. Handles are opaque and released with
//! their matching `_free` function. Strings returned to the caller are owned
//! by the caller and released with [`sumeval_string_free`].
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use sumeval::gateway::{HttpBackend, HttpBackendConfig, DEFAULT_BACKEND_URL, DEFAULT_MODEL};
use sumeval::metaeval::{self, AnnotationTable, MeasurementLevel};
use sumeval::{
    refiner, textmetrics, DocumentText, Error, EvalConfig, EvaluationReport, Evaluator, Gateway,
    RefineConfig, SummaryText,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumevalStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or malformed JSON argument.
    InvalidArgument = 1,
    InvalidConfig = 2,
    InvalidValue = 3,
    DegenerateInput = 4,
    InsufficientData = 5,
    /// Backend unreachable, timed out or answered with an error status.
    Backend = 6,
    ReplayMiss = 7,
    MalformedResponse = 8,
    NoParsableQa = 9,
    EmptyQuestionSet = 10,
    Refinement = 11,
    Io = 12,
    Panic = 13,
    Other = 14,
}

/// Measurement level for [`sumeval_krippendorff_alpha`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumevalLevel {
    Nominal = 0,
    Ordinal = 1,
}

/// LLM gateway: backend, replay cache and concurrency limit.
pub struct SumevalGateway {
    inner: Gateway,
}

/// One evaluation result.
pub struct SumevalReport {
    inner: EvaluationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn status_of(e: &Error) -> SumevalStatus {
    match e {
        Error::InvalidConfig { .. } => SumevalStatus::InvalidConfig,
        Error::InvalidValue(_) | Error::DimensionMismatch(..) | Error::ZeroVector => {
            SumevalStatus::InvalidValue
        }
        Error::DegenerateInput(_) => SumevalStatus::DegenerateInput,
        Error::InsufficientData => SumevalStatus::InsufficientData,
        Error::BackendUnreachable(_) | Error::HttpStatus(_) | Error::Timeout => {
            SumevalStatus::Backend
        }
        Error::ReplayMiss(_) => SumevalStatus::ReplayMiss,
        Error::MalformedResponse(_) => SumevalStatus::MalformedResponse,
        Error::NoParsableQa => SumevalStatus::NoParsableQa,
        Error::EmptyQuestionSet(_) => SumevalStatus::EmptyQuestionSet,
        Error::EmptyFeedback | Error::EmptyRevision => SumevalStatus::Refinement,
        Error::Io { .. } => SumevalStatus::Io,
        Error::Json(_) => SumevalStatus::InvalidArgument,
        _ => SumevalStatus::Other,
    }
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(SumevalStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), format!("{}: {e}", e.code()))
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(SumevalStatus::InvalidArgument, msg.into())
}

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> SumevalStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SumevalStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SumevalStatus::Panic
        }
    }
}

unsafe fn required_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    optional_str(p, name)?.ok_or_else(|| invalid(format!("{name} is null")))
}

unsafe fn optional_str<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains a nul byte"))
}

/// Overlays a JSON object on the serialized default, so callers pass only
/// the fields they change.
fn config_from_json<T>(json: Option<&str>) -> Result<T, Failure>
where
    T: Default + serde::Serialize + serde::de::DeserializeOwned,
{
    let Some(json) = json else {
        return Ok(T::default());
    };
    let patch: serde_json::Value =
        serde_json::from_str(json).map_err(|e| invalid(format!("config: {e}")))?;
    let serde_json::Value::Object(patch) = patch else {
        return Err(invalid("config must be a JSON object"));
    };
    let mut base = serde_json::to_value(T::default()).map_err(Error::from)?;
    let fields = base.as_object_mut().expect("configs serialize to objects");
    for (k, v) in patch {
        if !fields.contains_key(&k) {
            return Err(invalid(format!("config: unknown field `{k}`")));
        }
        fields.insert(k, v);
    }
    serde_json::from_value(base).map_err(|e| invalid(format!("config: {e}")))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sumeval_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sumeval_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sumeval_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// 1.0 on a case-insensitive exact match, else Jaccard overlap of token sets.
#[no_mangle]
pub unsafe extern "C" fn sumeval_empm_similarity(
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let (a, b) = (required_str(a, "a")?, required_str(b, "b")?);
        write(out, textmetrics::empm_similarity(a, b))
    })
}

/// Unigram F1 of `candidate` against `reference`.
#[no_mangle]
pub unsafe extern "C" fn sumeval_rouge1_f1(
    candidate: *const c_char,
    reference: *const c_char,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let c = required_str(candidate, "candidate")?;
        let r = required_str(reference, "reference")?;
        write(out, textmetrics::rouge1_f1(c, r))
    })
}

/// Mean of the similarities that exceed `tau`, counting the rest as zero.
#[no_mangle]
pub unsafe extern "C" fn sumeval_mean_gated(
    similarities: *const f64,
    n: usize,
    tau: f64,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let s = slice(similarities, n, "similarities")?;
        if s.is_empty() {
            return Err(invalid("similarities is empty"));
        }
        write(out, textmetrics::mean_gated(s, tau))
    })
}

/// Kendall tau-b between two score vectors of length `n`.
#[no_mangle]
pub unsafe extern "C" fn sumeval_kendall_tau_b(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let tau = metaeval::kendall_tau_b(slice(x, n, "x")?, slice(y, n, "y")?)?;
        write(out, tau)
    })
}

/// Two-sided permutation p-value of tau-b. Exact for small `n`, otherwise
/// Monte Carlo with `iterations` draws seeded by `seed`.
#[no_mangle]
pub unsafe extern "C" fn sumeval_permutation_pvalue(
    x: *const f64,
    y: *const f64,
    n: usize,
    iterations: usize,
    seed: u64,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let p =
            metaeval::permutation_pvalue(slice(x, n, "x")?, slice(y, n, "y")?, iterations, seed)?;
        write(out, p)
    })
}

/// Krippendorff's alpha over a row-major `units` x `raters` table. NaN marks
/// a missing rating. `level` is a [`SumevalLevel`] value.
#[no_mangle]
pub unsafe extern "C" fn sumeval_krippendorff_alpha(
    ratings: *const f64,
    units: usize,
    raters: usize,
    level: u32,
    out: *mut f64,
) -> SumevalStatus {
    guard(|| {
        let level = match level {
            l if l == SumevalLevel::Nominal as u32 => MeasurementLevel::Nominal,
            l if l == SumevalLevel::Ordinal as u32 => MeasurementLevel::Ordinal,
            other => return Err(invalid(format!("unknown measurement level {other}"))),
        };
        let len = units
            .checked_mul(raters)
            .ok_or_else(|| invalid("table too large"))?;
        let values = slice(ratings, len, "ratings")?;
        let rows = values
            .chunks(raters.max(1))
            .take(units)
            .map(|row| row.iter().map(|v| (!v.is_nan()).then_some(*v)).collect())
            .collect();
        let table = AnnotationTable::from_rows(rows)?;
        write(out, metaeval::krippendorff_alpha(&table, level)?)
    })
}

/// Creates a gateway. `base_url` and `model` fall back to the library
/// defaults when null. `cache_dir` may be null. With `strict_replay` set,
/// every request must be served from `cache_dir` and no network call is made.
#[no_mangle]
pub unsafe extern "C" fn sumeval_gateway_new(
    base_url: *const c_char,
    model: *const c_char,
    cache_dir: *const c_char,
    strict_replay: bool,
    max_in_flight: usize,
    out: *mut *mut SumevalGateway,
) -> SumevalStatus {
    guard(|| {
        let url = optional_str(base_url, "base_url")?.unwrap_or(DEFAULT_BACKEND_URL);
        let model = optional_str(model, "model")?.unwrap_or(DEFAULT_MODEL);
        let mut b = Gateway::builder()
            .model(model)
            .backend_id(url)
            .strict_replay(strict_replay)
            .in_flight(max_in_flight.max(1));
        if !strict_replay {
            b = b.backend(Arc::new(HttpBackend::new(HttpBackendConfig::new(url))));
        }
        if let Some(dir) = optional_str(cache_dir, "cache_dir")? {
            b = b.cache_dir(dir);
        }
        let handle = Box::new(SumevalGateway { inner: b.build()? });
        write(out, Box::into_raw(handle))
    })
}

/// Releases a gateway. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sumeval_gateway_free(gateway: *mut SumevalGateway) {
    if !gateway.is_null() {
        drop(Box::from_raw(gateway));
    }
}

unsafe fn gateway_ref<'a>(g: *const SumevalGateway) -> Result<&'a Gateway, Failure> {
    g.as_ref()
        .map(|g| &g.inner)
        .ok_or_else(|| invalid("gateway is null"))
}

fn texts(document: &str, summary: &str) -> Result<(DocumentText, SummaryText), Failure> {
    Ok((
        DocumentText::new("doc", document)?,
        SummaryText::new("summary", "doc", summary)?,
    ))
}

/// Scores `summary` against `document`. `config_json` is a JSON object of
/// evaluation settings to override, or null for the defaults.
#[no_mangle]
pub unsafe extern "C" fn sumeval_evaluate(
    gateway: *const SumevalGateway,
    config_json: *const c_char,
    document: *const c_char,
    summary: *const c_char,
    out: *mut *mut SumevalReport,
) -> SumevalStatus {
    guard(|| {
        let gw = gateway_ref(gateway)?;
        let cfg: EvalConfig = config_from_json(optional_str(config_json, "config_json")?)?;
        let (doc, sum) = texts(
            required_str(document, "document")?,
            required_str(summary, "summary")?,
        )?;
        let report = Evaluator::new(gw, cfg)?.evaluate(&doc, &sum)?;
        write(
            out,
            Box::into_raw(Box::new(SumevalReport { inner: report })),
        )
    })
}

/// Releases a report. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_free(report: *mut SumevalReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Coverage score of a report, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_coverage(report: *const SumevalReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.coverage_score)
}

/// Consistency score of a report, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_consistency(report: *const SumevalReport) -> f64 {
    report
        .as_ref()
        .map_or(f64::NAN, |r| r.inner.consistency_score)
}

/// Number of unanswered document questions in the coverage feedback.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_coverage_feedback_len(
    report: *const SumevalReport,
) -> usize {
    report
        .as_ref()
        .map_or(0, |r| r.inner.coverage_feedback.len())
}

/// Number of inconsistent facts in the consistency feedback.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_consistency_feedback_len(
    report: *const SumevalReport,
) -> usize {
    report
        .as_ref()
        .map_or(0, |r| r.inner.consistency_feedback.len())
}

/// Full report, feedback and diagnostics included, as JSON.
#[no_mangle]
pub unsafe extern "C" fn sumeval_report_to_json(
    report: *const SumevalReport,
    out: *mut *mut c_char,
) -> SumevalStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| invalid("report is null"))?;
        let json = serde_json::to_string(&r.inner).map_err(Error::from)?;
        write(out, owned_string(json)?)
    })
}

/// Runs the evaluate and revise loop and writes the trace as JSON. On a
/// failure part way through, the partial trace is still written to `out`
/// when it holds at least one report, and the error status is returned.
#[no_mangle]
pub unsafe extern "C" fn sumeval_refine(
    gateway: *const SumevalGateway,
    eval_config_json: *const c_char,
    refine_config_json: *const c_char,
    document: *const c_char,
    summary: *const c_char,
    out: *mut *mut c_char,
) -> SumevalStatus {
    guard(|| {
        if out.is_null() {
            return Err(invalid("output pointer is null"));
        }
        out.write(ptr::null_mut());
        let gw = gateway_ref(gateway)?;
        let ecfg: EvalConfig =
            config_from_json(optional_str(eval_config_json, "eval_config_json")?)?;
        let rcfg: RefineConfig =
            config_from_json(optional_str(refine_config_json, "refine_config_json")?)?;
        let (doc, sum) = texts(
            required_str(document, "document")?,
            required_str(summary, "summary")?,
        )?;
        match refiner::refine_loop(&doc, sum, &ecfg, &rcfg, gw) {
            Ok(trace) => {
                let json = serde_json::to_string(&trace).map_err(Error::from)?;
                write(out, owned_string(json)?)
            }
            Err(failure) => {
                if !failure.trace.reports.is_empty() {
                    let json = serde_json::to_string(&failure.trace).map_err(Error::from)?;
                    out.write(owned_string(json)?);
                }
                Err(failure.error.into())
            }
        }
    })
}
