//! C interface to the retrofit-cq library.
//!
//! Conventions:
//! - every fallible call returns an [`RcqStatus`]; on failure a message is
//!   available from [`rcq_last_error_message`] on the same thread;
//! - objects are opaque handles created by `*_new`/`*_parse`/`*_load`
//!   functions and released with the matching `*_free`;
//! - strings handed out as `char *` are owned by the caller and must be
//!   released with [`rcq_string_free`]; `const char *` results are borrowed
//!   and live as long as the handle they came from.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use retrofit_cq::filtration::{CandidateCQ, Filter, FiltrationConfig, Strictness};
use retrofit_cq::gateway::{Gateway, ProviderConfig};
use retrofit_cq::ingest::{filter_statements, load_ontology, parse_ontology, RdfFormat, StatementSet};
use retrofit_cq::matcher::{match_candidates, DesignCQSet, MatcherConfig};
use retrofit_cq::metrics::{unmatched_stats, EvalMetrics};
use retrofit_cq::prompt::{render_prompt, TemplateId};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    OutOfRange = 4,
    Parse = 5,
    Io = 6,
    Generation = 7,
    Matching = 8,
    Metrics = 9,
    Panic = 10,
}

/// Input syntax for [`rcq_statements_parse`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqFormat {
    NTriples = 0,
    Turtle = 1,
}

/// Filtration strictness for the pattern-based checks.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RcqStrictness {
    Off = 0,
    Lenient = 1,
    Strict = 2,
}

/// Opaque set of extracted statements.
pub struct RcqStatementSet(StatementSet);

/// Opaque ordered list of questions.
pub struct RcqQuestionList {
    items: Vec<CString>,
}

#[repr(C)]
#[derive(Debug, Default, Clone, Copy)]
pub struct RcqIngestCounts {
    pub parsed: usize,
    pub excluded_blank: usize,
    pub excluded_opaque: usize,
    pub excluded_duplicate: usize,
    pub kept: usize,
}

#[repr(C)]
#[derive(Debug, Default, Clone, Copy)]
pub struct RcqMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Non-zero when precision had no candidates to divide by.
    pub precision_undefined: u8,
    pub recall_undefined: u8,
}

#[repr(C)]
#[derive(Debug, Default, Clone, Copy)]
pub struct RcqStats {
    pub n_unmatched: usize,
    pub pct_unmatched: u32,
    pub mean: f64,
    /// NaN when there is a single observation.
    pub std: f64,
    pub min: usize,
    pub p25: f64,
    pub p50: f64,
    pub max: usize,
}

#[repr(C)]
#[derive(Debug, Default, Clone, Copy)]
pub struct RcqMatchSummary {
    pub validated: usize,
    pub matched_design: usize,
    pub n_candidates: usize,
    pub n_design: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RcqStatus, String);

impl Failure {
    fn new(status: RcqStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RcqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            RcqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RcqStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RcqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(RcqStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(RcqStatus::NullPointer, format!("{what} is null")))
}

fn to_cstring(s: String) -> Result<CString, Failure> {
    CString::new(s).map_err(|_| Failure::new(RcqStatus::InvalidArgument, "string contains NUL"))
}

fn template_arg(name: &str) -> Result<TemplateId, Failure> {
    match name.parse::<TemplateId>() {
        Ok(t @ (TemplateId::P1 | TemplateId::P2 | TemplateId::P3)) => Ok(t),
        _ => Err(Failure::new(
            RcqStatus::InvalidArgument,
            format!("unknown template {name:?}"),
        )),
    }
}

/// Message for the most recent failure on this thread, or NULL. Borrowed:
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rcq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rcq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn rcq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---------------------------------------------------------------------------
// Statements

/// Parses an in-memory document and keeps statements with readable labels.
///
/// # Safety
/// `text` and `source_id` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_statements_parse(
    text: *const c_char,
    format: RcqFormat,
    source_id: *const c_char,
    out: *mut *mut RcqStatementSet,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let source = if source_id.is_null() {
            ""
        } else {
            str_arg(source_id, "source_id")?
        };
        let fmt = match format {
            RcqFormat::NTriples => RdfFormat::Ntriples,
            RcqFormat::Turtle => RdfFormat::Turtle,
        };
        let raw = parse_ontology(text, fmt).map_err(|e| Failure::new(RcqStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(RcqStatementSet(filter_statements(raw, source))));
        Ok(())
    })
}

/// Loads a `.nt` or `.ttl` file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_statements_load(path: *const c_char, out: *mut *mut RcqStatementSet) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let set = load_ontology(Path::new(path), None).map_err(|e| {
            let status = match e {
                retrofit_cq::ingest::IngestError::Io { .. } => RcqStatus::Io,
                retrofit_cq::ingest::IngestError::UnknownFormat(_) => RcqStatus::InvalidArgument,
                _ => RcqStatus::Parse,
            };
            Failure::new(status, e)
        })?;
        *out = Box::into_raw(Box::new(RcqStatementSet(set)));
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rcq_statements_free(set: *mut RcqStatementSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of kept statements; 0 for NULL.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcq_statements_len(set: *const RcqStatementSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_statements_counts(set: *const RcqStatementSet, out: *mut RcqIngestCounts) -> RcqStatus {
    guard(|| {
        let c = &ref_arg(set, "set")?.0.counts;
        *out_arg(out, "out")? = RcqIngestCounts {
            parsed: c.parsed,
            excluded_blank: c.excluded_blank,
            excluded_opaque: c.excluded_opaque,
            excluded_duplicate: c.excluded_duplicate,
            kept: c.kept,
        };
        Ok(())
    })
}

/// Writes the statement as N-Triples (one line, no trailing newline).
///
/// # Safety
/// `set` must be a live handle and `out` writable. Free the result with
/// [`rcq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rcq_statement_ntriples(
    set: *const RcqStatementSet,
    index: usize,
    out: *mut *mut c_char,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = &ref_arg(set, "set")?.0;
        let st = set
            .statements
            .get(index)
            .ok_or_else(|| Failure::new(RcqStatus::OutOfRange, format!("index {index} out of {}", set.len())))?;
        let line = retrofit_cq::ingest::ntriples::write(std::slice::from_ref(st));
        *out = to_cstring(line.trim_end().to_string())?.into_raw();
        Ok(())
    })
}

/// Renders a built-in prompt ("P1", "P2" or "P3") for one statement.
///
/// # Safety
/// `set` must be a live handle, `template` NUL-terminated and `out`
/// writable. Free the result with [`rcq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn rcq_render_prompt(
    set: *const RcqStatementSet,
    index: usize,
    template: *const c_char,
    out: *mut *mut c_char,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = &ref_arg(set, "set")?.0;
        let t = template_arg(str_arg(template, "template")?)?;
        let st = set
            .statements
            .get(index)
            .ok_or_else(|| Failure::new(RcqStatus::OutOfRange, format!("index {index} out of {}", set.len())))?;
        let p = render_prompt(&t, st).map_err(|e| Failure::new(RcqStatus::InvalidArgument, e))?;
        *out = to_cstring(p.rendered)?.into_raw();
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Question lists

#[no_mangle]
pub extern "C" fn rcq_questions_new() -> *mut RcqQuestionList {
    Box::into_raw(Box::new(RcqQuestionList { items: Vec::new() }))
}

/// # Safety
/// `list` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn rcq_questions_free(list: *mut RcqQuestionList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Appends a copy of `question`.
///
/// # Safety
/// `list` must be a live handle and `question` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rcq_questions_push(list: *mut RcqQuestionList, question: *const c_char) -> RcqStatus {
    guard(|| {
        let list = out_arg(list, "list")?;
        let q = str_arg(question, "question")?;
        list.items.push(to_cstring(q.to_string())?);
        Ok(())
    })
}

/// # Safety
/// `list` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rcq_questions_len(list: *const RcqQuestionList) -> usize {
    list.as_ref().map_or(0, |l| l.items.len())
}

/// Borrowed question text, or NULL when out of range.
///
/// # Safety
/// `list` must be NULL or a live handle. The pointer is valid until the
/// list is modified or freed.
#[no_mangle]
pub unsafe extern "C" fn rcq_questions_get(list: *const RcqQuestionList, index: usize) -> *const c_char {
    list.as_ref()
        .and_then(|l| l.items.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

fn texts(list: &RcqQuestionList) -> Vec<String> {
    list.items.iter().map(|c| c.to_string_lossy().into_owned()).collect()
}

fn list_of(items: impl IntoIterator<Item = String>) -> Result<*mut RcqQuestionList, Failure> {
    let items = items.into_iter().map(to_cstring).collect::<Result<_, _>>()?;
    Ok(Box::into_raw(Box::new(RcqQuestionList { items })))
}

/// Questions from the offline mock provider for one statement. The same
/// (seed, model, template, statement) always yields the same list.
///
/// # Safety
/// `set` must be a live handle, `template` and `model` NUL-terminated and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_mock_generate(
    set: *const RcqStatementSet,
    index: usize,
    template: *const c_char,
    model: *const c_char,
    seed: u64,
    out: *mut *mut RcqQuestionList,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let set = &ref_arg(set, "set")?.0;
        let t = template_arg(str_arg(template, "template")?)?;
        let model = str_arg(model, "model")?;
        let st = set
            .statements
            .get(index)
            .ok_or_else(|| Failure::new(RcqStatus::OutOfRange, format!("index {index} out of {}", set.len())))?;
        let prompt = render_prompt(&t, st).map_err(|e| Failure::new(RcqStatus::InvalidArgument, e))?;
        let recs = Gateway::new(seed)
            .generate(&[prompt], &ProviderConfig::mock(model), 1)
            .map_err(|e| Failure::new(RcqStatus::Generation, e))?;
        *out = list_of(recs.into_iter().flat_map(|r| r.questions))?;
        Ok(())
    })
}

/// Filters `input` and returns the kept questions in order.
/// `dedup_threshold` is a token-sort ratio in 0..=100.
///
/// # Safety
/// `input` must be a live handle and `kept` writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_filter(
    input: *const RcqQuestionList,
    strictness: RcqStrictness,
    dedup_threshold: u32,
    kept: *mut *mut RcqQuestionList,
) -> RcqStatus {
    guard(|| {
        let kept = out_arg(kept, "kept")?;
        let input = ref_arg(input, "input")?;
        let cfg = FiltrationConfig {
            strictness: match strictness {
                RcqStrictness::Off => Strictness::Off,
                RcqStrictness::Lenient => Strictness::Lenient,
                RcqStrictness::Strict => Strictness::Strict,
            },
            dedup_ratio_threshold: dedup_threshold,
            ..Default::default()
        };
        let filter = Filter::new(&cfg).map_err(|e| Failure::new(RcqStatus::InvalidArgument, e))?;
        let cands = texts(input)
            .into_iter()
            .map(|q| CandidateCQ::new(q, 0, TemplateId::P1, "ffi"))
            .collect();
        let out = filter.filter_candidates(cands);
        *kept = list_of(out.into_iter().filter(|c| c.is_kept()).map(|c| c.text))?;
        Ok(())
    })
}

/// Matches candidates against design questions with the lexical backend.
///
/// # Safety
/// Both lists must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_match(
    candidates: *const RcqQuestionList,
    design: *const RcqQuestionList,
    threshold: f64,
    out: *mut RcqMatchSummary,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cands = texts(ref_arg(candidates, "candidates")?);
        let design = DesignCQSet::new(texts(ref_arg(design, "design")?), "ffi");
        let report = match_candidates(&cands, &design, &MatcherConfig::with_threshold(threshold))
            .map_err(|e| Failure::new(RcqStatus::Matching, e))?;
        *out = RcqMatchSummary {
            validated: report.validated_count(),
            matched_design: report.matched_count(),
            n_candidates: cands.len(),
            n_design: design.len(),
        };
        Ok(())
    })
}

// ---------------------------------------------------------------------------
// Metrics

/// Precision, recall and F1 from counts.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_metrics_from_counts(
    validated: usize,
    n_candidates: usize,
    unmatched_design: usize,
    n_design: usize,
    out: *mut RcqMetrics,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if validated > n_candidates || unmatched_design > n_design {
            return Err(Failure::new(RcqStatus::InvalidArgument, "counts exceed their totals"));
        }
        let m = EvalMetrics::from_counts(validated, n_candidates, unmatched_design, n_design, 0, 0);
        *out = RcqMetrics {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            precision_undefined: m.precision_undefined as u8,
            recall_undefined: m.recall_undefined as u8,
        };
        Ok(())
    })
}

/// Descriptive statistics over word counts of unmatched design questions.
/// Writes nothing and returns `Ok` with `*has_row = 0` when `len` is 0.
///
/// # Safety
/// `word_counts` must point at `len` values (or be NULL when `len` is 0);
/// `out` and `has_row` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rcq_unmatched_stats(
    word_counts: *const usize,
    len: usize,
    n_design: usize,
    out: *mut RcqStats,
    has_row: *mut u8,
) -> RcqStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let has_row = out_arg(has_row, "has_row")?;
        let counts: &[usize] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(ref_arg(word_counts, "word_counts")?, len)
        };
        let row = unmatched_stats(counts, n_design).map_err(|e| Failure::new(RcqStatus::Metrics, e))?;
        *has_row = row.is_some() as u8;
        if let Some(r) = row {
            *out = RcqStats {
                n_unmatched: r.n_unmatched,
                pct_unmatched: r.pct_unmatched,
                mean: r.mean,
                std: r.std.unwrap_or(f64::NAN),
                min: r.min,
                p25: r.p25,
                p50: r.p50,
                max: r.max,
            };
        }
        Ok(())
    })
}
