//! C ABI over `inspect-core`: load a graph, parse a query, rank, read results.
//!
//! Every fallible call returns an [`InspectStatus`]. On failure the message is
//! available from [`inspect_last_error_message`] on the same thread until the
//! next failing call. Handles are opaque and must be released with their
//! matching `_free` function; strings returned through out-parameters are
//! released with [`inspect_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use inspect_core::dsl::{self, QueryGraph};
use inspect_core::graph::{self, KnowledgeGraph};
use inspect_core::matcher::{self, RankedResults, Subject};
use inspect_core::IndicatorTaxonomy;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InspectStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Graph = 5,
    Match = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque knowledge graph.
pub struct InspectGraph {
    graph: KnowledgeGraph,
}

/// Opaque parsed query.
pub struct InspectQuery {
    query: QueryGraph,
}

/// Opaque ranked result list.
pub struct InspectResults {
    results: RankedResults,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl std::fmt::Display) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(InspectStatus, String);

fn fail<T>(status: InspectStatus, msg: impl std::fmt::Display) -> Result<T, Failure> {
    Err(Failure(status, msg.to_string()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InspectStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_error();
            InspectStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            InspectStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(InspectStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|e| fail(InspectStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(|| fail(InspectStatus::NullArgument, format!("{name} is null")), Ok)
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        fail(InspectStatus::NullArgument, format!("{name} is null"))
    } else {
        Ok(())
    }
}

fn load_taxonomy(path: Option<&str>) -> Result<IndicatorTaxonomy, Failure> {
    match path {
        Some(p) => IndicatorTaxonomy::load(Path::new(p)).or_else(|e| fail(InspectStatus::Io, e)),
        None => Ok(IndicatorTaxonomy::default_placeholder()),
    }
}

/// Message for the last failing call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn inspect_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a graph file. `taxonomy_path` may be null for the placeholder taxonomy.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_load(
    path: *const c_char,
    taxonomy_path: *const c_char,
    out: *mut *mut InspectGraph,
) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let tax_path = if taxonomy_path.is_null() { None } else { Some(str_arg(taxonomy_path, "taxonomy_path")?) };
        let tax = load_taxonomy(tax_path)?;
        let f = File::open(path).or_else(|e| fail(InspectStatus::Io, format!("{path}: {e}")))?;
        let graph = graph::load(BufReader::new(f), tax).or_else(|e| match e {
            graph::PersistError::Io(e) => fail(InspectStatus::Io, e),
            other => fail(InspectStatus::Graph, other),
        })?;
        *out = Box::into_raw(Box::new(InspectGraph { graph }));
        Ok(())
    })
}

/// Empty graph over the placeholder taxonomy, or over `taxonomy_path` when non-null.
///
/// # Safety
/// `taxonomy_path` must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_new(taxonomy_path: *const c_char, out: *mut *mut InspectGraph) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        let tax_path = if taxonomy_path.is_null() { None } else { Some(str_arg(taxonomy_path, "taxonomy_path")?) };
        let graph = KnowledgeGraph::new(load_taxonomy(tax_path)?);
        *out = Box::into_raw(Box::new(InspectGraph { graph }));
        Ok(())
    })
}

/// Applies graph-file lines. Bad lines are skipped and counted in `errors`.
/// Any of the count pointers may be null.
///
/// # Safety
/// `g` must come from this library; `lines` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_ingest(
    g: *mut InspectGraph,
    lines: *const c_char,
    nodes_added: *mut usize,
    edges_added: *mut usize,
    errors: *mut usize,
) -> InspectStatus {
    guard(|| {
        let Some(g) = g.as_mut() else { return fail(InspectStatus::NullArgument, "graph is null") };
        let report = graph::ingest_lines(&mut g.graph, str_arg(lines, "lines")?);
        for (p, v) in
            [(nodes_added, report.nodes_added), (edges_added, report.edges_added), (errors, report.errors.len())]
        {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Current graph version; 0 for a null handle.
///
/// # Safety
/// `g` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_version(g: *const InspectGraph) -> u64 {
    g.as_ref().map_or(0, |g| g.graph.version())
}

/// # Safety
/// `g` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_node_count(g: *const InspectGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.node_count())
}

/// # Safety
/// `g` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inspect_graph_free(g: *mut InspectGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses query-language text.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_query_parse(text: *const c_char, out: *mut *mut InspectQuery) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        if text.is_null() {
            return fail(InspectStatus::NullArgument, "text is null");
        }
        let bytes = CStr::from_ptr(text).to_bytes();
        let query = dsl::parse_bytes(bytes).or_else(|e| {
            let status =
                if e.kind == dsl::ErrorKind::InvalidUtf8 { InspectStatus::InvalidUtf8 } else { InspectStatus::Parse };
            fail(status, e)
        })?;
        *out = Box::into_raw(Box::new(InspectQuery { query }));
        Ok(())
    })
}

/// Canonical text form of a query. Free with [`inspect_string_free`].
///
/// # Safety
/// `q` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_query_print(q: *const InspectQuery, out: *mut *mut c_char) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        let q = ref_arg(q, "query")?;
        *out = into_c_string(dsl::print(&q.query))?;
        Ok(())
    })
}

/// # Safety
/// `q` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inspect_query_free(q: *mut InspectQuery) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// Ranks `g` against `q`. A NaN `threshold` uses the query's own; any other
/// value must lie in [0, 1].
///
/// # Safety
/// Handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_match(
    g: *const InspectGraph,
    q: *const InspectQuery,
    threshold: f64,
    out: *mut *mut InspectResults,
) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        let g = ref_arg(g, "graph")?;
        let q = ref_arg(q, "query")?;
        if !threshold.is_nan() && !(0.0..=1.0).contains(&threshold) {
            return fail(InspectStatus::OutOfRange, format!("threshold {threshold} outside [0, 1]"));
        }
        let ranked = if threshold.is_nan() {
            matcher::rank(&g.graph, &q.query)
        } else {
            matcher::rank_with_threshold(&g.graph, &q.query, threshold)
        };
        let results = ranked.or_else(|e| fail(InspectStatus::Match, e))?;
        *out = Box::into_raw(Box::new(InspectResults { results }));
        Ok(())
    })
}

/// Number of entries; 0 for a null handle.
///
/// # Safety
/// `r` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn inspect_results_len(r: *const InspectResults) -> usize {
    r.as_ref().map_or(0, |r| r.results.entries.len())
}

/// Score and seed person of entry `index`. `person` receives a string to free
/// with [`inspect_string_free`]; either out-pointer may be null.
///
/// # Safety
/// `r` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn inspect_results_get(
    r: *const InspectResults,
    index: usize,
    score: *mut f64,
    person: *mut *mut c_char,
) -> InspectStatus {
    guard(|| {
        let r = ref_arg(r, "results")?;
        let Some(entry) = r.results.entries.get(index) else {
            return fail(
                InspectStatus::OutOfRange,
                format!("index {index} out of range ({})", r.results.entries.len()),
            );
        };
        if !score.is_null() {
            *score = entry.score;
        }
        if !person.is_null() {
            let id = match &entry.subject {
                Subject::Individual { person } => person,
                Subject::Neighborhood { seed, .. } => seed,
            };
            *person = into_c_string(id.as_str().to_string())?;
        }
        Ok(())
    })
}

/// Whole result list as JSON. Free with [`inspect_string_free`].
///
/// # Safety
/// `r` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inspect_results_to_json(r: *const InspectResults, out: *mut *mut c_char) -> InspectStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = ref_arg(r, "results")?;
        let text = serde_json::to_string(&r.results).or_else(|e| fail(InspectStatus::Panic, e))?;
        *out = into_c_string(text)?;
        Ok(())
    })
}

/// # Safety
/// `r` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn inspect_results_free(r: *mut InspectResults) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn inspect_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).or_else(|e| fail(InspectStatus::InvalidUtf8, e))
}
