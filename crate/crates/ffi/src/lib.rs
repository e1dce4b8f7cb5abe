//! C ABI for the citation-ranking engine.
//!
//! Handles are opaque pointers created and released by this library; every
//! fallible call returns a [`BrStatus`] code and writes its result through
//! out-pointers. On any non-OK status the calling thread can fetch a
//! human-readable description via [`br_last_error_message`].
//!
//! The generated header lives at `include/bibrank.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bibrank::graph::{AuthorId, CitationGraph, PaperId, RefCountMode};
use bibrank::ingest::{load_snapshot, load_snapshot_path, Strictness};
use bibrank::rank::{self, AuthorProfile, TimeWindow, WeightingStrategy};
use bibrank::state::{CitationSource, RankState};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The requested paper or author is not known.
    NotFound = 3,
    /// Input could not be parsed (snapshot or state file).
    Parse = 4,
    /// The data violates a model invariant (e.g. an empty bibliography on
    /// a citing paper).
    Inconsistent = 5,
    Io = 6,
    /// Attempt to register or count something twice.
    Duplicate = 7,
    /// The operation is not available in the requested mode.
    Unavailable = 8,
    /// A caught panic; the handle remains valid but the call had no effect.
    Panic = 9,
}

/// Reference-count mode of the ranking model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrRefCountMode {
    /// Full bibliography length of the citing paper.
    Bibliography = 0,
    /// Only references resolving inside the snapshot.
    InDatabase = 1,
}

impl From<BrRefCountMode> for RefCountMode {
    fn from(mode: BrRefCountMode) -> Self {
        match mode {
            BrRefCountMode::Bibliography => RefCountMode::Bibliography,
            BrRefCountMode::InDatabase => RefCountMode::InDatabase,
        }
    }
}

/// Opaque citation-graph handle.
pub struct BrGraph {
    graph: CitationGraph,
}

/// Opaque rank-state handle.
pub struct BrState {
    state: RankState,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(text).unwrap_or_default();
    });
}

fn fail(status: BrStatus, message: impl Into<String>) -> BrStatus {
    set_error(message);
    status
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn br_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guard(body: impl FnOnce() -> BrStatus) -> BrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(BrStatus::Panic, "internal panic"),
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string or null.
unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, BrStatus> {
    if text.is_null() {
        return Err(fail(BrStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|_| fail(BrStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn write_out<T>(out: *mut T, value: T) -> BrStatus {
    if out.is_null() {
        return fail(BrStatus::NullArgument, "null output pointer");
    }
    unsafe { ptr::write(out, value) };
    BrStatus::Ok
}

fn graph_status(error: &bibrank::graph::GraphError) -> BrStatus {
    use bibrank::graph::GraphError::*;
    match error {
        PaperNotFound(_) => BrStatus::NotFound,
        DuplicatePaper(_) => BrStatus::Duplicate,
        _ => BrStatus::Inconsistent,
    }
}

fn rank_status(error: &rank::RankError) -> BrStatus {
    use rank::RankError::*;
    match error {
        Graph(inner) => graph_status(inner),
        ProfilePaperMissing { .. } => BrStatus::NotFound,
        InconsistentCiter { .. } => BrStatus::Inconsistent,
        DuplicateGroupAuthor(_) => BrStatus::Duplicate,
        InvalidWindow { .. } => BrStatus::Inconsistent,
    }
}

fn state_status(error: &bibrank::state::StateError) -> BrStatus {
    use bibrank::state::StateError::*;
    match error {
        UnknownPaper(_) | UnknownCitingPaper(_) => BrStatus::NotFound,
        DuplicatePaper(_) | DuplicateCitation { .. } => BrStatus::Duplicate,
        RefCountUnavailable(_) => BrStatus::Unavailable,
        Parse { .. } => BrStatus::Parse,
        Io(_) => BrStatus::Io,
        Rank(inner) => rank_status(inner),
        Graph(inner) => graph_status(inner),
        _ => BrStatus::Inconsistent,
    }
}

unsafe fn build_graph_out(
    records: Vec<bibrank::graph::PaperRecord>,
    out: *mut *mut BrGraph,
) -> BrStatus {
    match CitationGraph::build(records) {
        Ok(build) => write_out(
            out,
            Box::into_raw(Box::new(BrGraph {
                graph: build.graph,
            })),
        ),
        Err(error) => fail(graph_status(&error), error.to_string()),
    }
}

/// Loads a snapshot file (line-delimited `key=value` records) into a graph.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out`, when the call
/// succeeds, receives a handle that must be released with [`br_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn br_graph_from_snapshot_file(
    path: *const c_char,
    out: *mut *mut BrGraph,
) -> BrStatus {
    guard(|| {
        let path = match read_str(path) {
            Ok(value) => value,
            Err(status) => return status,
        };
        match load_snapshot_path(Path::new(path), Strictness::Strict) {
            Ok(load) => build_graph_out(load.records, out),
            Err(error) => fail(BrStatus::Parse, error.to_string()),
        }
    })
}

/// Parses snapshot text directly.
///
/// # Safety
/// As [`br_graph_from_snapshot_file`], with `text` holding the snapshot body.
#[no_mangle]
pub unsafe extern "C" fn br_graph_from_snapshot_text(
    text: *const c_char,
    out: *mut *mut BrGraph,
) -> BrStatus {
    guard(|| {
        let text = match read_str(text) {
            Ok(value) => value,
            Err(status) => return status,
        };
        match load_snapshot(text.as_bytes(), Strictness::Strict) {
            Ok(load) => build_graph_out(load.records, out),
            Err(error) => fail(BrStatus::Parse, error.to_string()),
        }
    })
}

/// Releases a graph handle. Null is ignored.
///
/// # Safety
/// `graph` must be a pointer returned by a `br_graph_*` constructor, not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn br_graph_free(graph: *mut BrGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of papers in the graph.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn br_graph_paper_count(
    graph: *const BrGraph,
    out: *mut usize,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        write_out(out, handle.graph.paper_count())
    })
}

/// PaperRank of one paper.
///
/// # Safety
/// `graph` live handle, `paper_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_paper_rank(
    graph: *const BrGraph,
    paper_id: *const c_char,
    mode: BrRefCountMode,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        let id = match read_str(paper_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        match rank::paperrank(&handle.graph, &id, mode.into(), TimeWindow::unbounded()) {
            Ok(value) => write_out(out, value),
            Err(error) => fail(rank_status(&error), error.to_string()),
        }
    })
}

/// AuthorRank of one author, over every paper of theirs in the graph.
///
/// # Safety
/// `graph` live handle, `author_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_author_rank(
    graph: *const BrGraph,
    author_id: *const c_char,
    mode: BrRefCountMode,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        let id = match read_str(author_id) {
            Ok(value) => AuthorId::new(value),
            Err(status) => return status,
        };
        let Some(profile) = AuthorProfile::all_from(&handle.graph)
            .into_iter()
            .find(|p| p.id == id)
        else {
            return fail(BrStatus::NotFound, format!("author `{id}` not found"));
        };
        match rank::authorrank(
            &handle.graph,
            &profile,
            mode.into(),
            WeightingStrategy::Uniform,
            TimeWindow::unbounded(),
        ) {
            Ok(value) => write_out(out, value),
            Err(error) => fail(rank_status(&error), error.to_string()),
        }
    })
}

/// Number of papers citing `paper_id`.
///
/// # Safety
/// `graph` live handle, `paper_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_citation_count(
    graph: *const BrGraph,
    paper_id: *const c_char,
    out: *mut u64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        let id = match read_str(paper_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        match rank::citation_count(&handle.graph, &id, TimeWindow::unbounded()) {
            Ok(value) => write_out(out, value as u64),
            Err(error) => fail(rank_status(&error), error.to_string()),
        }
    })
}

/// h-index of one author.
///
/// # Safety
/// `graph` live handle, `author_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_h_index(
    graph: *const BrGraph,
    author_id: *const c_char,
    out: *mut u64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        let id = match read_str(author_id) {
            Ok(value) => AuthorId::new(value),
            Err(status) => return status,
        };
        let Some(profile) = AuthorProfile::all_from(&handle.graph)
            .into_iter()
            .find(|p| p.id == id)
        else {
            return fail(BrStatus::NotFound, format!("author `{id}` not found"));
        };
        match rank::h_index(&handle.graph, &profile) {
            Ok(value) => write_out(out, value as u64),
            Err(error) => fail(rank_status(&error), error.to_string()),
        }
    })
}

/// Citations-per-unit-rank ratio. `*out_defined` is false for uncited
/// papers, where the ratio is 0/0 and `*out_value` is left at 0.
///
/// # Safety
/// `graph` live handle, `paper_id` NUL-terminated, out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn br_rho(
    graph: *const BrGraph,
    paper_id: *const c_char,
    mode: BrRefCountMode,
    out_value: *mut f64,
    out_defined: *mut bool,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        let id = match read_str(paper_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        match rank::rho(&handle.graph, &id, mode.into()) {
            Ok(Some(value)) => {
                let status = write_out(out_defined, true);
                if status != BrStatus::Ok {
                    return status;
                }
                write_out(out_value, value)
            }
            Ok(None) => {
                let status = write_out(out_defined, false);
                if status != BrStatus::Ok {
                    return status;
                }
                write_out(out_value, 0.0)
            }
            Err(error) => fail(rank_status(&error), error.to_string()),
        }
    })
}

/// Checks that per-paper citer sums equal one power-method step of the
/// citation matrix (in-database mode), componentwise within 1e-12.
///
/// # Safety
/// `graph` live handle, out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn br_verify_first_step(
    graph: *const BrGraph,
    out_holds: *mut bool,
    out_max_deviation: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        match bibrank::eigen::verify_first_step(&handle.graph) {
            Ok(check) => {
                let status = write_out(out_holds, check.holds);
                if status != BrStatus::Ok {
                    return status;
                }
                write_out(out_max_deviation, check.max_deviation)
            }
            Err(error) => fail(BrStatus::Inconsistent, error.to_string()),
        }
    })
}

/// Bootstraps a rank state from the graph.
///
/// # Safety
/// `graph` live handle; `out` receives a handle to release with
/// [`br_state_free`].
#[no_mangle]
pub unsafe extern "C" fn br_state_init(
    graph: *const BrGraph,
    mode: BrRefCountMode,
    out: *mut *mut BrState,
) -> BrStatus {
    guard(|| {
        let Some(handle) = graph.as_ref() else {
            return fail(BrStatus::NullArgument, "null graph handle");
        };
        match RankState::init(&handle.graph, mode.into()) {
            Ok(state) => write_out(out, Box::into_raw(Box::new(BrState { state }))),
            Err(error) => fail(state_status(&error), error.to_string()),
        }
    })
}

/// Releases a state handle. Null is ignored.
///
/// # Safety
/// `state` must be a pointer returned by a `br_state_*` constructor, not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn br_state_free(state: *mut BrState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Applies one citation reported as (citing id, citing bibliography
/// length); writes the cited paper's rank increase to `out_delta`.
/// Bibliography-mode states only.
///
/// # Safety
/// `state` live handle, id strings NUL-terminated, `out_delta` writable.
#[no_mangle]
pub unsafe extern "C" fn br_state_apply_citation(
    state: *mut BrState,
    citing_id: *const c_char,
    citing_bibliography_length: u32,
    cited_id: *const c_char,
    out_delta: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = state.as_mut() else {
            return fail(BrStatus::NullArgument, "null state handle");
        };
        let citing = match read_str(citing_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        let cited = match read_str(cited_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        let source = CitationSource::Reported {
            id: &citing,
            bibliography_length: citing_bibliography_length,
        };
        match handle.state.apply_citation(source, &cited) {
            Ok(delta) => write_out(out_delta, delta.paper_total()),
            Err(error) => fail(state_status(&error), error.to_string()),
        }
    })
}

/// Current rank of one paper in the state.
///
/// # Safety
/// `state` live handle, `paper_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_state_paper_rank(
    state: *const BrState,
    paper_id: *const c_char,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = state.as_ref() else {
            return fail(BrStatus::NullArgument, "null state handle");
        };
        let id = match read_str(paper_id) {
            Ok(value) => PaperId::new(value),
            Err(status) => return status,
        };
        match handle.state.paper(&id) {
            Some(paper) => write_out(out, paper.rank),
            None => fail(BrStatus::NotFound, format!("paper `{id}` not tracked")),
        }
    })
}

/// Current rank of one author in the state.
///
/// # Safety
/// `state` live handle, `author_id` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn br_state_author_rank(
    state: *const BrState,
    author_id: *const c_char,
    out: *mut f64,
) -> BrStatus {
    guard(|| {
        let Some(handle) = state.as_ref() else {
            return fail(BrStatus::NullArgument, "null state handle");
        };
        let id = match read_str(author_id) {
            Ok(value) => AuthorId::new(value),
            Err(status) => return status,
        };
        match handle.state.author_rank(&id) {
            Some(value) => write_out(out, value),
            None => fail(BrStatus::NotFound, format!("author `{id}` not tracked")),
        }
    })
}

/// Writes the state to a file (write-new-then-swap).
///
/// # Safety
/// `state` live handle, `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn br_state_save_file(
    state: *const BrState,
    path: *const c_char,
) -> BrStatus {
    guard(|| {
        let Some(handle) = state.as_ref() else {
            return fail(BrStatus::NullArgument, "null state handle");
        };
        let path = match read_str(path) {
            Ok(value) => value,
            Err(status) => return status,
        };
        match handle.state.save_to_path(Path::new(path)) {
            Ok(()) => BrStatus::Ok,
            Err(error) => fail(state_status(&error), error.to_string()),
        }
    })
}

/// Loads a state file previously written by [`br_state_save_file`].
///
/// # Safety
/// `path` NUL-terminated; `out` receives a handle to release with
/// [`br_state_free`].
#[no_mangle]
pub unsafe extern "C" fn br_state_load_file(
    path: *const c_char,
    out: *mut *mut BrState,
) -> BrStatus {
    guard(|| {
        let path = match read_str(path) {
            Ok(value) => value,
            Err(status) => return status,
        };
        match RankState::load_from_path(Path::new(path)) {
            Ok(state) => write_out(out, Box::into_raw(Box::new(BrState { state }))),
            Err(error) => fail(state_status(&error), error.to_string()),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_message_round_trips_through_the_thread_local() {
        set_error("boom");
        let text = unsafe { CStr::from_ptr(br_last_error_message()) };
        assert_eq!(text.to_str().unwrap(), "boom");
    }

    #[test]
    fn null_handles_are_rejected() {
        let mut count = 0usize;
        let status = unsafe { br_graph_paper_count(ptr::null(), &mut count) };
        assert_eq!(status, BrStatus::NullArgument);
    }
}
