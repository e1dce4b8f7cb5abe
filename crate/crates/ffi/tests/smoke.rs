//! Exercises the C ABI end to end and cross-checks every value against the
//! underlying library.

use std::ffi::{CStr, CString};
use std::ptr;

use bibrank::graph::{CitationGraph, PaperId, RefCountMode};
use bibrank::ingest::{load_snapshot, Strictness};
use bibrank::rank::{self, TimeWindow};
use bibrank_ffi::*;

const SNAPSHOT: &str = "\
id=P1 authors=A1 biblen=0 year=2001
id=P2 authors=A2 refs=P1 biblen=2 year=2002
id=P3 authors=A2,A3 refs=P1,P2 biblen=2 year=2003
id=P4 authors=A3 refs=P1 biblen=4 year=2004
";

fn cstr(text: &str) -> CString {
    CString::new(text).unwrap()
}

fn last_error() -> String {
    unsafe {
        CStr::from_ptr(br_last_error_message())
            .to_string_lossy()
            .into_owned()
    }
}

unsafe fn load_graph() -> *mut BrGraph {
    let text = cstr(SNAPSHOT);
    let mut graph: *mut BrGraph = ptr::null_mut();
    let status = br_graph_from_snapshot_text(text.as_ptr(), &mut graph);
    assert_eq!(status, BrStatus::Ok, "{}", last_error());
    assert!(!graph.is_null());
    graph
}

#[test]
fn graph_queries_match_the_library() {
    unsafe {
        let graph = load_graph();
        let mut count = 0usize;
        assert_eq!(br_graph_paper_count(graph, &mut count), BrStatus::Ok);
        assert_eq!(count, 4);

        let reference_graph = CitationGraph::build(
            load_snapshot(SNAPSHOT.as_bytes(), Strictness::Strict)
                .unwrap()
                .records,
        )
        .unwrap()
        .into_graph();

        let id = cstr("P1");
        let mut value = 0.0f64;
        assert_eq!(
            br_paper_rank(graph, id.as_ptr(), BrRefCountMode::Bibliography, &mut value),
            BrStatus::Ok
        );
        assert_eq!(value, 1.25);
        assert_eq!(
            value,
            rank::paperrank(
                &reference_graph,
                &PaperId::from("P1"),
                RefCountMode::Bibliography,
                TimeWindow::unbounded()
            )
            .unwrap()
        );
        assert_eq!(
            br_paper_rank(graph, id.as_ptr(), BrRefCountMode::InDatabase, &mut value),
            BrStatus::Ok
        );
        assert_eq!(value, 2.5);

        let author = cstr("A2");
        assert_eq!(
            br_author_rank(graph, author.as_ptr(), BrRefCountMode::Bibliography, &mut value),
            BrStatus::Ok
        );
        assert_eq!(value, 0.5);

        let mut citations = 0u64;
        assert_eq!(br_citation_count(graph, id.as_ptr(), &mut citations), BrStatus::Ok);
        assert_eq!(citations, 3);

        let mut h = 0u64;
        assert_eq!(br_h_index(graph, author.as_ptr(), &mut h), BrStatus::Ok);
        assert_eq!(h, 1);

        let mut rho = 0.0f64;
        let mut defined = false;
        assert_eq!(
            br_rho(graph, id.as_ptr(), BrRefCountMode::Bibliography, &mut rho, &mut defined),
            BrStatus::Ok
        );
        assert!(defined);
        assert!((rho - 2.4).abs() < 1e-12);

        let uncited = cstr("P4");
        assert_eq!(
            br_rho(graph, uncited.as_ptr(), BrRefCountMode::Bibliography, &mut rho, &mut defined),
            BrStatus::Ok
        );
        assert!(!defined);
        assert_eq!(rho, 0.0);

        let mut holds = false;
        let mut deviation = f64::NAN;
        assert_eq!(
            br_verify_first_step(graph, &mut holds, &mut deviation),
            BrStatus::Ok
        );
        assert!(holds);
        assert!(deviation <= 1e-12);

        br_graph_free(graph);
    }
}

#[test]
fn error_paths_set_codes_and_messages() {
    unsafe {
        let graph = load_graph();
        let mut value = 0.0f64;

        let missing = cstr("NOPE");
        let status = br_paper_rank(
            graph,
            missing.as_ptr(),
            BrRefCountMode::Bibliography,
            &mut value,
        );
        assert_eq!(status, BrStatus::NotFound);
        assert!(last_error().contains("NOPE"), "{}", last_error());

        let status = br_paper_rank(graph, ptr::null(), BrRefCountMode::Bibliography, &mut value);
        assert_eq!(status, BrStatus::NullArgument);

        let author = cstr("NOBODY");
        let status = br_author_rank(
            graph,
            author.as_ptr(),
            BrRefCountMode::Bibliography,
            &mut value,
        );
        assert_eq!(status, BrStatus::NotFound);

        let broken = cstr("id=P1 authors=A1 biblen=0\nid=P2 authors=A2 refs=P1,PX biblen=1\n");
        let mut bad: *mut BrGraph = ptr::null_mut();
        let status = br_graph_from_snapshot_text(broken.as_ptr(), &mut bad);
        assert_eq!(status, BrStatus::Parse);
        assert!(bad.is_null());

        br_graph_free(graph);
        br_graph_free(ptr::null_mut()); // tolerated
    }
}

#[test]
fn state_lifecycle_applies_the_worked_example() {
    unsafe {
        let graph = load_graph();
        let mut state: *mut BrState = ptr::null_mut();
        assert_eq!(
            br_state_init(graph, BrRefCountMode::Bibliography, &mut state),
            BrStatus::Ok
        );

        // P3 has two authors; a citation from a 5-reference paper adds 0.2
        // to the paper and 0.1 to each author.
        let citing = cstr("X");
        let cited = cstr("P3");
        let mut delta = 0.0f64;
        assert_eq!(
            br_state_apply_citation(state, citing.as_ptr(), 5, cited.as_ptr(), &mut delta),
            BrStatus::Ok
        );
        assert_eq!(delta, 0.2);

        let mut value = 0.0f64;
        assert_eq!(br_state_paper_rank(state, cited.as_ptr(), &mut value), BrStatus::Ok);
        assert_eq!(value, 0.2);
        let author = cstr("A3");
        assert_eq!(br_state_author_rank(state, author.as_ptr(), &mut value), BrStatus::Ok);
        assert_eq!(value, 0.1);

        // The same citation twice is a duplicate.
        let status =
            br_state_apply_citation(state, citing.as_ptr(), 5, cited.as_ptr(), &mut delta);
        assert_eq!(status, BrStatus::Duplicate);

        // Round trip through a file.
        let dir = tempfile::tempdir().unwrap();
        let path = cstr(dir.path().join("state.rank").to_str().unwrap());
        assert_eq!(br_state_save_file(state, path.as_ptr()), BrStatus::Ok);
        let mut reloaded: *mut BrState = ptr::null_mut();
        assert_eq!(br_state_load_file(path.as_ptr(), &mut reloaded), BrStatus::Ok);
        assert_eq!(
            br_state_paper_rank(reloaded, cited.as_ptr(), &mut value),
            BrStatus::Ok
        );
        assert_eq!(value, 0.2);

        let missing = cstr(dir.path().join("absent.rank").to_str().unwrap());
        let mut absent: *mut BrState = ptr::null_mut();
        assert_eq!(
            br_state_load_file(missing.as_ptr(), &mut absent),
            BrStatus::Io
        );

        br_state_free(reloaded);
        br_state_free(state);
        br_graph_free(graph);
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bibrank.h");
    let text = std::fs::read_to_string(&header).expect("header generated by build.rs");
    for symbol in [
        "br_graph_from_snapshot_file",
        "br_graph_from_snapshot_text",
        "br_graph_free",
        "br_graph_paper_count",
        "br_paper_rank",
        "br_author_rank",
        "br_citation_count",
        "br_h_index",
        "br_rho",
        "br_verify_first_step",
        "br_state_init",
        "br_state_apply_citation",
        "br_state_save_file",
        "br_state_load_file",
        "br_state_free",
        "br_last_error_message",
        "BrStatus",
        "BrRefCountMode",
    ] {
        assert!(text.contains(symbol), "header is missing `{symbol}`");
    }
}
