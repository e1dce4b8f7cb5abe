//! Shared fixtures and generators for unit tests.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::graph::{CitationGraph, PaperRecord};

/// Four-paper fixture used across the crate:
/// P2 cites P1 (bibliography 2), P3 cites P1 and P2 (bibliography 2),
/// P4 cites P1 (bibliography 4), P1 cites nothing.
/// Authors: P1 by A1; P2 by A2; P3 by A2 and A3; P4 by A3.
pub fn g4_records() -> Vec<PaperRecord> {
    vec![
        PaperRecord::new("P1", &["A1"]).with_year(2001),
        PaperRecord::new("P2", &["A2"])
            .with_references(&["P1"], 2)
            .with_year(2002),
        PaperRecord::new("P3", &["A2", "A3"])
            .with_references(&["P1", "P2"], 2)
            .with_year(2003),
        PaperRecord::new("P4", &["A3"])
            .with_references(&["P1"], 4)
            .with_year(2004),
    ]
}

pub fn g4() -> CitationGraph {
    CitationGraph::build(g4_records()).unwrap().into_graph()
}

/// Directed cycle of `n` papers, each citing the next with a one-item
/// bibliography.
pub fn cycle_records(n: usize) -> Vec<PaperRecord> {
    (0..n)
        .map(|i| {
            PaperRecord::new(format!("C{i}"), &[&format!("W{i}")])
                .with_references(&[&format!("C{}", (i + 1) % n)], 1)
        })
        .collect()
}

pub fn cycle(n: usize) -> CitationGraph {
    CitationGraph::build(cycle_records(n)).unwrap().into_graph()
}

/// Seeded random record batch. References point only at lower-numbered
/// papers, so every reference resolves and batches can be replayed
/// incrementally in arrival order. Bibliography lengths exceed the resolved
/// reference count by a random slack.
pub fn random_records(seed: u64, max_papers: usize) -> Vec<PaperRecord> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_papers.max(1));
    let author_pool = (n / 2).max(2);
    let mut records = Vec::with_capacity(n);
    for i in 0..n {
        let mut authors: Vec<String> = Vec::new();
        let author_count = rng.random_range(1..=3usize).min(author_pool);
        while authors.len() < author_count {
            let candidate = format!("A{}", rng.random_range(0..author_pool));
            if !authors.contains(&candidate) {
                authors.push(candidate);
            }
        }
        let author_refs: Vec<&str> = authors.iter().map(String::as_str).collect();

        let mut references: Vec<String> = Vec::new();
        if i > 0 {
            let ref_count = rng.random_range(0..=i.min(6));
            while references.len() < ref_count {
                let candidate = format!("R{:04}", rng.random_range(0..i));
                if !references.contains(&candidate) {
                    references.push(candidate);
                }
            }
        }
        let ref_slices: Vec<&str> = references.iter().map(String::as_str).collect();
        let slack = rng.random_range(0..4u32);
        records.push(
            PaperRecord::new(format!("R{i:04}"), &author_refs)
                .with_references(&ref_slices, ref_slices.len() as u32 + slack)
                .with_year(1990 + rng.random_range(0..30)),
        );
    }
    records
}

pub fn random_graph(seed: u64, max_papers: usize) -> CitationGraph {
    CitationGraph::build(random_records(seed, max_papers))
        .unwrap()
        .into_graph()
}
