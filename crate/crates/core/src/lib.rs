//! Citation-graph ranking engine.
//!
//! Computes the PaperRank and AuthorRank indices over a citation snapshot,
//! together with the classical bibliometric indicators (citation counts,
//! h-index, i-N) they are meant to be compared against. PaperRank is the
//! first power-method step of a PageRank-style model; the [`eigen`] module
//! carries the full model as a reference oracle so the equivalence can be
//! checked on any graph. Both indices are additive, so the [`state`] module
//! can keep them up to date from per-citation deltas instead of batch
//! recomputation, and [`ingest`] feeds those deltas from snapshot files or a
//! paginated citation API.

pub mod eigen;
pub mod graph;
pub mod ingest;
pub mod rank;
pub mod report;
pub mod state;

#[cfg(test)]
pub(crate) mod testkit;

pub use graph::{
    AuthorId, CitationGraph, GraphBuild, GraphError, PaperId, PaperRecord, PrunedReference,
    RefCountMode, ValidationReport,
};
