//! Snapshot ingestion and synchronization against a citation-metadata API.
//!
//! Snapshots are line-delimited `key=value` records (see [`snapshot`]). The
//! API surface is the three-endpoint subset a rank computation actually
//! needs (an author's paper list, per-paper detail, and a paginated citation
//! listing), served here by a directory-backed fixture transport that can
//! also script rate-limit and failure sequences.

mod api;
mod fixture;
mod snapshot;

pub use api::{
    ApiClient, ApiConfig, ApiRequest, ApiResponse, EndpointKind, IngestError, QueryBudget,
    Transport, TransportError,
};
pub use fixture::FixtureTransport;
pub use snapshot::{
    load_snapshot, load_snapshot_path, parse_record_line, render_record_line, write_snapshot,
    LineIssue, SnapshotLoad, Strictness,
};
