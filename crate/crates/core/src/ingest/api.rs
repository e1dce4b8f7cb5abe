//! Citation-metadata API client: three endpoints, cursor pagination,
//! rate-limit retry with exponential backoff, and query-budget accounting.
//!
//! The wire protocol is HTTP-shaped request/response over an abstract
//! [`Transport`]:
//!
//! * `author_papers?author=<id>` — the author's paper ids, one per line.
//! * `paper?id=<id>` — one full record in the snapshot line format.
//! * `citations?paper=<id>&cursor=<n>&page_size=<k>` — lines of
//!   `<citing-id> <bibliography-length>`, terminated by a control line
//!   `next <cursor>` or `end`.
//!
//! Fetching an author costs one paper-list query plus one detail query per
//! paper; fetching a paper's citations costs one query per page. The budget
//! counts successful calls only.

use std::collections::BTreeSet;
use std::fmt;
use std::io;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{AuthorId, PaperId, PaperRecord};
use crate::rank::AuthorProfile;
use crate::state::{CitationSource, RankDelta, RankState, StateError};

use super::snapshot::parse_record_line;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{resource} not found")]
    NotFound { resource: String },
    #[error("backend rejected the configured credentials")]
    Unauthorized,
    #[error("rate limit still in effect after {attempts} attempts")]
    RateLimitExhausted { attempts: u32 },
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { message: String, attempts: u32 },
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("record for paper `{paper}` does not list requested author `{author}`")]
    AuthorMismatch { paper: PaperId, author: AuthorId },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Connection settings, loadable from a `key = value` file with
/// `BIBRANK_*` environment overrides.
#[derive(Debug, Clone)]
pub struct ApiConfig {
    /// Fixture transports interpret this as a directory path.
    pub base_url: String,
    /// Never persisted anywhere; read from config or environment only.
    pub api_key: String,
    pub page_size: usize,
    /// Retries after the first attempt for retryable failures.
    pub retry_cap: u32,
    pub retry_base: Duration,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            base_url: String::new(),
            api_key: String::new(),
            page_size: 25,
            retry_cap: 3,
            retry_base: Duration::from_millis(100),
        }
    }
}

impl ApiConfig {
    pub fn from_file(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = ApiConfig::default();
        for (index, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(IngestError::Config(format!(
                    "line {}: expected `key = value`",
                    index + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "base_url" => config.base_url = value.to_owned(),
                "api_key" => config.api_key = value.to_owned(),
                "page_size" => {
                    config.page_size = value
                        .parse()
                        .map_err(|_| IngestError::Config(format!("invalid page_size `{value}`")))?
                }
                "retry_cap" => {
                    config.retry_cap = value
                        .parse()
                        .map_err(|_| IngestError::Config(format!("invalid retry_cap `{value}`")))?
                }
                "retry_base_ms" => {
                    let ms: u64 = value.parse().map_err(|_| {
                        IngestError::Config(format!("invalid retry_base_ms `{value}`"))
                    })?;
                    config.retry_base = Duration::from_millis(ms);
                }
                other => {
                    return Err(IngestError::Config(format!(
                        "line {}: unknown key `{other}`",
                        index + 1
                    )))
                }
            }
        }
        config.apply_overrides(|name| std::env::var(name).ok());
        config.validate()?;
        Ok(config)
    }

    /// Environment-style overrides, injectable for tests.
    pub fn apply_overrides(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(value) = get("BIBRANK_BASE_URL") {
            self.base_url = value;
        }
        if let Some(value) = get("BIBRANK_API_KEY") {
            self.api_key = value;
        }
        if let Some(value) = get("BIBRANK_PAGE_SIZE").and_then(|v| v.parse().ok()) {
            self.page_size = value;
        }
        if let Some(value) = get("BIBRANK_RETRY_CAP").and_then(|v| v.parse().ok()) {
            self.retry_cap = value;
        }
        if let Some(ms) = get("BIBRANK_RETRY_BASE_MS").and_then(|v| v.parse().ok()) {
            self.retry_base = Duration::from_millis(ms);
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.page_size == 0 {
            return Err(IngestError::Config("page_size must be at least 1".into()));
        }
        if self.base_url.is_empty() {
            return Err(IngestError::Config("base_url is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndpointKind {
    AuthorPapers,
    PaperDetail,
    Citations,
}

impl EndpointKind {
    pub fn path(&self) -> &'static str {
        match self {
            EndpointKind::AuthorPapers => "author_papers",
            EndpointKind::PaperDetail => "paper",
            EndpointKind::Citations => "citations",
        }
    }
}

/// One request in the wire protocol.
#[derive(Debug, Clone)]
pub struct ApiRequest {
    pub kind: EndpointKind,
    pub target: String,
    pub cursor: usize,
    pub page_size: usize,
    pub api_key: String,
}

impl fmt::Display for ApiRequest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EndpointKind::AuthorPapers => write!(f, "author_papers?author={}", self.target),
            EndpointKind::PaperDetail => write!(f, "paper?id={}", self.target),
            EndpointKind::Citations => write!(
                f,
                "citations?paper={}&cursor={}&page_size={}",
                self.target, self.cursor, self.page_size
            ),
        }
    }
}

/// Status plus raw body; statuses mirror the usual HTTP meanings
/// (200, 401, 404, 429).
#[derive(Debug, Clone)]
pub struct ApiResponse {
    pub status: u16,
    pub body: String,
}

/// Connection-level failure (retryable).
#[derive(Debug, Error)]
#[error("{0}")]
pub struct TransportError(pub String);

pub trait Transport {
    fn execute(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError>;
}

/// Per-endpoint counts of successful queries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct QueryBudget {
    pub author_lookups: usize,
    pub paper_lookups: usize,
    pub citation_pages: usize,
}

impl QueryBudget {
    pub fn total(&self) -> usize {
        self.author_lookups + self.paper_lookups + self.citation_pages
    }
}

impl fmt::Display for QueryBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} queries ({} author lookups, {} paper lookups, {} citation pages)",
            self.total(),
            self.author_lookups,
            self.paper_lookups,
            self.citation_pages
        )
    }
}

/// Client over any [`Transport`], with retry and budget accounting.
pub struct ApiClient<T: Transport> {
    config: ApiConfig,
    transport: T,
    budget: QueryBudget,
}

impl<T: Transport> ApiClient<T> {
    pub fn new(config: ApiConfig, transport: T) -> Self {
        ApiClient {
            config,
            transport,
            budget: QueryBudget::default(),
        }
    }

    pub fn budget(&self) -> QueryBudget {
        self.budget
    }

    pub fn config(&self) -> &ApiConfig {
        &self.config
    }

    fn request(&mut self, kind: EndpointKind, target: &str, cursor: usize) -> Result<ApiResponse, IngestError> {
        let request = ApiRequest {
            kind,
            target: target.to_owned(),
            cursor,
            page_size: self.config.page_size,
            api_key: self.config.api_key.clone(),
        };
        let mut attempts = 0u32;
        loop {
            attempts += 1;
            match self.transport.execute(&request) {
                Ok(response) => match response.status {
                    200 => return Ok(response),
                    401 => return Err(IngestError::Unauthorized),
                    404 => {
                        return Err(IngestError::NotFound {
                            resource: request.to_string(),
                        })
                    }
                    429 => {
                        if attempts > self.config.retry_cap {
                            return Err(IngestError::RateLimitExhausted { attempts });
                        }
                        self.backoff(attempts);
                    }
                    other => {
                        return Err(IngestError::Protocol(format!(
                            "unexpected status {other} for {request}"
                        )))
                    }
                },
                Err(TransportError(message)) => {
                    if attempts > self.config.retry_cap {
                        return Err(IngestError::Transport { message, attempts });
                    }
                    self.backoff(attempts);
                }
            }
        }
    }

    fn backoff(&self, attempt: u32) {
        let base = self.config.retry_base;
        if base.is_zero() {
            return;
        }
        let factor = 1u32 << (attempt - 1).min(8);
        std::thread::sleep(base * factor);
    }

    /// The author's profile and full paper records. Costs one paper-list
    /// query plus one detail query per paper.
    pub fn fetch_author(
        &mut self,
        author: &AuthorId,
    ) -> Result<(AuthorProfile, Vec<PaperRecord>), IngestError> {
        let listing = self.request(EndpointKind::AuthorPapers, author.as_str(), 0)?;
        self.budget.author_lookups += 1;
        let mut paper_ids: Vec<PaperId> = listing
            .body
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(PaperId::new)
            .collect();
        paper_ids.sort();
        paper_ids.dedup();

        let mut records = Vec::with_capacity(paper_ids.len());
        for id in &paper_ids {
            let detail = self.request(EndpointKind::PaperDetail, id.as_str(), 0)?;
            self.budget.paper_lookups += 1;
            let record = parse_record_line(detail.body.trim()).map_err(|message| {
                IngestError::Protocol(format!("paper {id}: {message}"))
            })?;
            if record.id != *id {
                return Err(IngestError::Protocol(format!(
                    "paper detail for `{id}` returned record `{}`",
                    record.id
                )));
            }
            if !record.authors.contains(author) {
                return Err(IngestError::AuthorMismatch {
                    paper: id.clone(),
                    author: author.clone(),
                });
            }
            records.push(record);
        }
        let profile = AuthorProfile::new(author.clone(), paper_ids);
        Ok((profile, records))
    }

    /// Full citation listing of one paper: (citing id, citer bibliography
    /// length) pairs. Costs one query per page, at least one.
    pub fn fetch_citations(
        &mut self,
        paper: &PaperId,
    ) -> Result<Vec<(PaperId, u32)>, IngestError> {
        let mut results = Vec::new();
        let mut cursor = 0usize;
        let mut seen_cursors = BTreeSet::new();
        loop {
            if !seen_cursors.insert(cursor) {
                return Err(IngestError::Protocol(format!(
                    "pagination cursor {cursor} repeated while listing citations of `{paper}`"
                )));
            }
            let page = self.request(EndpointKind::Citations, paper.as_str(), cursor)?;
            self.budget.citation_pages += 1;
            let mut next = None;
            for (index, line) in page.body.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                if line == "end" {
                    next = Some(None);
                    break;
                }
                if let Some(rest) = line.strip_prefix("next ") {
                    let value: usize = rest.parse().map_err(|_| {
                        IngestError::Protocol(format!("bad continuation cursor `{rest}`"))
                    })?;
                    next = Some(Some(value));
                    break;
                }
                let (id, biblen) = line.split_once(' ').ok_or_else(|| IngestError::Parse {
                    line: index + 1,
                    message: format!("citation line `{line}` is not `<id> <biblen>`"),
                })?;
                let biblen: u32 = biblen.trim().parse().map_err(|_| IngestError::Parse {
                    line: index + 1,
                    message: format!("bad bibliography length `{biblen}`"),
                })?;
                results.push((PaperId::new(id), biblen));
            }
            match next {
                Some(Some(value)) => cursor = value,
                Some(None) => break,
                None => {
                    return Err(IngestError::Protocol(
                        "citation page missing `next`/`end` terminator".to_owned(),
                    ))
                }
            }
        }
        Ok(results)
    }

    /// Brings `state` up to date for one author: registers unseen papers,
    /// applies unseen citations, and returns the aggregate delta.
    /// Re-running immediately yields a zero delta — novelty is decided by
    /// the (citing, cited) pairs already recorded in the state.
    pub fn sync_author(
        &mut self,
        state: &mut RankState,
        author: &AuthorId,
    ) -> Result<RankDelta, IngestError> {
        let (_profile, mut records) = self.fetch_author(author)?;
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut total = RankDelta::default();
        for record in &records {
            if !state.contains_paper(&record.id) {
                total.merge(state.apply_new_paper(record)?);
            }
            for (citer, bibliography_length) in self.fetch_citations(&record.id)? {
                if state.has_citation(&citer, &record.id) {
                    continue;
                }
                total.merge(state.apply_citation(
                    CitationSource::Reported {
                        id: &citer,
                        bibliography_length,
                    },
                    &record.id,
                )?);
            }
        }
        Ok(total)
    }
}
