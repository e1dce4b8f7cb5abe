//! Pure index computations over a built [`CitationGraph`].
//!
//! PaperRank of a paper is the sum, over the papers citing it, of the
//! reciprocal of each citer's reference count. AuthorRank divides each
//! paper's rank equally among its authors and sums over an author's papers,
//! which makes the global paper total and the global author total coincide.
//! The classical indicators (citation counts, h-index, i-N) and the
//! rank-based variants (h_alpha, i_beta) live here too, so reports can put
//! them side by side.
//!
//! Every sum runs in sorted-id order: results are reproducible bit for bit
//! across runs and input permutations.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{AuthorId, CitationGraph, GraphError, PaperId, PaperRecord, RefCountMode};

/// Report defaults for the rank-share thresholds.
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_BETA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("citer `{citer}` reports an empty bibliography yet cites other papers")]
    InconsistentCiter { citer: PaperId },
    #[error("profile of `{author}` lists paper `{paper}` which is not in the graph")]
    ProfilePaperMissing { author: AuthorId, paper: PaperId },
    #[error("author `{0}` appears more than once in the group")]
    DuplicateGroupAuthor(AuthorId),
    #[error("time window has from_year {from} after to_year {to}")]
    InvalidWindow { from: i32, to: i32 },
}

/// Inclusive publication-year filter. An unbounded side is open; a paper
/// with no recorded year only passes a window that is unbounded on both
/// sides.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TimeWindow {
    pub from_year: Option<i32>,
    pub to_year: Option<i32>,
}

impl TimeWindow {
    pub fn unbounded() -> Self {
        TimeWindow::default()
    }

    pub fn new(from_year: Option<i32>, to_year: Option<i32>) -> Result<Self, RankError> {
        if let (Some(from), Some(to)) = (from_year, to_year) {
            if from > to {
                return Err(RankError::InvalidWindow { from, to });
            }
        }
        Ok(TimeWindow { from_year, to_year })
    }

    pub fn is_unbounded(&self) -> bool {
        self.from_year.is_none() && self.to_year.is_none()
    }

    pub fn contains(&self, year: Option<i32>) -> bool {
        if self.is_unbounded() {
            return true;
        }
        match year {
            None => false,
            Some(y) => {
                self.from_year.is_none_or(|from| y >= from)
                    && self.to_year.is_none_or(|to| y <= to)
            }
        }
    }
}

/// How a paper's rank is split among its authors. Uniform is the only
/// implemented scheme; the enum is the extension point for order-dependent
/// splits, which must stay a discrete probability distribution per paper.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WeightingStrategy {
    #[default]
    Uniform,
}

impl WeightingStrategy {
    /// Share of one paper's rank assigned to `author`.
    fn author_share(&self, record: &PaperRecord, author: &AuthorId) -> f64 {
        match self {
            WeightingStrategy::Uniform => {
                if record.authors.contains(author) {
                    1.0 / record.author_count() as f64
                } else {
                    0.0
                }
            }
        }
    }
}

/// An author and the papers attributed to them. Papers are held sorted and
/// deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthorProfile {
    pub id: AuthorId,
    papers: Vec<PaperId>,
}

impl AuthorProfile {
    pub fn new(id: AuthorId, papers: impl IntoIterator<Item = PaperId>) -> Self {
        let mut papers: Vec<PaperId> = papers.into_iter().collect();
        papers.sort();
        papers.dedup();
        AuthorProfile { id, papers }
    }

    /// One profile per author appearing in the graph.
    pub fn all_from(graph: &CitationGraph) -> Vec<AuthorProfile> {
        graph
            .authorship()
            .into_iter()
            .map(|(id, papers)| AuthorProfile { id, papers })
            .collect()
    }

    pub fn papers(&self) -> &[PaperId] {
        &self.papers
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    /// Copy of the profile keeping only papers published inside `window`.
    pub fn restricted_to(&self, graph: &CitationGraph, window: TimeWindow) -> AuthorProfile {
        let papers = self
            .papers
            .iter()
            .filter(|p| {
                graph
                    .record(p)
                    .map(|r| window.contains(r.year))
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        AuthorProfile {
            id: self.id.clone(),
            papers,
        }
    }
}

/// PaperRank of one paper: sum over its citers (within `window`, filtered by
/// the citer's year) of 1 / ref_count(citer, mode). Terms are added in
/// sorted citer-id order.
pub fn paperrank(
    graph: &CitationGraph,
    id: &PaperId,
    mode: RefCountMode,
    window: TimeWindow,
) -> Result<f64, RankError> {
    let mut total = 0.0;
    for citer in graph.citers(id)? {
        let record = graph.record(citer)?;
        if !window.contains(record.year) {
            continue;
        }
        let refs = graph.ref_count(citer, mode)?;
        if refs == 0 {
            // Impossible in in-database mode (the citer cites `id`), so this
            // only fires on a bibliography shorter than the reference list.
            return Err(RankError::InconsistentCiter {
                citer: citer.clone(),
            });
        }
        total += 1.0 / refs as f64;
    }
    Ok(total)
}

/// PaperRank of every paper. In in-database mode this equals one
/// matrix-vector product of the citation model against the all-ones vector.
pub fn paperrank_all(
    graph: &CitationGraph,
    mode: RefCountMode,
) -> Result<BTreeMap<PaperId, f64>, RankError> {
    let mut scores = BTreeMap::new();
    for id in graph.paper_ids() {
        scores.insert(id.clone(), paperrank(graph, id, mode, TimeWindow::unbounded())?);
    }
    Ok(scores)
}

/// AuthorRank: sum over the author's papers (their own years filtered by
/// `window`) of the paper's rank times the author's share under `weighting`.
pub fn authorrank(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    mode: RefCountMode,
    weighting: WeightingStrategy,
    window: TimeWindow,
) -> Result<f64, RankError> {
    let mut total = 0.0;
    for paper in &profile.papers {
        let record = graph.record(paper).map_err(|_| RankError::ProfilePaperMissing {
            author: profile.id.clone(),
            paper: paper.clone(),
        })?;
        if !window.contains(record.year) {
            continue;
        }
        let rank = paperrank(graph, paper, mode, TimeWindow::unbounded())?;
        total += rank * weighting.author_share(record, &profile.id);
    }
    Ok(total)
}

/// Number of papers citing `id`, with the citers' years filtered by `window`.
pub fn citation_count(
    graph: &CitationGraph,
    id: &PaperId,
    window: TimeWindow,
) -> Result<usize, RankError> {
    let mut count = 0;
    for citer in graph.citers(id)? {
        if window.contains(graph.record(citer)?.year) {
            count += 1;
        }
    }
    Ok(count)
}

/// Total citations received by the profile's papers.
pub fn sum_citations(graph: &CitationGraph, profile: &AuthorProfile) -> Result<usize, RankError> {
    let mut total = 0;
    for paper in &profile.papers {
        total += citation_count(graph, paper, TimeWindow::unbounded()).map_err(|e| match e {
            RankError::Graph(GraphError::PaperNotFound(p)) => RankError::ProfilePaperMissing {
                author: profile.id.clone(),
                paper: p,
            },
            other => other,
        })?;
    }
    Ok(total)
}

/// Sum of PaperRank over the profile's papers (undivided by co-authorship).
pub fn sum_paperrank(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    mode: RefCountMode,
) -> Result<f64, RankError> {
    let mut total = 0.0;
    for paper in &profile.papers {
        total += paperrank(graph, paper, mode, TimeWindow::unbounded()).map_err(|e| match e {
            RankError::Graph(GraphError::PaperNotFound(p)) => RankError::ProfilePaperMissing {
                author: profile.id.clone(),
                paper: p,
            },
            other => other,
        })?;
    }
    Ok(total)
}

/// Largest k such that at least k of the profile's papers have at least k
/// citations.
pub fn h_index(graph: &CitationGraph, profile: &AuthorProfile) -> Result<usize, RankError> {
    let mut counts = Vec::with_capacity(profile.papers.len());
    for paper in &profile.papers {
        counts.push(citation_count(graph, paper, TimeWindow::unbounded())?);
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let mut h = 0;
    for (rank, count) in counts.iter().enumerate() {
        if *count > rank {
            h = rank + 1;
        } else {
            break;
        }
    }
    Ok(h)
}

/// Number of the profile's papers with strictly more than `threshold`
/// citations (i10, i20, ...).
pub fn i_n_index(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    threshold: usize,
) -> Result<usize, RankError> {
    let mut count = 0;
    for paper in &profile.papers {
        if citation_count(graph, paper, TimeWindow::unbounded())? > threshold {
            count += 1;
        }
    }
    Ok(count)
}

/// Citations per unit of PaperRank: the average number of citations needed
/// to raise the paper's rank by one. `None` when the paper is uncited (the
/// ratio is 0/0, a distinct signal rather than an error).
pub fn rho(
    graph: &CitationGraph,
    id: &PaperId,
    mode: RefCountMode,
) -> Result<Option<f64>, RankError> {
    let rank = paperrank(graph, id, mode, TimeWindow::unbounded())?;
    if rank == 0.0 {
        return Ok(None);
    }
    let citations = citation_count(graph, id, TimeWindow::unbounded())?;
    Ok(Some(citations as f64 / rank))
}

/// Per-paper author shares (rank / author count) for the profile, in sorted
/// paper order.
pub fn author_shares(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    mode: RefCountMode,
) -> Result<Vec<f64>, RankError> {
    let mut shares = Vec::with_capacity(profile.papers.len());
    for paper in &profile.papers {
        let record = graph.record(paper).map_err(|_| RankError::ProfilePaperMissing {
            author: profile.id.clone(),
            paper: paper.clone(),
        })?;
        let rank = paperrank(graph, paper, mode, TimeWindow::unbounded())?;
        shares.push(rank * WeightingStrategy::Uniform.author_share(record, &profile.id));
    }
    Ok(shares)
}

/// h-index analog over author shares: largest p such that at least p papers
/// have share >= alpha * p. `alpha` must be positive.
pub fn h_alpha(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    alpha: f64,
    mode: RefCountMode,
) -> Result<usize, RankError> {
    debug_assert!(alpha > 0.0);
    let shares = author_shares(graph, profile, mode)?;
    let mut best = 0;
    for p in 1..=shares.len() {
        let qualifying = shares.iter().filter(|s| **s >= alpha * p as f64).count();
        if qualifying >= p {
            best = p;
        }
    }
    Ok(best)
}

/// i-N analog over author shares: number of papers with share >= beta.
/// `beta` must be positive.
pub fn i_beta(
    graph: &CitationGraph,
    profile: &AuthorProfile,
    beta: f64,
    mode: RefCountMode,
) -> Result<usize, RankError> {
    debug_assert!(beta > 0.0);
    let shares = author_shares(graph, profile, mode)?;
    Ok(shares.iter().filter(|s| **s >= beta).count())
}

/// Combined AuthorRank of a group (research group, journal, institution):
/// the sum of the members' AuthorRank under uniform weighting.
pub fn aggregate_group(
    graph: &CitationGraph,
    profiles: &[AuthorProfile],
    mode: RefCountMode,
) -> Result<f64, RankError> {
    let mut seen = std::collections::BTreeSet::new();
    for profile in profiles {
        if !seen.insert(&profile.id) {
            return Err(RankError::DuplicateGroupAuthor(profile.id.clone()));
        }
    }
    let mut total = 0.0;
    for profile in profiles {
        total += authorrank(
            graph,
            profile,
            mode,
            WeightingStrategy::Uniform,
            TimeWindow::unbounded(),
        )?;
    }
    Ok(total)
}
