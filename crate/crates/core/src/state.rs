//! Persistent rank store with O(delta) updates.
//!
//! Both indices are plain sums over citation edges, so a new citation moves
//! exactly one paper score (by 1 over the citing paper's reference count)
//! and the cited paper's authors (by that amount over the author count), and
//! a new paper moves exactly the papers it references. [`RankState`] keeps
//! the running totals plus the provenance needed to apply such deltas
//! without re-reading the full snapshot: per paper its reference count,
//! author list, and the set of citers already counted.
//!
//! Updates run under a single-writer discipline; `as_of` advances once per
//! applied delta, so a no-op synchronization leaves a saved state file byte
//! for byte unchanged.
//!
//! The on-disk format is line-oriented UTF-8 with scores serialized as raw
//! IEEE-754 bit patterns: a load/save round trip is exact, and
//! [`RankState::reconcile`] therefore measures algorithmic drift only.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{AuthorId, CitationGraph, GraphError, PaperId, PaperRecord, RefCountMode};
use crate::rank::{self, RankError, TimeWindow, WeightingStrategy};

/// Relative tolerance for the paper-total vs author-total integrity check.
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;

const FORMAT_HEADER: &str = "bibrank-state v1";

#[derive(Debug, Error)]
pub enum StateError {
    #[error("paper `{0}` is not tracked by this state")]
    UnknownPaper(PaperId),
    #[error("citing paper `{0}` is not tracked by this state")]
    UnknownCitingPaper(PaperId),
    #[error("paper `{0}` is already tracked")]
    DuplicatePaper(PaperId),
    #[error("citation of `{cited}` by `{citing}` is already recorded")]
    DuplicateCitation { citing: PaperId, cited: PaperId },
    #[error("citing paper `{0}` has reference count 0")]
    ZeroReferenceCount(PaperId),
    #[error(
        "citer `{0}` reported only a bibliography length; in-database mode needs its reference list"
    )]
    RefCountUnavailable(PaperId),
    #[error("paper `{0}` has no authors")]
    NoAuthors(PaperId),
    #[error("paper `{paper}` lists a duplicate entry `{entry}`")]
    DuplicateEntry { paper: PaperId, entry: String },
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("state integrity violated: {0}")]
    Integrity(String),
    #[error("id `{0}` contains whitespace or commas and cannot be serialized")]
    UnserializableId(String),
}

/// Per-paper slice of the persistent state.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperState {
    pub rank: f64,
    pub authors: Vec<AuthorId>,
    /// Reference count in the state's mode, fixed at registration.
    pub ref_count: u32,
    /// Citers already counted into `rank`: the provenance that makes
    /// re-synchronization idempotent.
    pub citers: BTreeSet<PaperId>,
}

/// The citing side of a citation delta.
#[derive(Debug, Clone, Copy)]
pub enum CitationSource<'a> {
    /// Full record of the citing paper (need not be tracked).
    Record(&'a PaperRecord),
    /// A paper already tracked by the state.
    Known(&'a PaperId),
    /// Citation-listing entry: citer id plus its bibliography length, as a
    /// citation API reports it. Carries no reference list, so it is only
    /// usable in bibliography mode.
    Reported {
        id: &'a PaperId,
        bibliography_length: u32,
    },
}

impl CitationSource<'_> {
    fn id(&self) -> &PaperId {
        match self {
            CitationSource::Record(record) => &record.id,
            CitationSource::Known(id) => id,
            CitationSource::Reported { id, .. } => id,
        }
    }
}

/// Net effect of one or more applied updates. Paper mass is redistributed
/// whole to authors: the two totals agree to rounding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RankDelta {
    pub paper_deltas: BTreeMap<PaperId, f64>,
    pub author_deltas: BTreeMap<AuthorId, f64>,
    /// References of a new paper that did not resolve in the state.
    pub skipped_references: Vec<PaperId>,
    /// References of a new paper whose citation was already counted via an
    /// earlier reported citation.
    pub deduplicated_references: Vec<PaperId>,
}

impl RankDelta {
    pub fn paper_total(&self) -> f64 {
        // + 0.0 turns the empty-sum identity -0.0 into 0.0
        self.paper_deltas.values().sum::<f64>() + 0.0
    }

    pub fn author_total(&self) -> f64 {
        self.author_deltas.values().sum::<f64>() + 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.paper_deltas.is_empty() && self.author_deltas.is_empty()
    }

    pub fn merge(&mut self, other: RankDelta) {
        for (id, delta) in other.paper_deltas {
            *self.paper_deltas.entry(id).or_insert(0.0) += delta;
        }
        for (id, delta) in other.author_deltas {
            *self.author_deltas.entry(id).or_insert(0.0) += delta;
        }
        self.skipped_references.extend(other.skipped_references);
        self.deduplicated_references
            .extend(other.deduplicated_references);
    }
}

/// Componentwise comparison of an incrementally maintained state against a
/// batch recomputation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DriftReport {
    pub max_paper_drift: f64,
    pub max_author_drift: f64,
    pub papers_missing_from_state: usize,
    pub papers_unknown_to_graph: usize,
    pub authors_missing_from_state: usize,
    pub authors_unknown_to_graph: usize,
}

impl DriftReport {
    pub fn max_drift(&self) -> f64 {
        self.max_paper_drift.max(self.max_author_drift)
    }

    pub fn structurally_equal(&self) -> bool {
        self.papers_missing_from_state == 0
            && self.papers_unknown_to_graph == 0
            && self.authors_missing_from_state == 0
            && self.authors_unknown_to_graph == 0
    }
}

/// Persistent index store: per-paper and per-author scores plus update
/// provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RankState {
    mode: RefCountMode,
    as_of: u64,
    papers: BTreeMap<PaperId, PaperState>,
    authors: BTreeMap<AuthorId, f64>,
}

impl RankState {
    /// Batch bootstrap: scores equal the pure per-paper and per-author
    /// computations on `graph`, provenance is seeded with the graph's
    /// citation edges.
    pub fn init(graph: &CitationGraph, mode: RefCountMode) -> Result<Self, StateError> {
        let ranks = rank::paperrank_all(graph, mode)?;
        let mut papers = BTreeMap::new();
        for record in graph.records() {
            papers.insert(
                record.id.clone(),
                PaperState {
                    rank: ranks[&record.id],
                    authors: record.authors.clone(),
                    ref_count: graph.ref_count(&record.id, mode)?,
                    citers: graph.citers(&record.id)?.iter().cloned().collect(),
                },
            );
        }
        let mut authors = BTreeMap::new();
        for profile in rank::AuthorProfile::all_from(graph) {
            let score = rank::authorrank(
                graph,
                &profile,
                mode,
                WeightingStrategy::Uniform,
                TimeWindow::unbounded(),
            )?;
            authors.insert(profile.id.clone(), score);
        }
        Ok(RankState {
            mode,
            as_of: 0,
            papers,
            authors,
        })
    }

    pub fn mode(&self) -> RefCountMode {
        self.mode
    }

    pub fn version(&self) -> u64 {
        self.as_of
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn contains_paper(&self, id: &PaperId) -> bool {
        self.papers.contains_key(id)
    }

    pub fn paper(&self, id: &PaperId) -> Option<&PaperState> {
        self.papers.get(id)
    }

    pub fn papers(&self) -> impl Iterator<Item = (&PaperId, &PaperState)> {
        self.papers.iter()
    }

    pub fn author_rank(&self, id: &AuthorId) -> Option<f64> {
        self.authors.get(id).copied()
    }

    pub fn authors(&self) -> impl Iterator<Item = (&AuthorId, f64)> {
        self.authors.iter().map(|(id, rank)| (id, *rank))
    }

    pub fn paper_total(&self) -> f64 {
        self.papers.values().map(|p| p.rank).sum()
    }

    pub fn author_total(&self) -> f64 {
        self.authors.values().sum()
    }

    /// True when the citation (citing → cited) is already part of the state.
    pub fn has_citation(&self, citing: &PaperId, cited: &PaperId) -> bool {
        self.papers
            .get(cited)
            .map(|p| p.citers.contains(citing))
            .unwrap_or(false)
    }

    fn resolve_ref_count(&self, citing: &CitationSource<'_>) -> Result<u32, StateError> {
        let count = match (citing, self.mode) {
            (CitationSource::Record(record), RefCountMode::Bibliography) => {
                record.bibliography_length
            }
            (CitationSource::Record(record), RefCountMode::InDatabase) => {
                record.references.len() as u32
            }
            (CitationSource::Known(id), _) => {
                self.papers
                    .get(id)
                    .ok_or_else(|| StateError::UnknownCitingPaper((*id).clone()))?
                    .ref_count
            }
            (CitationSource::Reported { bibliography_length, .. }, RefCountMode::Bibliography) => {
                *bibliography_length
            }
            (CitationSource::Reported { id, .. }, RefCountMode::InDatabase) => {
                return Err(StateError::RefCountUnavailable((*id).clone()))
            }
        };
        if count == 0 {
            return Err(StateError::ZeroReferenceCount(citing.id().clone()));
        }
        Ok(count)
    }

    /// Applies one new citation: the cited paper gains 1 over the citing
    /// paper's reference count, each of its authors gains that amount over
    /// the author count.
    pub fn apply_citation(
        &mut self,
        citing: CitationSource<'_>,
        cited: &PaperId,
    ) -> Result<RankDelta, StateError> {
        let ref_count = self.resolve_ref_count(&citing)?;
        let citing_id = citing.id().clone();
        let entry = self
            .papers
            .get_mut(cited)
            .ok_or_else(|| StateError::UnknownPaper(cited.clone()))?;
        if entry.citers.contains(&citing_id) {
            return Err(StateError::DuplicateCitation {
                citing: citing_id,
                cited: cited.clone(),
            });
        }

        let delta = 1.0 / ref_count as f64;
        let share = delta / entry.authors.len() as f64;
        entry.rank += delta;
        entry.citers.insert(citing_id);
        let cited_authors = entry.authors.clone();

        let mut result = RankDelta::default();
        result.paper_deltas.insert(cited.clone(), delta);
        for author in cited_authors {
            *self.authors.entry(author.clone()).or_insert(0.0) += share;
            *result.author_deltas.entry(author).or_insert(0.0) += share;
        }
        self.as_of += 1;
        Ok(result)
    }

    /// Registers a newly indexed paper at rank 0 and credits every tracked
    /// paper in its reference list with 1 over the new paper's reference
    /// count. References that do not resolve are skipped and reported;
    /// references whose citation was already counted (reported earlier by a
    /// citation listing) are deduplicated.
    pub fn apply_new_paper(&mut self, record: &PaperRecord) -> Result<RankDelta, StateError> {
        if self.papers.contains_key(&record.id) {
            return Err(StateError::DuplicatePaper(record.id.clone()));
        }
        if record.authors.is_empty() {
            return Err(StateError::NoAuthors(record.id.clone()));
        }
        let mut seen = BTreeSet::new();
        for author in &record.authors {
            if !seen.insert(author.as_str()) {
                return Err(StateError::DuplicateEntry {
                    paper: record.id.clone(),
                    entry: author.to_string(),
                });
            }
        }
        let mut references: Vec<&PaperId> = record.references.iter().collect();
        references.sort();
        if references.windows(2).any(|w| w[0] == w[1]) {
            return Err(StateError::DuplicateEntry {
                paper: record.id.clone(),
                entry: "reference".to_owned(),
            });
        }
        let ref_count = match self.mode {
            RefCountMode::Bibliography => record.bibliography_length,
            RefCountMode::InDatabase => record.references.len() as u32,
        };
        if !record.references.is_empty() && ref_count == 0 {
            return Err(StateError::ZeroReferenceCount(record.id.clone()));
        }

        // Register first so a self-citation resolves like any other edge.
        self.papers.insert(
            record.id.clone(),
            PaperState {
                rank: 0.0,
                authors: record.authors.clone(),
                ref_count,
                citers: BTreeSet::new(),
            },
        );
        for author in &record.authors {
            self.authors.entry(author.clone()).or_insert(0.0);
        }

        let mut result = RankDelta::default();
        let delta = if ref_count == 0 {
            0.0
        } else {
            1.0 / ref_count as f64
        };
        for reference in references {
            let Some(entry) = self.papers.get_mut(reference) else {
                result.skipped_references.push(reference.clone());
                continue;
            };
            if entry.citers.contains(&record.id) {
                result.deduplicated_references.push(reference.clone());
                continue;
            }
            let share = delta / entry.authors.len() as f64;
            entry.rank += delta;
            entry.citers.insert(record.id.clone());
            let authors = entry.authors.clone();
            result.paper_deltas.insert(reference.clone(), delta);
            for author in authors {
                *self.authors.entry(author.clone()).or_insert(0.0) += share;
                *result.author_deltas.entry(author).or_insert(0.0) += share;
            }
        }
        self.as_of += 1;
        Ok(result)
    }

    /// Read-only comparison against a batch bootstrap on `graph`.
    pub fn reconcile(&self, graph: &CitationGraph) -> Result<DriftReport, StateError> {
        let batch = RankState::init(graph, self.mode)?;
        let mut report = DriftReport::default();
        for (id, paper) in &self.papers {
            match batch.papers.get(id) {
                Some(reference) => {
                    report.max_paper_drift = report
                        .max_paper_drift
                        .max((paper.rank - reference.rank).abs());
                }
                None => report.papers_unknown_to_graph += 1,
            }
        }
        report.papers_missing_from_state = batch
            .papers
            .keys()
            .filter(|id| !self.papers.contains_key(*id))
            .count();
        for (id, rank) in &self.authors {
            match batch.authors.get(id) {
                Some(reference) => {
                    report.max_author_drift =
                        report.max_author_drift.max((rank - reference).abs());
                }
                None => report.authors_unknown_to_graph += 1,
            }
        }
        report.authors_missing_from_state = batch
            .authors
            .keys()
            .filter(|id| !self.authors.contains_key(*id))
            .count();
        Ok(report)
    }

    /// Writes the state in the versioned line format. Scores are serialized
    /// as raw bit patterns, so the round trip is exact.
    pub fn save(&self, sink: &mut impl Write) -> Result<(), StateError> {
        writeln!(sink, "{FORMAT_HEADER}")?;
        writeln!(sink, "mode {}", self.mode)?;
        writeln!(sink, "as_of {}", self.as_of)?;
        writeln!(sink, "papers {}", self.papers.len())?;
        for (id, paper) in &self.papers {
            let authors = paper
                .authors
                .iter()
                .map(|a| serializable_id(a.as_str()))
                .collect::<Result<Vec<_>, _>>()?
                .join(",");
            let citers = if paper.citers.is_empty() {
                "-".to_owned()
            } else {
                paper
                    .citers
                    .iter()
                    .map(|c| serializable_id(c.as_str()))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(",")
            };
            writeln!(
                sink,
                "paper {} rank {} refs {} authors {} citers {}",
                serializable_id(id.as_str())?,
                float_bits(paper.rank),
                paper.ref_count,
                authors,
                citers,
            )?;
        }
        writeln!(sink, "authors {}", self.authors.len())?;
        for (id, rank) in &self.authors {
            writeln!(
                sink,
                "author {} rank {}",
                serializable_id(id.as_str())?,
                float_bits(*rank)
            )?;
        }
        writeln!(
            sink,
            "sums {} {}",
            float_bits(self.paper_total()),
            float_bits(self.author_total())
        )?;
        writeln!(sink, "end")?;
        Ok(())
    }

    /// Atomic file save: write to a sibling temporary file, then rename over
    /// the target.
    pub fn save_to_path(&self, path: &Path) -> Result<(), StateError> {
        let mut buffer = Vec::new();
        self.save(&mut buffer)?;
        let mut tmp = path.to_path_buf();
        let file_name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "state".to_owned());
        tmp.set_file_name(format!("{file_name}.tmp"));
        fs::write(&tmp, &buffer)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Parses a saved state, verifying the footer sums bit for bit and the
    /// paper/author conservation within [`CONSERVATION_TOLERANCE`].
    pub fn load(source: &mut impl Read) -> Result<Self, StateError> {
        let reader = BufReader::new(source);
        let mut lines = reader.lines().enumerate();

        let mut next_line = |expected: &str| -> Result<(usize, String), StateError> {
            match lines.next() {
                Some((index, Ok(line))) => Ok((index + 1, line)),
                Some((index, Err(err))) => Err(StateError::Parse {
                    line: index + 1,
                    message: err.to_string(),
                }),
                None => Err(StateError::Parse {
                    line: 0,
                    message: format!("unexpected end of input, expected {expected}"),
                }),
            }
        };

        let (line_no, header) = next_line("format header")?;
        if header != FORMAT_HEADER {
            return Err(StateError::Parse {
                line: line_no,
                message: format!("unsupported header `{header}`"),
            });
        }
        let (line_no, mode_line) = next_line("mode")?;
        let mode: RefCountMode = mode_line
            .strip_prefix("mode ")
            .ok_or_else(|| StateError::Parse {
                line: line_no,
                message: "expected `mode <bibliography|indb>`".to_owned(),
            })?
            .parse()
            .map_err(|message| StateError::Parse {
                line: line_no,
                message,
            })?;
        let (line_no, as_of_line) = next_line("as_of")?;
        let as_of: u64 = parse_prefixed(&as_of_line, "as_of ", line_no)?;
        let (line_no, papers_line) = next_line("paper count")?;
        let paper_count: usize = parse_prefixed(&papers_line, "papers ", line_no)?;

        let mut papers = BTreeMap::new();
        for _ in 0..paper_count {
            let (line_no, line) = next_line("paper record")?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 10
                || parts[0] != "paper"
                || parts[2] != "rank"
                || parts[4] != "refs"
                || parts[6] != "authors"
                || parts[8] != "citers"
            {
                return Err(StateError::Parse {
                    line: line_no,
                    message: "malformed paper record".to_owned(),
                });
            }
            let id = PaperId::new(parts[1]);
            let rank = parse_float_bits(parts[3], line_no)?;
            let ref_count: u32 = parts[5].parse().map_err(|_| StateError::Parse {
                line: line_no,
                message: "invalid reference count".to_owned(),
            })?;
            let authors: Vec<AuthorId> = parts[7]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(AuthorId::new)
                .collect();
            if authors.is_empty() {
                return Err(StateError::Parse {
                    line: line_no,
                    message: format!("paper `{id}` has no authors"),
                });
            }
            let citers: BTreeSet<PaperId> = if parts[9] == "-" {
                BTreeSet::new()
            } else {
                parts[9]
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(PaperId::new)
                    .collect()
            };
            if papers
                .insert(
                    id.clone(),
                    PaperState {
                        rank,
                        authors,
                        ref_count,
                        citers,
                    },
                )
                .is_some()
            {
                return Err(StateError::Parse {
                    line: line_no,
                    message: format!("duplicate paper `{id}`"),
                });
            }
        }

        let (line_no, authors_line) = next_line("author count")?;
        let author_count: usize = parse_prefixed(&authors_line, "authors ", line_no)?;
        let mut authors = BTreeMap::new();
        for _ in 0..author_count {
            let (line_no, line) = next_line("author record")?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 || parts[0] != "author" || parts[2] != "rank" {
                return Err(StateError::Parse {
                    line: line_no,
                    message: "malformed author record".to_owned(),
                });
            }
            let id = AuthorId::new(parts[1]);
            let rank = parse_float_bits(parts[3], line_no)?;
            if authors.insert(id.clone(), rank).is_some() {
                return Err(StateError::Parse {
                    line: line_no,
                    message: format!("duplicate author `{id}`"),
                });
            }
        }

        let (line_no, sums_line) = next_line("sums footer")?;
        let sums: Vec<&str> = sums_line.split(' ').collect();
        if sums.len() != 3 || sums[0] != "sums" {
            return Err(StateError::Parse {
                line: line_no,
                message: "malformed sums footer".to_owned(),
            });
        }
        let recorded_paper_total = parse_float_bits(sums[1], line_no)?;
        let recorded_author_total = parse_float_bits(sums[2], line_no)?;
        let (line_no, end_line) = next_line("end marker")?;
        if end_line != "end" {
            return Err(StateError::Parse {
                line: line_no,
                message: "missing end marker".to_owned(),
            });
        }

        let state = RankState {
            mode,
            as_of,
            papers,
            authors,
        };
        let paper_total = state.paper_total();
        let author_total = state.author_total();
        if paper_total.to_bits() != recorded_paper_total.to_bits()
            || author_total.to_bits() != recorded_author_total.to_bits()
        {
            return Err(StateError::Integrity(format!(
                "footer sums do not match recomputed totals ({paper_total} vs {recorded_paper_total}, {author_total} vs {recorded_author_total})"
            )));
        }
        let scale = paper_total.abs().max(author_total.abs()).max(1.0);
        if (paper_total - author_total).abs() > CONSERVATION_TOLERANCE * scale {
            return Err(StateError::Integrity(format!(
                "paper total {paper_total} and author total {author_total} disagree beyond tolerance"
            )));
        }
        Ok(state)
    }

    pub fn load_from_path(path: &Path) -> Result<Self, StateError> {
        let mut file = fs::File::open(path)?;
        RankState::load(&mut file)
    }
}

fn float_bits(value: f64) -> String {
    format!("{:016X}", value.to_bits())
}

fn parse_float_bits(text: &str, line: usize) -> Result<f64, StateError> {
    u64::from_str_radix(text, 16)
        .map(f64::from_bits)
        .map_err(|_| StateError::Parse {
            line,
            message: format!("invalid score bits `{text}`"),
        })
}

fn parse_prefixed<T: std::str::FromStr>(
    line_text: &str,
    prefix: &str,
    line: usize,
) -> Result<T, StateError> {
    line_text
        .strip_prefix(prefix)
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| StateError::Parse {
            line,
            message: format!("expected `{}<value>`", prefix),
        })
}

fn serializable_id(id: &str) -> Result<&str, StateError> {
    if id.is_empty() || id.contains(char::is_whitespace) || id.contains(',') {
        return Err(StateError::UnserializableId(id.to_owned()));
    }
    Ok(id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CitationGraph;
    use crate::testkit::{cycle, g4, random_records};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pid(s: &str) -> PaperId {
        PaperId::from(s)
    }

    fn aid(s: &str) -> AuthorId {
        AuthorId::from(s)
    }

    #[test]
    fn init_matches_batch_computation() {
        let state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        assert_eq!(state.paper(&pid("P1")).unwrap().rank, 1.25);
        assert_eq!(state.paper(&pid("P2")).unwrap().rank, 0.5);
        assert_eq!(state.paper(&pid("P3")).unwrap().rank, 0.0);
        assert_eq!(state.paper(&pid("P4")).unwrap().rank, 0.0);
        assert_eq!(state.author_rank(&aid("A1")), Some(1.25));
        assert_eq!(state.author_rank(&aid("A2")), Some(0.5));
        assert_eq!(state.author_rank(&aid("A3")), Some(0.0));
        assert_eq!(state.version(), 0);

        let empty = CitationGraph::build(Vec::new()).unwrap().into_graph();
        let state = RankState::init(&empty, RefCountMode::InDatabase).unwrap();
        assert_eq!(state.paper_count(), 0);

        let ring = RankState::init(&cycle(3), RefCountMode::InDatabase).unwrap();
        for (_, paper) in ring.papers() {
            assert_eq!(paper.rank, 1.0);
        }
    }

    #[test]
    fn worked_update_example_is_exact() {
        // Paper at rank 2 with two authors, one author at rank 10; a
        // citation from a 5-reference paper moves them to 2.2 and 10.1.
        let mut records = vec![PaperRecord::new("S", &["A", "B"])];
        records.push(PaperRecord::new("S-c1", &["Z1"]).with_references(&["S"], 1));
        records.push(PaperRecord::new("S-c2", &["Z2"]).with_references(&["S"], 1));
        for i in 0..9 {
            records.push(PaperRecord::new(format!("W{i}"), &["A"]));
            records.push(
                PaperRecord::new(format!("W{i}-c"), &[&format!("Y{i}")])
                    .with_references(&[&format!("W{i}")], 1),
            );
        }
        let graph = CitationGraph::build(records).unwrap().into_graph();
        let mut state = RankState::init(&graph, RefCountMode::Bibliography).unwrap();
        assert_eq!(state.paper(&pid("S")).unwrap().rank, 2.0);
        assert_eq!(state.author_rank(&aid("A")), Some(10.0));

        let citer = pid("FRESH");
        let delta = state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 5,
                },
                &pid("S"),
            )
            .unwrap();
        assert!((state.paper(&pid("S")).unwrap().rank - 2.2).abs() < 1e-15);
        assert!((state.author_rank(&aid("A")).unwrap() - 10.1).abs() < 1e-15);
        assert_eq!(delta.paper_deltas[&pid("S")], 0.2);
        assert_eq!(delta.author_deltas[&aid("A")], 0.1);
        assert_eq!(state.version(), 1);
    }

    #[test]
    fn single_reference_citer_contributes_one() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("SOLO");
        let delta = state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 1,
                },
                &pid("P4"),
            )
            .unwrap();
        assert_eq!(delta.paper_deltas[&pid("P4")], 1.0);
        assert_eq!(state.paper(&pid("P4")).unwrap().rank, 1.0);
    }

    #[test]
    fn citation_of_an_uncited_paper_credits_its_author() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("N");
        state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 4,
                },
                &pid("P4"),
            )
            .unwrap();
        assert_eq!(state.paper(&pid("P4")).unwrap().rank, 0.25);
        assert_eq!(state.author_rank(&aid("A3")), Some(0.25));
    }

    #[test]
    fn citation_errors_are_reported() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("C");
        assert!(matches!(
            state.apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 5
                },
                &pid("NOPE")
            ),
            Err(StateError::UnknownPaper(_))
        ));
        assert!(matches!(
            state.apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 0
                },
                &pid("P1")
            ),
            Err(StateError::ZeroReferenceCount(_))
        ));
        // P2 already cites P1 in the bootstrap graph.
        let p2 = pid("P2");
        assert!(matches!(
            state.apply_citation(CitationSource::Known(&p2), &pid("P1")),
            Err(StateError::DuplicateCitation { .. })
        ));
        // Reported citers cannot be used in in-database mode.
        let mut db_state = RankState::init(&g4(), RefCountMode::InDatabase).unwrap();
        assert!(matches!(
            db_state.apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 5
                },
                &pid("P1")
            ),
            Err(StateError::RefCountUnavailable(_))
        ));
    }

    #[test]
    fn new_paper_spreads_unit_mass_over_reference_list() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let record = PaperRecord::new("N", &["AN"]).with_references(&["P1", "P2"], 2);
        let delta = state.apply_new_paper(&record).unwrap();
        assert_eq!(delta.paper_deltas[&pid("P1")], 0.5);
        assert_eq!(delta.paper_deltas[&pid("P2")], 0.5);
        assert!((delta.paper_total() - 1.0).abs() < 1e-15);
        assert!(state.contains_paper(&pid("N")));
        assert_eq!(state.paper(&pid("N")).unwrap().rank, 0.0);
        assert_eq!(state.author_rank(&aid("AN")), Some(0.0));
    }

    #[test]
    fn new_paper_without_tracked_references_registers_quietly() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let record = PaperRecord::new("N", &["AN"]).with_references(&[], 7);
        let delta = state.apply_new_paper(&record).unwrap();
        assert!(delta.is_zero());
        assert!(state.contains_paper(&pid("N")));
    }

    #[test]
    fn new_paper_with_partial_coverage_moves_partial_mass() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let record = PaperRecord::new("N", &["AN"]).with_references(&["P1", "GONE"], 4);
        let delta = state.apply_new_paper(&record).unwrap();
        assert_eq!(delta.paper_deltas[&pid("P1")], 0.25);
        assert_eq!(delta.skipped_references, vec![pid("GONE")]);
        assert!((delta.paper_total() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let record = PaperRecord::new("P1", &["A1"]);
        assert!(matches!(
            state.apply_new_paper(&record),
            Err(StateError::DuplicatePaper(_))
        ));
    }

    #[test]
    fn reported_citation_then_registration_does_not_double_count() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("N");
        state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 2,
                },
                &pid("P1"),
            )
            .unwrap();
        let before = state.paper(&pid("P1")).unwrap().rank;

        let record = PaperRecord::new("N", &["AN"]).with_references(&["P1", "P2"], 2);
        let delta = state.apply_new_paper(&record).unwrap();
        assert_eq!(state.paper(&pid("P1")).unwrap().rank, before);
        assert_eq!(delta.deduplicated_references, vec![pid("P1")]);
        assert_eq!(delta.paper_deltas.get(&pid("P1")), None);
        assert_eq!(delta.paper_deltas[&pid("P2")], 0.5);
    }

    #[test]
    fn self_citing_new_paper_credits_itself() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let record = PaperRecord::new("SELF", &["AS"]).with_references(&["SELF", "P1"], 2);
        let delta = state.apply_new_paper(&record).unwrap();
        assert_eq!(delta.paper_deltas[&pid("SELF")], 0.5);
        assert_eq!(state.paper(&pid("SELF")).unwrap().rank, 0.5);
        assert_eq!(state.author_rank(&aid("AS")), Some(0.5));
    }

    #[test]
    fn every_update_preserves_conservation_and_monotonicity() {
        let mut rng = StdRng::seed_from_u64(7);
        for mode in [RefCountMode::Bibliography, RefCountMode::InDatabase] {
            let mut state = RankState::init(&g4(), mode).unwrap();
            for step in 0..50 {
                let before: BTreeMap<PaperId, f64> = state
                    .papers()
                    .map(|(id, p)| (id.clone(), p.rank))
                    .collect();
                if rng.random_bool(0.5) {
                    let targets: Vec<PaperId> =
                        state.papers().map(|(id, _)| id.clone()).collect();
                    let target = targets[rng.random_range(0..targets.len())].clone();
                    let citer = pid(&format!("EXT{step}"));
                    let source = PaperRecord::new(format!("EXT{step}"), &["X"])
                        .with_references(&[target.as_str()], rng.random_range(1..6));
                    state
                        .apply_citation(CitationSource::Record(&source), &target)
                        .unwrap();
                    let _ = citer;
                } else {
                    let targets: Vec<String> = state
                        .papers()
                        .map(|(id, _)| id.as_str().to_owned())
                        .take(rng.random_range(1..4usize))
                        .collect();
                    let refs: Vec<&str> = targets.iter().map(String::as_str).collect();
                    let record = PaperRecord::new(format!("NEW{step}"), &["Y", "Z"])
                        .with_references(&refs, refs.len() as u32 + rng.random_range(0..3));
                    state.apply_new_paper(&record).unwrap();
                }
                let paper_total = state.paper_total();
                let author_total = state.author_total();
                let scale = paper_total.abs().max(1.0);
                assert!((paper_total - author_total).abs() <= 1e-9 * scale);
                for (id, old) in &before {
                    assert!(state.paper(id).unwrap().rank >= *old - 1e-15);
                }
            }
        }
    }

    #[test]
    fn delta_redistributes_paper_mass_to_authors_exactly() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("T");
        let delta = state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 3,
                },
                &pid("P3"),
            )
            .unwrap();
        // P3 has two authors; each receives half of the paper delta.
        assert_eq!(delta.paper_deltas.len(), 1);
        assert_eq!(delta.author_deltas.len(), 2);
        assert!((delta.paper_total() - delta.author_total()).abs() <= 1e-12);
    }

    #[test]
    fn bootstrap_plus_missing_edge_replay_matches_batch() {
        // Build g4 minus the P4→P1 edge, bootstrap, then apply it.
        let records = vec![
            PaperRecord::new("P1", &["A1"]).with_year(2001),
            PaperRecord::new("P2", &["A2"])
                .with_references(&["P1"], 2)
                .with_year(2002),
            PaperRecord::new("P3", &["A2", "A3"])
                .with_references(&["P1", "P2"], 2)
                .with_year(2003),
            PaperRecord::new("P4", &["A3"]).with_references(&[], 4).with_year(2004),
        ];
        let partial = CitationGraph::build(records).unwrap().into_graph();
        let mut state = RankState::init(&partial, RefCountMode::Bibliography).unwrap();
        let p4 = pid("P4");
        state
            .apply_citation(CitationSource::Known(&p4), &pid("P1"))
            .unwrap();

        let drift = state.reconcile(&g4()).unwrap();
        assert!(drift.structurally_equal());
        assert!(drift.max_drift() <= 1e-12, "drift {}", drift.max_drift());
    }

    #[test]
    fn reconcile_against_own_bootstrap_is_exact() {
        let graph = g4();
        let state = RankState::init(&graph, RefCountMode::InDatabase).unwrap();
        let drift = state.reconcile(&graph).unwrap();
        assert_eq!(drift.max_drift(), 0.0);
        assert!(drift.structurally_equal());
    }

    #[test]
    fn randomized_replay_stays_within_tolerance() {
        for seed in 0..5u64 {
            let records = random_records(seed, 80);
            let bootstrap_size = records.len() / 2;
            let bootstrap = CitationGraph::build(records[..bootstrap_size].to_vec())
                .unwrap()
                .into_graph();
            let full = CitationGraph::build(records.clone()).unwrap().into_graph();

            for mode in [RefCountMode::Bibliography, RefCountMode::InDatabase] {
                let mut state = RankState::init(&bootstrap, mode).unwrap();
                // Arrival order: records reference only lower indices.
                for record in &records[bootstrap_size..] {
                    state.apply_new_paper(record).unwrap();
                }
                let drift = state.reconcile(&full).unwrap();
                assert!(drift.structurally_equal());
                assert!(
                    drift.max_drift() <= 1e-9,
                    "seed {seed} mode {mode}: drift {}",
                    drift.max_drift()
                );
            }
        }
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let mut state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let citer = pid("EXTRA");
        state
            .apply_citation(
                CitationSource::Reported {
                    id: &citer,
                    bibliography_length: 7,
                },
                &pid("P2"),
            )
            .unwrap();

        let mut buffer = Vec::new();
        state.save(&mut buffer).unwrap();
        let reloaded = RankState::load(&mut buffer.as_slice()).unwrap();
        assert_eq!(state, reloaded);

        let mut twice = Vec::new();
        reloaded.save(&mut twice).unwrap();
        assert_eq!(buffer, twice);
    }

    #[test]
    fn truncated_input_is_a_parse_error() {
        let state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let mut buffer = Vec::new();
        state.save(&mut buffer).unwrap();
        let cut = buffer.len() / 2;
        let err = RankState::load(&mut &buffer[..cut]).unwrap_err();
        assert!(matches!(err, StateError::Parse { .. }), "got {err:?}");
    }

    #[test]
    fn corrupted_totals_fail_integrity_checks() {
        let state = RankState::init(&g4(), RefCountMode::Bibliography).unwrap();
        let mut buffer = Vec::new();
        state.save(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();

        // Tampering with one paper score trips the footer comparison.
        let tampered = text.replacen(
            &format!("rank {}", super::float_bits(1.25)),
            &format!("rank {}", super::float_bits(1.5)),
            1,
        );
        assert_ne!(tampered, text);
        let err = RankState::load(&mut tampered.as_bytes()).unwrap_err();
        assert!(matches!(err, StateError::Integrity(_)), "got {err:?}");

        // Consistently rewriting one paper score and the paper footer still
        // trips conservation.
        let bumped = text
            .replace(
                &format!("paper P1 rank {}", super::float_bits(1.25)),
                &format!("paper P1 rank {}", super::float_bits(2.25)),
            )
            .replace(
                &format!("sums {} {}", super::float_bits(1.75), super::float_bits(1.75)),
                &format!("sums {} {}", super::float_bits(2.75), super::float_bits(1.75)),
            );
        assert_ne!(bumped, text);
        let err = RankState::load(&mut bumped.as_bytes()).unwrap_err();
        match err {
            StateError::Integrity(message) => assert!(message.contains("disagree")),
            other => panic!("expected conservation failure, got {other:?}"),
        }
    }
}
