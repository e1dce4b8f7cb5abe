//! In-memory citation-graph model: papers, authorship, reference counts, and
//! the reverse citation adjacency that every ranking computation reads from.
//!
//! A [`CitationGraph`] is built once from a batch of [`PaperRecord`]s and is
//! immutable afterwards. Adjacency lists are held sorted by paper id so that
//! every downstream floating-point sum runs in a fixed order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque paper identifier (Scopus-style eid, e.g. `2-s2.0-...`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PaperId(pub String);

/// Opaque author identifier (Scopus-style numeric A.Id).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AuthorId(pub String);

impl PaperId {
    pub fn new(value: impl Into<String>) -> Self {
        PaperId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl AuthorId {
    pub fn new(value: impl Into<String>) -> Self {
        AuthorId(value.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PaperId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for AuthorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PaperId {
    fn from(value: &str) -> Self {
        PaperId(value.to_owned())
    }
}

impl From<&str> for AuthorId {
    fn from(value: &str) -> Self {
        AuthorId(value.to_owned())
    }
}

/// One paper as it appears in a database snapshot.
///
/// `references` lists only outgoing citations that resolve inside the
/// snapshot; `bibliography_length` is the full length of the reference list,
/// including items the snapshot does not cover.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: PaperId,
    /// Authors in byline order. Order is preserved: it is the hook for
    /// order-dependent weighting schemes.
    pub authors: Vec<AuthorId>,
    pub references: Vec<PaperId>,
    pub bibliography_length: u32,
    pub year: Option<i32>,
    pub subject: Option<String>,
}

impl PaperRecord {
    pub fn new(id: impl Into<String>, authors: &[&str]) -> Self {
        PaperRecord {
            id: PaperId::new(id),
            authors: authors.iter().map(|a| AuthorId::new(*a)).collect(),
            references: Vec::new(),
            bibliography_length: 0,
            year: None,
            subject: None,
        }
    }

    pub fn with_references(mut self, references: &[&str], bibliography_length: u32) -> Self {
        self.references = references.iter().map(|r| PaperId::new(*r)).collect();
        self.bibliography_length = bibliography_length;
        self
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    pub fn with_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject = Some(subject.into());
        self
    }

    pub fn author_count(&self) -> usize {
        self.authors.len()
    }
}

/// Selects what counts as the reference count of a citing paper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RefCountMode {
    /// Full bibliography length of the citing paper, as reported by the
    /// source database. This is the default: it matches what a live
    /// citation-listing API returns per citer.
    #[default]
    Bibliography,
    /// Number of references that resolve inside the snapshot, i.e. the
    /// column count of the citation matrix.
    InDatabase,
}

impl fmt::Display for RefCountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefCountMode::Bibliography => f.write_str("bibliography"),
            RefCountMode::InDatabase => f.write_str("indb"),
        }
    }
}

impl std::str::FromStr for RefCountMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bibliography" | "bib" => Ok(RefCountMode::Bibliography),
            "indb" | "in-database" => Ok(RefCountMode::InDatabase),
            other => Err(format!(
                "unknown reference-count mode `{other}` (expected `bibliography` or `indb`)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate paper id `{0}`")]
    DuplicatePaper(PaperId),
    #[error("paper `{0}` has an empty id")]
    EmptyPaperId(usize),
    #[error("paper `{0}` has no authors")]
    NoAuthors(PaperId),
    #[error("paper `{paper}` lists author `{author}` more than once")]
    DuplicateAuthor { paper: PaperId, author: AuthorId },
    #[error("paper `{paper}` has an empty author id")]
    EmptyAuthorId { paper: PaperId },
    #[error("paper `{paper}` lists reference `{reference}` more than once")]
    DuplicateReference { paper: PaperId, reference: PaperId },
    #[error(
        "paper `{paper}` has bibliography length {bibliography_length} but {resolved} resolved references"
    )]
    BibliographyTooShort {
        paper: PaperId,
        bibliography_length: u32,
        resolved: usize,
    },
    #[error("paper `{0}` not found")]
    PaperNotFound(PaperId),
}

/// A reference that was dropped at build time because its target is not part
/// of the snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrunedReference {
    pub citing: PaperId,
    pub missing: PaperId,
}

/// Result of [`CitationGraph::build`]: the graph plus the pruning log.
#[derive(Debug)]
pub struct GraphBuild {
    pub graph: CitationGraph,
    pub pruned_references: Vec<PrunedReference>,
}

impl GraphBuild {
    pub fn into_graph(self) -> CitationGraph {
        self.graph
    }
}

/// Immutable citation-graph snapshot.
///
/// `citers` is exactly the transpose of the union of the (pruned) reference
/// lists: `i ∈ citers[j]` iff `j ∈ references(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CitationGraph {
    papers: BTreeMap<PaperId, PaperRecord>,
    citers: BTreeMap<PaperId, Vec<PaperId>>,
}

impl CitationGraph {
    /// Builds the graph from a record batch.
    ///
    /// References whose target is absent from the batch are pruned from the
    /// stored record (and logged), never from `bibliography_length`.
    /// Self-citations are kept; [`CitationGraph::validate`] surfaces them.
    pub fn build(records: Vec<PaperRecord>) -> Result<GraphBuild, GraphError> {
        let mut papers: BTreeMap<PaperId, PaperRecord> = BTreeMap::new();
        for (position, record) in records.iter().enumerate() {
            if record.id.as_str().is_empty() {
                return Err(GraphError::EmptyPaperId(position));
            }
            if record.authors.is_empty() {
                return Err(GraphError::NoAuthors(record.id.clone()));
            }
            let mut seen_authors = BTreeSet::new();
            for author in &record.authors {
                if author.as_str().is_empty() {
                    return Err(GraphError::EmptyAuthorId {
                        paper: record.id.clone(),
                    });
                }
                if !seen_authors.insert(author) {
                    return Err(GraphError::DuplicateAuthor {
                        paper: record.id.clone(),
                        author: author.clone(),
                    });
                }
            }
            let mut seen_refs = BTreeSet::new();
            for reference in &record.references {
                if !seen_refs.insert(reference) {
                    return Err(GraphError::DuplicateReference {
                        paper: record.id.clone(),
                        reference: reference.clone(),
                    });
                }
            }
            if papers.insert(record.id.clone(), record.clone()).is_some() {
                return Err(GraphError::DuplicatePaper(record.id.clone()));
            }
        }

        let known: BTreeSet<PaperId> = papers.keys().cloned().collect();
        let mut pruned_references = Vec::new();
        for record in papers.values_mut() {
            let mut kept = Vec::with_capacity(record.references.len());
            for reference in record.references.drain(..) {
                if known.contains(&reference) {
                    kept.push(reference);
                } else {
                    pruned_references.push(PrunedReference {
                        citing: record.id.clone(),
                        missing: reference,
                    });
                }
            }
            kept.sort();
            if record.bibliography_length < kept.len() as u32 {
                return Err(GraphError::BibliographyTooShort {
                    paper: record.id.clone(),
                    bibliography_length: record.bibliography_length,
                    resolved: kept.len(),
                });
            }
            record.references = kept;
        }
        pruned_references.sort_by(|a, b| (&a.citing, &a.missing).cmp(&(&b.citing, &b.missing)));

        let mut citers: BTreeMap<PaperId, Vec<PaperId>> =
            papers.keys().map(|id| (id.clone(), Vec::new())).collect();
        for record in papers.values() {
            for reference in &record.references {
                citers
                    .get_mut(reference)
                    .expect("reference resolved above")
                    .push(record.id.clone());
            }
        }
        for list in citers.values_mut() {
            list.sort();
        }

        Ok(GraphBuild {
            graph: CitationGraph { papers, citers },
            pruned_references,
        })
    }

    pub fn paper_count(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn contains(&self, id: &PaperId) -> bool {
        self.papers.contains_key(id)
    }

    pub fn record(&self, id: &PaperId) -> Result<&PaperRecord, GraphError> {
        self.papers
            .get(id)
            .ok_or_else(|| GraphError::PaperNotFound(id.clone()))
    }

    /// Papers in sorted id order.
    pub fn records(&self) -> impl Iterator<Item = &PaperRecord> {
        self.papers.values()
    }

    pub fn paper_ids(&self) -> impl Iterator<Item = &PaperId> {
        self.papers.keys()
    }

    /// Papers citing `id`, sorted.
    pub fn citers(&self, id: &PaperId) -> Result<&[PaperId], GraphError> {
        self.citers
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| GraphError::PaperNotFound(id.clone()))
    }

    /// Reference count of `id` under the selected mode.
    pub fn ref_count(&self, id: &PaperId, mode: RefCountMode) -> Result<u32, GraphError> {
        let record = self.record(id)?;
        Ok(match mode {
            RefCountMode::Bibliography => record.bibliography_length,
            RefCountMode::InDatabase => record.references.len() as u32,
        })
    }

    /// Map author → that author's papers (sorted), covering every author
    /// that appears on at least one record.
    pub fn authorship(&self) -> BTreeMap<AuthorId, Vec<PaperId>> {
        let mut by_author: BTreeMap<AuthorId, Vec<PaperId>> = BTreeMap::new();
        for record in self.papers.values() {
            for author in &record.authors {
                by_author
                    .entry(author.clone())
                    .or_default()
                    .push(record.id.clone());
            }
        }
        // Paper iteration is already id-sorted, so each list is sorted.
        by_author
    }

    /// Data-quality scan; never mutates.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for record in self.papers.values() {
            if record.references.len() as u32 == 0 {
                report.dangling_in_database.push(record.id.clone());
            }
            if record.bibliography_length == 0 {
                report.dangling_bibliography.push(record.id.clone());
            }
            if record.references.contains(&record.id) {
                report.self_citing.push(record.id.clone());
            }
        }
        for (author, papers) in self.authorship() {
            let cited = papers
                .iter()
                .any(|p| !self.citers.get(p).map(Vec::is_empty).unwrap_or(true));
            if !cited {
                report.orphan_authors.push(author);
            }
        }
        report
    }

    #[cfg(test)]
    pub(crate) fn from_parts_unchecked(
        papers: BTreeMap<PaperId, PaperRecord>,
        citers: BTreeMap<PaperId, Vec<PaperId>>,
    ) -> Self {
        CitationGraph { papers, citers }
    }
}

/// Findings of [`CitationGraph::validate`], all lists sorted by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Papers with no resolved in-database references.
    pub dangling_in_database: Vec<PaperId>,
    /// Papers whose reported bibliography is empty.
    pub dangling_bibliography: Vec<PaperId>,
    /// Papers that cite themselves.
    pub self_citing: Vec<PaperId>,
    /// Authors none of whose papers has received an in-database citation.
    pub orphan_authors: Vec<AuthorId>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.dangling_in_database.is_empty()
            && self.dangling_bibliography.is_empty()
            && self.self_citing.is_empty()
            && self.orphan_authors.is_empty()
    }
}
