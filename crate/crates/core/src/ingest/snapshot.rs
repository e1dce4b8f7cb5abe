//! Line-delimited snapshot format.
//!
//! One paper per line as space-separated `key=value` tokens:
//!
//! ```text
//! id=2-s2.0-001 authors=A1,A2 refs=2-s2.0-002 biblen=25 year=2009 subject=Math
//! ```
//!
//! `id`, `authors` and `biblen` are required; `refs`, `year` and `subject`
//! are optional; unknown keys are ignored. Blank lines and lines starting
//! with `#` are skipped. Ids and subjects must be free of whitespace, commas
//! and `=`.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::graph::{AuthorId, PaperId, PaperRecord};

use super::api::IngestError;

/// Whether a malformed line aborts the load or is skipped and reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    #[default]
    Strict,
    Lenient,
}

/// One rejected input line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineIssue {
    pub line: usize,
    pub message: String,
}

/// Parsed snapshot plus, in lenient mode, the lines that were skipped.
#[derive(Debug, Default)]
pub struct SnapshotLoad {
    pub records: Vec<PaperRecord>,
    pub skipped: Vec<LineIssue>,
}

/// Order-preserving parse of a snapshot stream.
pub fn load_snapshot(source: impl Read, strictness: Strictness) -> Result<SnapshotLoad, IngestError> {
    let reader = BufReader::new(source);
    let mut load = SnapshotLoad::default();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(IngestError::Io)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_record_line(trimmed) {
            Ok(record) => load.records.push(record),
            Err(message) => match strictness {
                Strictness::Strict => {
                    return Err(IngestError::Parse {
                        line: line_no,
                        message,
                    })
                }
                Strictness::Lenient => load.skipped.push(LineIssue {
                    line: line_no,
                    message,
                }),
            },
        }
    }
    Ok(load)
}

pub fn load_snapshot_path(path: &Path, strictness: Strictness) -> Result<SnapshotLoad, IngestError> {
    let file = fs::File::open(path)?;
    load_snapshot(file, strictness)
}

/// Parses one record line; the error is a human-readable reason.
pub fn parse_record_line(line: &str) -> Result<PaperRecord, String> {
    let mut id = None;
    let mut authors: Vec<AuthorId> = Vec::new();
    let mut references: Vec<PaperId> = Vec::new();
    let mut bibliography_length = None;
    let mut year = None;
    let mut subject = None;

    for token in line.split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            return Err(format!("token `{token}` is not key=value"));
        };
        match key {
            "id" => id = Some(PaperId::new(value)),
            "authors" => {
                authors = value
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(AuthorId::new)
                    .collect()
            }
            "refs" => {
                references = value
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(PaperId::new)
                    .collect()
            }
            "biblen" => {
                bibliography_length =
                    Some(value.parse::<u32>().map_err(|_| {
                        format!("biblen `{value}` is not a non-negative integer")
                    })?)
            }
            "year" => {
                year = Some(
                    value
                        .parse::<i32>()
                        .map_err(|_| format!("year `{value}` is not an integer"))?,
                )
            }
            "subject" => subject = Some(value.to_owned()),
            _ => {} // unknown fields ignored
        }
    }

    let id = id.ok_or("missing id field")?;
    if id.as_str().is_empty() {
        return Err("empty id".to_owned());
    }
    if authors.is_empty() {
        return Err(format!("paper `{id}` has no authors"));
    }
    let bibliography_length = bibliography_length.ok_or("missing biblen field")?;
    if bibliography_length < references.len() as u32 {
        return Err(format!(
            "paper `{id}` lists {} references but biblen={bibliography_length}",
            references.len()
        ));
    }
    for window in sorted(&authors).windows(2) {
        if window[0] == window[1] {
            return Err(format!("paper `{id}` repeats author `{}`", window[0]));
        }
    }
    for window in sorted(&references).windows(2) {
        if window[0] == window[1] {
            return Err(format!("paper `{id}` repeats reference `{}`", window[0]));
        }
    }

    Ok(PaperRecord {
        id,
        authors,
        references,
        bibliography_length,
        year,
        subject,
    })
}

fn sorted<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut copy = items.to_vec();
    copy.sort();
    copy
}

/// Renders one record in the canonical field order.
pub fn render_record_line(record: &PaperRecord) -> Result<String, IngestError> {
    let mut line = String::new();
    line.push_str("id=");
    line.push_str(safe_token(record.id.as_str())?);
    line.push_str(" authors=");
    let authors: Vec<&str> = record
        .authors
        .iter()
        .map(|a| safe_token(a.as_str()))
        .collect::<Result<_, _>>()?;
    line.push_str(&authors.join(","));
    if !record.references.is_empty() {
        line.push_str(" refs=");
        let refs: Vec<&str> = record
            .references
            .iter()
            .map(|r| safe_token(r.as_str()))
            .collect::<Result<_, _>>()?;
        line.push_str(&refs.join(","));
    }
    line.push_str(&format!(" biblen={}", record.bibliography_length));
    if let Some(year) = record.year {
        line.push_str(&format!(" year={year}"));
    }
    if let Some(subject) = &record.subject {
        line.push_str(" subject=");
        line.push_str(safe_token(subject)?);
    }
    Ok(line)
}

/// Writes records one per line, sorted by id.
pub fn write_snapshot(records: &[PaperRecord], sink: &mut impl Write) -> Result<(), IngestError> {
    let mut ordered: Vec<&PaperRecord> = records.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));
    for record in ordered {
        writeln!(sink, "{}", render_record_line(record)?)?;
    }
    Ok(())
}

fn safe_token(token: &str) -> Result<&str, IngestError> {
    if token.is_empty()
        || token.contains(char::is_whitespace)
        || token.contains(',')
        || token.contains('=')
    {
        return Err(IngestError::Protocol(format!(
            "value `{token}` cannot be serialized in the snapshot format"
        )));
    }
    Ok(token)
}
