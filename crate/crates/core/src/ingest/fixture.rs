//! Directory-backed fixture transport.
//!
//! Serves the wire protocol from plain files, so client behavior (budget,
//! retry, pagination) is testable without a network:
//!
//! ```text
//! <root>/
//!   api_key              # optional: expected key; mismatches get 401
//!   script.txt           # optional: scripted failures, see below
//!   authors/<A>.txt      # paper ids of author A, one per line
//!   papers/<P>.txt       # one snapshot-format record line for paper P
//!   citations/<P>.txt    # lines `<citing-id> <biblen>`; absent file =
//!                        # uncited (requires papers/<P>.txt to exist)
//! ```
//!
//! `script.txt` lines have the form `<endpoint>:<target> <action> <count>`
//! with actions `ratelimit` (respond 429), `fail` (transport error) and
//! `loop` (repeat the request's own cursor as the continuation). Each line
//! arms the action for the next `count` matching requests.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use super::api::{ApiRequest, ApiResponse, EndpointKind, IngestError, Transport, TransportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScriptAction {
    RateLimit,
    Fail,
    Loop,
}

pub struct FixtureTransport {
    root: PathBuf,
    expected_key: Option<String>,
    script: HashMap<String, Vec<(ScriptAction, u32)>>,
}

impl FixtureTransport {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, IngestError> {
        let root = root.into();
        if !root.is_dir() {
            return Err(IngestError::Config(format!(
                "fixture directory `{}` does not exist",
                root.display()
            )));
        }
        let expected_key = match fs::read_to_string(root.join("api_key")) {
            Ok(text) => Some(text.trim().to_owned()),
            Err(_) => None,
        };
        let mut script: HashMap<String, Vec<(ScriptAction, u32)>> = HashMap::new();
        if let Ok(text) = fs::read_to_string(root.join("script.txt")) {
            for (index, line) in text.lines().enumerate() {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    continue;
                }
                let parts: Vec<&str> = trimmed.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(IngestError::Config(format!(
                        "script.txt line {}: expected `<key> <action> <count>`",
                        index + 1
                    )));
                }
                let action = match parts[1] {
                    "ratelimit" => ScriptAction::RateLimit,
                    "fail" => ScriptAction::Fail,
                    "loop" => ScriptAction::Loop,
                    other => {
                        return Err(IngestError::Config(format!(
                            "script.txt line {}: unknown action `{other}`",
                            index + 1
                        )))
                    }
                };
                let count: u32 = parts[2].parse().map_err(|_| {
                    IngestError::Config(format!("script.txt line {}: bad count", index + 1))
                })?;
                script
                    .entry(parts[0].to_owned())
                    .or_default()
                    .push((action, count));
            }
        }
        Ok(FixtureTransport {
            root,
            expected_key,
            script,
        })
    }

    fn scripted(&mut self, key: &str) -> Option<ScriptAction> {
        let queue = self.script.get_mut(key)?;
        let (action, remaining) = queue.first_mut()?;
        let action = *action;
        *remaining -= 1;
        if *remaining == 0 {
            queue.remove(0);
        }
        Some(action)
    }

    fn not_found() -> ApiResponse {
        ApiResponse {
            status: 404,
            body: String::new(),
        }
    }

    fn ok(body: String) -> ApiResponse {
        ApiResponse { status: 200, body }
    }
}

impl Transport for FixtureTransport {
    fn execute(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError> {
        if let Some(expected) = &self.expected_key {
            if request.api_key != *expected {
                return Ok(ApiResponse {
                    status: 401,
                    body: String::new(),
                });
            }
        }

        let script_key = format!("{}:{}", request.kind.path(), request.target);
        let looped = match self.scripted(&script_key) {
            Some(ScriptAction::RateLimit) => {
                return Ok(ApiResponse {
                    status: 429,
                    body: String::new(),
                })
            }
            Some(ScriptAction::Fail) => {
                return Err(TransportError("scripted connection failure".to_owned()))
            }
            Some(ScriptAction::Loop) => true,
            None => false,
        };

        match request.kind {
            EndpointKind::AuthorPapers => {
                let path = self.root.join("authors").join(format!("{}.txt", request.target));
                match fs::read_to_string(path) {
                    Ok(body) => Ok(Self::ok(body)),
                    Err(_) => Ok(Self::not_found()),
                }
            }
            EndpointKind::PaperDetail => {
                let path = self.root.join("papers").join(format!("{}.txt", request.target));
                match fs::read_to_string(path) {
                    Ok(body) => Ok(Self::ok(body)),
                    Err(_) => Ok(Self::not_found()),
                }
            }
            EndpointKind::Citations => {
                let path = self
                    .root
                    .join("citations")
                    .join(format!("{}.txt", request.target));
                let entries: Vec<String> = match fs::read_to_string(path) {
                    Ok(text) => text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(str::to_owned)
                        .collect(),
                    Err(_) => {
                        let detail = self
                            .root
                            .join("papers")
                            .join(format!("{}.txt", request.target));
                        if detail.exists() {
                            Vec::new() // known paper, no citations yet
                        } else {
                            return Ok(Self::not_found());
                        }
                    }
                };

                let mut body = String::new();
                let start = request.cursor.min(entries.len());
                let stop = start.saturating_add(request.page_size).min(entries.len());
                for entry in &entries[start..stop] {
                    body.push_str(entry);
                    body.push('\n');
                }
                if looped {
                    body.push_str(&format!("next {}\n", request.cursor));
                } else if stop < entries.len() {
                    body.push_str(&format!("next {stop}\n"));
                } else {
                    body.push_str("end\n");
                }
                Ok(Self::ok(body))
            }
        }
    }
}
