//! Entity span recognition over cleaned text.
//!
//! [`Recognizer`] is the pluggable interface; [`GazetteerRecognizer`] is the
//! deterministic dictionary implementation, and [`ExternalRecognizer`] adapts
//! an HTTP span-tagging service. All offsets are character offsets into the
//! text handed to `recognize`, and every returned surface form is the exact
//! slice at those offsets.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::EntityLabel;

#[derive(Debug, Error)]
pub enum NerError {
    #[error("recognizer backend: {0}")]
    Backend(String),
    #[error("gazetteer file {path}: {detail}")]
    Gazetteer { path: PathBuf, detail: String },
}

/// A recognized entity mention. `start`/`end` are character offsets and
/// `surface` equals the text slice between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

/// Span recognition restricted to the requested labels. Returned spans are
/// sorted by start and never overlap; on overlapping matches the longest one
/// wins, ties going to the earliest start.
pub trait Recognizer {
    fn recognize(&self, text: &str, labels: &[EntityLabel]) -> Result<Vec<EntitySpan>, NerError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub surface: String,
    pub label: EntityLabel,
}

/// Dictionary recognizer. Multi-token surfaces match case-sensitively;
/// single-token surfaces of five or more characters also match
/// case-insensitively (short tokens stay strict to avoid hitting common
/// words). Matches must sit on word boundaries.
#[derive(Debug, Clone)]
pub struct GazetteerRecognizer {
    entries: Vec<GazetteerEntry>,
}

impl GazetteerRecognizer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Self {
        GazetteerRecognizer { entries }
    }

    /// Load from a JSON file holding a list of `{surface, label}` objects.
    pub fn from_path(path: &Path) -> Result<Self, NerError> {
        let data = fs::read_to_string(path)
            .map_err(|e| NerError::Gazetteer { path: path.into(), detail: e.to_string() })?;
        let entries = serde_json::from_str(&data)
            .map_err(|e| NerError::Gazetteer { path: path.into(), detail: e.to_string() })?;
        Ok(GazetteerRecognizer::new(entries))
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }
}

impl Recognizer for GazetteerRecognizer {
    fn recognize(&self, text: &str, labels: &[EntityLabel]) -> Result<Vec<EntitySpan>, NerError> {
        let chars: Vec<char> = text.chars().collect();
        let folded: Vec<char> = chars.iter().map(|c| fold(*c)).collect();
        let mut candidates = Vec::new();
        for (rank, entry) in self.entries.iter().enumerate() {
            if !labels.contains(&entry.label) {
                continue;
            }
            let surface: Vec<char> = entry.surface.chars().collect();
            if surface.is_empty() || surface.len() > chars.len() {
                continue;
            }
            let insensitive =
                !entry.surface.contains(char::is_whitespace) && surface.len() >= 5;
            let needle: Vec<char> =
                if insensitive { surface.iter().map(|c| fold(*c)).collect() } else { surface };
            let hay: &[char] = if insensitive { &folded } else { &chars };
            for start in 0..=(chars.len() - needle.len()) {
                let end = start + needle.len();
                if hay[start..end] == needle[..] && on_word_boundary(&chars, start, end) {
                    candidates.push(Candidate { start, end, rank, label: entry.label });
                }
            }
        }
        Ok(resolve_overlaps(&chars, candidates))
    }
}

/// Adapter for an HTTP recognizer endpoint taking `{text, labels}` and
/// returning `[{surface, start, end, label}]` with character offsets.
#[derive(Debug, Clone)]
pub struct ExternalRecognizer {
    endpoint: String,
}

impl ExternalRecognizer {
    pub fn new(endpoint: impl Into<String>) -> Self {
        ExternalRecognizer { endpoint: endpoint.into() }
    }
}

impl Recognizer for ExternalRecognizer {
    fn recognize(&self, text: &str, labels: &[EntityLabel]) -> Result<Vec<EntitySpan>, NerError> {
        let payload = serde_json::json!({ "text": text, "labels": labels });
        let mut response = ureq::post(&self.endpoint)
            .send_json(&payload)
            .map_err(|e| NerError::Backend(e.to_string()))?;
        let wire: Vec<EntitySpan> = response
            .body_mut()
            .read_json()
            .map_err(|e| NerError::Backend(format!("malformed span response: {e}")))?;

        let chars: Vec<char> = text.chars().collect();
        let mut candidates = Vec::new();
        for (rank, span) in wire.into_iter().enumerate() {
            if !labels.contains(&span.label) {
                continue;
            }
            let in_range = span.start < span.end && span.end <= chars.len();
            if !in_range
                || chars[span.start..span.end].iter().collect::<String>() != span.surface
            {
                return Err(NerError::Backend(format!(
                    "span {:?} does not match text at offsets {}..{}",
                    span.surface, span.start, span.end
                )));
            }
            candidates.push(Candidate { start: span.start, end: span.end, rank, label: span.label });
        }
        Ok(resolve_overlaps(&chars, candidates))
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    start: usize,
    end: usize,
    rank: usize,
    label: EntityLabel,
}

fn fold(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

fn on_word_boundary(chars: &[char], start: usize, end: usize) -> bool {
    let before_ok = start == 0 || !chars[start - 1].is_alphanumeric();
    let after_ok = end == chars.len() || !chars[end].is_alphanumeric();
    before_ok && after_ok
}

/// Greedy longest-match selection: longer candidates first, then earlier
/// starts, then entry order; a candidate survives only if it overlaps nothing
/// already kept. Output is sorted by start.
fn resolve_overlaps(chars: &[char], mut candidates: Vec<Candidate>) -> Vec<EntitySpan> {
    candidates.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.start.cmp(&b.start))
            .then(a.rank.cmp(&b.rank))
    });
    let mut taken: Vec<(usize, usize)> = Vec::new();
    let mut spans = Vec::new();
    for cand in candidates {
        if taken.iter().any(|&(s, e)| cand.start < e && s < cand.end) {
            continue;
        }
        taken.push((cand.start, cand.end));
        spans.push(EntitySpan {
            surface: chars[cand.start..cand.end].iter().collect(),
            start: cand.start,
            end: cand.end,
            label: cand.label,
        });
    }
    spans.sort_by_key(|s| s.start);
    spans
}
