//! Corpus loading: plain-text articles with optional JSON metadata sidecars,
//! wiki-markup cleanup, blank-line paragraph segmentation, and corpus-level
//! statistics.
//!
//! All offsets in this crate are **character** offsets into `cleaned_text`
//! (not bytes), so they line up with offsets reported for entity spans.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::slugify;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8")]
    Encoding { path: PathBuf },
    #[error("malformed sidecar {path}: {detail}")]
    Sidecar { path: PathBuf, detail: String },
    #[error("cannot derive document id from file name {path}")]
    BadFilename { path: PathBuf },
    #[error("duplicate document id {id:?}")]
    DuplicateDocId { id: String },
}

/// A loaded article, cleaned and segmented, ready for extraction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    /// Stable identifier derived from the file stem (slugified).
    pub doc_id: String,
    /// Display title: the sidecar's `title` if present, else the file stem.
    pub title: String,
    pub raw_text: String,
    pub cleaned_text: String,
    pub paragraphs: Vec<Paragraph>,
    pub categories: Vec<String>,
}

/// One paragraph of the cleaned text. `text` is the exact character slice
/// `cleaned_text[char_start..char_end]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paragraph {
    pub index: usize,
    pub text: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Corpus-level descriptive statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub mean_chars: f64,
    pub mean_tokens: f64,
    pub mean_unique_tokens: f64,
    /// Document count per sidecar category.
    pub per_category: BTreeMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct Sidecar {
    #[serde(default)]
    title: Option<String>,
    #[serde(default)]
    categories: Vec<String>,
}

static TEMPLATE_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\{\{[^{}]*\}\}").unwrap());
static CITATION_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"\[\d+\]").unwrap());
static HEADING_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?m)^[ \t]*=+[ \t]*(.*?)[ \t]*=+[ \t]*$").unwrap());

/// Strip wiki-style markup: `{{templates}}` (innermost-first, so nested
/// templates dissolve over iterations), numeric citation markers like `[21]`,
/// and `== Heading ==` lines (reduced to their text). Plain prose is left
/// untouched. Runs to a fixpoint, which makes the function idempotent; the
/// result is never longer than the input.
pub fn clean_markup(raw: &str) -> String {
    let mut cur = raw.to_string();
    loop {
        let pass = TEMPLATE_RE.replace_all(&cur, "");
        let pass = CITATION_RE.replace_all(&pass, "");
        let pass = HEADING_RE.replace_all(&pass, "$1");
        if pass == cur {
            return cur;
        }
        cur = pass.into_owned();
    }
}

/// Slice a string by character (not byte) offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}

/// Split cleaned text into paragraphs at runs of blank lines (lines that are
/// empty or whitespace-only). Paragraph offsets are character offsets; each
/// paragraph's `text` is the exact slice between them, so multi-line
/// paragraphs keep their internal newlines.
pub fn segment_paragraphs(text: &str) -> Vec<Paragraph> {
    let mut paragraphs = Vec::new();
    let mut pos = 0usize; // running char offset
    let mut current: Option<(usize, usize)> = None; // (start, end)

    let mut flush = |current: &mut Option<(usize, usize)>, paragraphs: &mut Vec<Paragraph>| {
        if let Some((start, end)) = current.take() {
            paragraphs.push(Paragraph {
                index: paragraphs.len(),
                text: char_slice(text, start, end),
                char_start: start,
                char_end: end,
            });
        }
    };

    for line in text.split_inclusive('\n') {
        let content = line.strip_suffix('\n').unwrap_or(line);
        if content.trim().is_empty() {
            flush(&mut current, &mut paragraphs);
        } else {
            let content_chars = content.chars().count();
            match &mut current {
                Some((_, end)) => *end = pos + content_chars,
                None => current = Some((pos, pos + content_chars)),
            }
        }
        pos += line.chars().count();
    }
    flush(&mut current, &mut paragraphs);
    paragraphs
}

/// Whitespace-split tokens with leading/trailing punctuation stripped.
fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
}

/// Descriptive statistics over a set of loaded documents. Unique-token counts
/// are case-insensitive per document; all means are 0.0 on an empty corpus.
pub fn corpus_stats(docs: &[Document]) -> CorpusStats {
    let mut per_category = BTreeMap::new();
    let (mut chars, mut toks, mut uniq) = (0usize, 0usize, 0usize);
    for doc in docs {
        chars += doc.cleaned_text.chars().count();
        let mut seen = BTreeSet::new();
        for tok in tokens(&doc.cleaned_text) {
            toks += 1;
            seen.insert(tok.to_lowercase());
        }
        uniq += seen.len();
        for cat in &doc.categories {
            *per_category.entry(cat.clone()).or_insert(0) += 1;
        }
    }
    let n = docs.len();
    let mean = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    CorpusStats {
        doc_count: n,
        mean_chars: mean(chars),
        mean_tokens: mean(toks),
        mean_unique_tokens: mean(uniq),
        per_category,
    }
}

/// Load one article from a `.txt` file, applying cleanup and segmentation.
/// A sidecar named `<stem>.meta.json` next to the file may supply a display
/// title and category labels.
pub fn load_document(path: &Path) -> Result<Document, CorpusError> {
    let bytes = std::fs::read(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw_text = String::from_utf8(bytes)
        .map_err(|_| CorpusError::Encoding { path: path.to_path_buf() })?;

    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| CorpusError::BadFilename { path: path.to_path_buf() })?;
    let doc_id =
        slugify(&stem).map_err(|_| CorpusError::BadFilename { path: path.to_path_buf() })?;

    let sidecar_path = path.with_file_name(format!("{stem}.meta.json"));
    let sidecar = if sidecar_path.exists() {
        let text = std::fs::read_to_string(&sidecar_path).map_err(|source| CorpusError::Io {
            path: sidecar_path.clone(),
            source,
        })?;
        Some(serde_json::from_str::<Sidecar>(&text).map_err(|e| CorpusError::Sidecar {
            path: sidecar_path.clone(),
            detail: e.to_string(),
        })?)
    } else {
        None
    };

    let cleaned_text = clean_markup(&raw_text);
    let paragraphs = segment_paragraphs(&cleaned_text);
    let (title, categories) = match sidecar {
        Some(s) => (s.title.unwrap_or_else(|| stem.clone()), s.categories),
        None => (stem.clone(), Vec::new()),
    };
    Ok(Document { doc_id, title, raw_text, cleaned_text, paragraphs, categories })
}

/// Load every `.txt` article in a directory, sorted by `doc_id`.
pub fn load_corpus(dir: &Path) -> Result<Vec<Document>, CorpusError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "txt").unwrap_or(false))
        .collect();
    paths.sort();

    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for path in paths {
        let doc = load_document(&path)?;
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId { id: doc.doc_id });
        }
        docs.push(doc);
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clean_markup_strips_citations_templates_and_headings() {
        assert_eq!(
            clean_markup("The donation[21] was {{citation needed}}exposed."),
            "The donation was exposed."
        );
        assert_eq!(clean_markup("== History ==\nText."), "History\nText.");
        assert_eq!(clean_markup(""), "");
        assert_eq!(clean_markup("plain prose, untouched"), "plain prose, untouched");
    }

    #[test]
    fn clean_markup_handles_nested_templates() {
        assert_eq!(clean_markup("a{{x{{y}}z}}b"), "ab");
    }

    #[test]
    fn segment_basic_offsets() {
        let paras = segment_paragraphs("A\n\nB");
        assert_eq!(paras.len(), 2);
        assert_eq!((paras[0].char_start, paras[0].char_end, paras[0].text.as_str()), (0, 1, "A"));
        assert_eq!((paras[1].char_start, paras[1].char_end, paras[1].text.as_str()), (3, 4, "B"));
        assert!(segment_paragraphs("").is_empty());
        assert!(segment_paragraphs("\n \n\t\n").is_empty());
    }

    #[test]
    fn segment_keeps_multiline_paragraphs_whole() {
        let text = "line one\nline two\n\n  indented start\n";
        let paras = segment_paragraphs(text);
        assert_eq!(paras.len(), 2);
        assert_eq!(paras[0].text, "line one\nline two");
        assert_eq!(paras[1].text, "  indented start");
        for p in &paras {
            assert_eq!(p.text, char_slice(text, p.char_start, p.char_end));
        }
    }

    #[test]
    fn stats_tiny_example() {
        let doc = Document {
            doc_id: "d".into(),
            title: "d".into(),
            raw_text: "a b a".into(),
            cleaned_text: "a b a".into(),
            paragraphs: segment_paragraphs("a b a"),
            categories: vec!["Forgeries".into()],
        };
        let stats = corpus_stats(&[doc]);
        assert_eq!(stats.doc_count, 1);
        assert_eq!(stats.mean_chars, 5.0);
        assert_eq!(stats.mean_tokens, 3.0);
        assert_eq!(stats.mean_unique_tokens, 2.0);
        assert_eq!(stats.per_category.get("Forgeries"), Some(&1));
        let empty = corpus_stats(&[]);
        assert_eq!(empty.mean_chars, 0.0);
    }

    #[test]
    fn load_document_reads_sidecar_and_rejects_bad_ones() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test_article.txt");
        std::fs::write(&path, "Body text.\n").unwrap();
        std::fs::write(
            dir.path().join("test_article.meta.json"),
            r#"{"title": "Test Article", "categories": ["Hoaxes"]}"#,
        )
        .unwrap();
        let doc = load_document(&path).unwrap();
        assert_eq!(doc.doc_id, "test_article");
        assert_eq!(doc.title, "Test Article");
        assert_eq!(doc.categories, vec!["Hoaxes"]);

        std::fs::write(dir.path().join("test_article.meta.json"), "{not json").unwrap();
        assert!(matches!(load_document(&path), Err(CorpusError::Sidecar { .. })));
    }

    #[test]
    fn load_document_rejects_invalid_utf8() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, [0xff, 0xfe, 0x41]).unwrap();
        assert!(matches!(load_document(&path), Err(CorpusError::Encoding { .. })));
    }

    #[test]
    fn load_corpus_sorts_and_skips_non_txt() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b_doc.txt"), "B").unwrap();
        std::fs::write(dir.path().join("a_doc.txt"), "A").unwrap();
        std::fs::write(dir.path().join("ignore.json"), "{}").unwrap();
        let docs = load_corpus(dir.path()).unwrap();
        assert_eq!(
            docs.iter().map(|d| d.doc_id.as_str()).collect::<Vec<_>>(),
            vec!["a_doc", "b_doc"]
        );
    }

    proptest! {
        #[test]
        fn clean_markup_is_idempotent_and_never_grows(
            s in proptest::string::string_regex("[a-zA-Z0-9 \\n=\\[\\]{}.,]{0,200}").unwrap()
        ) {
            let once = clean_markup(&s);
            prop_assert!(once.chars().count() <= s.chars().count());
            prop_assert_eq!(clean_markup(&once), once.clone());
        }

        #[test]
        fn segmentation_is_ordered_nonoverlapping_and_faithful(
            s in proptest::string::string_regex("[ab \\n\\t]{0,120}").unwrap()
        ) {
            let paras = segment_paragraphs(&s);
            let mut prev_end = 0usize;
            for (i, p) in paras.iter().enumerate() {
                prop_assert_eq!(p.index, i);
                prop_assert!(p.char_start >= prev_end);
                prop_assert!(p.char_start < p.char_end);
                prop_assert_eq!(p.text.clone(), char_slice(&s, p.char_start, p.char_end));
                prop_assert!(!p.text.trim().is_empty());
                prev_end = p.char_end;
            }
        }
    }
}
