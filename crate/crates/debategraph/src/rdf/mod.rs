//! RDF-star graph model: terms, triples, graphs, slugified local names, and
//! the fixed prefix table shared by serialization and mapping.
//!
//! Quoted triples (`<< s p o >>`) are first-class [`Term`]s but may nest at
//! most one level deep; [`Triple::new`] enforces this and rejects literal
//! subjects, so an in-memory [`Graph`] never holds a statement the serializer
//! could not write back.

mod map;
mod turtle;

pub use map::{kg_stats, map_core, map_evidence, map_hypotheses, map_output, KgStats, LocationPredicate, MapConfig};
pub use turtle::{parse_turtle_star, serialize_turtle_star};

use std::collections::btree_set;
use std::collections::BTreeMap;
use std::collections::BTreeSet;

use once_cell::sync::Lazy;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("no URI-safe characters in {0:?}")]
    EmptySlug(String),
    #[error("a literal cannot be the subject of a triple")]
    LiteralSubject,
    #[error("quoted triples may only nest one level deep")]
    NestedQuote,
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("mapping error: {0}")]
    Mapping(String),
}

/// How a literal's value space is indicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LiteralKind {
    /// Bare string literal with no tag.
    Plain,
    /// Language-tagged string, e.g. `"decree"@en`.
    Lang(String),
    /// Datatyped literal; the `String` is the datatype IRI.
    Typed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Plain }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Lang(tag.into()) }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal { lexical: lexical.into(), kind: LiteralKind::Typed(datatype.into()) }
    }

    /// Decimal literal rendered bare in Turtle (`1.0`, `0.66`).
    pub fn decimal(lexical: impl Into<String>) -> Self {
        Literal::typed(lexical, expand("xsd", "decimal"))
    }
}

/// One node of a triple: an IRI, a literal, or a quoted triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Quoted(Box<Triple>),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    fn is_quoted(&self) -> bool {
        matches!(self, Term::Quoted(_))
    }
}

/// An RDF-star triple. Construct via [`Triple::new`], which enforces the
/// structural invariants (no literal subjects, quoting depth ≤ 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Result<Triple, RdfError> {
        if matches!(subject, Term::Literal(_)) {
            return Err(RdfError::LiteralSubject);
        }
        for term in [&subject, &object] {
            if let Term::Quoted(inner) = term {
                if inner.subject.is_quoted() || inner.object.is_quoted() {
                    return Err(RdfError::NestedQuote);
                }
            }
        }
        Ok(Triple { subject, predicate: predicate.into(), object })
    }
}

/// Convenience constructor for a quoted triple term. Fails on nesting or a
/// literal subject, exactly like [`Triple::new`].
pub fn quoted(subject: Term, predicate: impl Into<String>, object: Term) -> Result<Term, RdfError> {
    Ok(Term::Quoted(Box::new(Triple::new(subject, predicate, object)?)))
}

/// A set of triples with deterministic iteration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    /// Insert a triple; duplicates are absorbed. Returns whether it was new.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn merge(&mut self, other: Graph) {
        self.triples.extend(other.triples);
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> btree_set::Iter<'_, Triple> {
        self.triples.iter()
    }

    /// All objects of `(subject, predicate, ?o)`.
    pub fn objects<'g>(&'g self, subject: &Term, predicate: &str) -> Vec<&'g Term> {
        self.iter()
            .filter(|t| &t.subject == subject && t.predicate == predicate)
            .map(|t| &t.object)
            .collect()
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph { triples: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = btree_set::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

static PREFIXES: Lazy<BTreeMap<String, String>> = Lazy::new(|| {
    serde_json::from_str(include_str!("../../assets/prefixes.json"))
        .expect("embedded prefix table is valid JSON")
});

/// The fixed prefix table (prefix → namespace IRI), sorted by prefix.
pub fn prefix_table() -> &'static BTreeMap<String, String> {
    &PREFIXES
}

/// Expand `prefix:local` to an absolute IRI. Panics on prefixes missing from
/// the shipped table — those are programming errors, not data errors.
pub fn expand(prefix: &str, local: &str) -> String {
    let ns = PREFIXES
        .get(prefix)
        .unwrap_or_else(|| panic!("prefix {prefix:?} missing from shipped table"));
    format!("{ns}{local}")
}

macro_rules! ns_helpers {
    ($($fn_name:ident => $prefix:literal),+ $(,)?) => {
        $(
            #[doc = concat!("Expand a local name in the `", $prefix, ":` namespace.")]
            pub fn $fn_name(local: &str) -> String {
                expand($prefix, local)
            }
        )+
    };
}

ns_helpers!(
    kb => "kb",
    sebi => "sebi",
    hico => "hico",
    dct => "dct",
    dcmitype => "dcmitype",
    cito => "cito",
    skos => "skos",
    ov => "ov",
    owl => "owl",
    rdfs => "rdfs",
    rdf => "rdf",
    wd => "wd",
    xsd => "xsd",
    prov => "prov",
);

/// Reduce arbitrary text to a URI-safe local name: lowercase `[a-z0-9_-]`,
/// starting with an alphanumeric character.
///
/// Rules: letters/digits/hyphens are kept (en/em dashes normalize to `-`);
/// apostrophes and quotation marks are deleted outright (`Constantine's` →
/// `constantines`); every other character acts as a separator, with runs of
/// separators collapsing to a single `_`. Idempotent by construction.
pub fn slugify(s: &str) -> Result<String, RdfError> {
    let mut out = String::new();
    let mut pending_sep = false;
    for c in s.chars() {
        let c = match c {
            '\u{2013}' | '\u{2014}' | '\u{2212}' => '-', // en dash, em dash, minus sign
            other => other,
        };
        if matches!(c, '\'' | '\u{2019}' | '\u{2018}' | '"' | '\u{201c}' | '\u{201d}') {
            continue;
        }
        let mut emitted = false;
        for lc in c.to_lowercase() {
            if lc.is_ascii_alphanumeric() || lc == '-' {
                if pending_sep && !out.is_empty() {
                    out.push('_');
                }
                pending_sep = false;
                out.push(lc);
                emitted = true;
            }
        }
        if !emitted {
            pending_sep = true;
        }
    }
    let trimmed = out.trim_start_matches('-');
    if trimmed.is_empty() {
        return Err(RdfError::EmptySlug(s.to_string()));
    }
    Ok(trimmed.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn slugify_known_local_names() {
        let cases = [
            ("Donation of Constantine", "donation_of_constantine"),
            ("Lorenzo Valla", "lorenzo_valla"),
            ("Rome", "rome"),
            ("1439-1440", "1439-1440"),
            ("8th century", "8th_century"),
            ("political authority", "political_authority"),
            ("philological arguments", "philological_arguments"),
            ("Renaissance humanist", "renaissance_humanist"),
            ("Latin Catholic priest", "latin_catholic_priest"),
            (
                "March 30 (no year specified, but implied to be during Constantine's reign, 306\u{2013}337 AD)",
                "march_30_no_year_specified_but_implied_to_be_during_constantines_reign_306-337_ad",
            ),
        ];
        for (input, expected) in cases {
            assert_eq!(slugify(input).unwrap(), expected, "{input:?}");
        }
    }

    #[test]
    fn slugify_rejects_empty_results() {
        assert!(matches!(slugify(""), Err(RdfError::EmptySlug(_))));
        assert!(matches!(slugify("((( )))"), Err(RdfError::EmptySlug(_))));
        assert!(matches!(slugify("''"), Err(RdfError::EmptySlug(_))));
    }

    #[test]
    fn slugify_output_shape() {
        for input in ["--x", "\u{2013}dash lead", "A  B", "_x_", "9 lives"] {
            let slug = slugify(input).unwrap();
            let mut chars = slug.chars();
            assert!(chars.next().unwrap().is_ascii_alphanumeric(), "{slug:?}");
            assert!(slug.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'));
        }
    }

    #[test]
    fn triple_construction_enforces_invariants() {
        let lit = Term::Literal(Literal::plain("x"));
        assert!(matches!(
            Triple::new(lit.clone(), rdf("type"), Term::iri(kb("a"))),
            Err(RdfError::LiteralSubject)
        ));
        let q = quoted(Term::iri(kb("a")), rdf("type"), Term::iri(sebi("Forgery"))).unwrap();
        // One level of quoting is fine as subject of a new triple.
        let t = Triple::new(q.clone(), prov("wasDerivedFrom"), Term::iri(kb("act"))).unwrap();
        assert!(matches!(t.subject, Term::Quoted(_)));
        // Quoting a triple that itself has a quoted subject is rejected.
        let inner = Triple::new(q, prov("wasDerivedFrom"), Term::iri(kb("act"))).unwrap();
        assert!(matches!(
            Triple::new(Term::Quoted(Box::new(inner)), rdf("type"), Term::iri(kb("b"))),
            Err(RdfError::NestedQuote)
        ));
    }

    #[test]
    fn graph_deduplicates() {
        let mut g = Graph::new();
        let t = Triple::new(Term::iri(kb("a")), rdf("type"), Term::iri(sebi("Decree"))).unwrap();
        assert!(g.insert(t.clone()));
        assert!(!g.insert(t));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn prefix_table_is_complete_and_sorted() {
        let table = prefix_table();
        for p in [
            "kb", "sebi", "hico", "prov", "dct", "dcmitype", "cito", "skos", "ov", "owl", "rdfs",
            "rdf", "wd", "xsd", "time",
        ] {
            assert!(table.contains_key(p), "missing prefix {p}");
        }
        assert_eq!(expand("rdf", "type"), "http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
    }

    proptest! {
        #[test]
        fn slugify_is_idempotent(s in "\\PC{0,60}") {
            if let Ok(slug) = slugify(&s) {
                prop_assert_eq!(slugify(&slug).unwrap(), slug.clone());
                prop_assert!(slug.chars().next().unwrap().is_ascii_alphanumeric());
                prop_assert!(slug.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'));
            }
        }
    }
}
