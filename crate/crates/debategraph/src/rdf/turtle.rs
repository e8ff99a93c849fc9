//! Deterministic Turtle-star serialization and a parser for the same subset.
//!
//! The serializer always emits the full shipped prefix block (sorted by
//! prefix), then one block per subject in lexicographic order of the rendered
//! subject, predicates sorted with `a` first, objects sorted and grouped into
//! `,` lists. Because ordering depends only on graph content, equal graphs
//! serialize to byte-identical documents, and `serialize → parse → serialize`
//! round-trips bytes exactly.
//!
//! The parser accepts the subset the serializer emits (plus `#` comments):
//! `@prefix` directives, prefixed names, `<IRI>` references, plain, language-
//! tagged, and datatyped string literals, bare integer/decimal numbers, and
//! quoted triples in subject or object position, one level deep.

use std::collections::BTreeMap;

use super::{expand, prefix_table, rdf, Graph, Literal, LiteralKind, RdfError, Term, Triple};

/// Render a graph as deterministic Turtle-star.
pub fn serialize_turtle_star(graph: &Graph) -> String {
    let mut out = String::new();
    for (prefix, ns) in prefix_table() {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }

    // subject → predicate sort key → rendered objects
    let mut blocks: BTreeMap<String, BTreeMap<(u8, String), Vec<String>>> = BTreeMap::new();
    let rdf_type = rdf("type");
    for t in graph {
        let subj = render_term(&t.subject);
        let pred_key = if t.predicate == rdf_type {
            (0u8, "a".to_string())
        } else {
            (1u8, render_iri(&t.predicate))
        };
        blocks
            .entry(subj)
            .or_default()
            .entry(pred_key)
            .or_default()
            .push(render_term(&t.object));
    }

    for (subj, preds) in blocks {
        out.push('\n');
        let mut first = true;
        for ((_, pred), mut objects) in preds {
            objects.sort();
            objects.dedup();
            let sep = if first { format!("{subj} ") } else { " ;\n    ".to_string() };
            out.push_str(&format!("{sep}{pred} {}", objects.join(", ")));
            first = false;
        }
        out.push_str(" .\n");
    }
    out
}

fn render_term(term: &Term) -> String {
    match term {
        Term::Iri(iri) => render_iri(iri),
        Term::Literal(lit) => render_literal(lit),
        Term::Quoted(t) => format!(
            "<< {} {} {} >>",
            render_term(&t.subject),
            render_iri(&t.predicate),
            render_term(&t.object)
        ),
    }
}

/// Compact an IRI to a prefixed name when a shipped prefix covers it and the
/// local part is name-safe; otherwise fall back to `<...>`.
fn render_iri(iri: &str) -> String {
    let mut best: Option<(&str, &str)> = None;
    for (prefix, ns) in prefix_table() {
        if let Some(local) = iri.strip_prefix(ns.as_str()) {
            if best.map(|(_, b)| ns.len() > iri.len() - b.len()).unwrap_or(true) {
                best = Some((prefix, local));
            }
        }
    }
    match best {
        Some((prefix, local)) if is_safe_local(local) => format!("{prefix}:{local}"),
        _ => format!("<{iri}>"),
    }
}

fn is_safe_local(local: &str) -> bool {
    !local.is_empty()
        && local.chars().next().unwrap().is_ascii_alphanumeric()
        && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn render_literal(lit: &Literal) -> String {
    match &lit.kind {
        LiteralKind::Plain => format!("\"{}\"", escape(&lit.lexical)),
        LiteralKind::Lang(tag) => format!("\"{}\"@{tag}", escape(&lit.lexical)),
        LiteralKind::Typed(dt) => {
            if dt == &expand("xsd", "decimal") && is_decimal_lexical(&lit.lexical) {
                lit.lexical.clone()
            } else if dt == &expand("xsd", "integer") && is_integer_lexical(&lit.lexical) {
                lit.lexical.clone()
            } else {
                format!("\"{}\"^^{}", escape(&lit.lexical), render_iri(dt))
            }
        }
    }
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            !int.is_empty()
                && !frac.is_empty()
                && int.chars().all(|c| c.is_ascii_digit())
                && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out
}

/// Parse a Turtle-star document produced by [`serialize_turtle_star`] (or
/// hand-written in the same subset). Errors carry 1-based line and column.
pub fn parse_turtle_star(text: &str) -> Result<Graph, RdfError> {
    Parser::new(text).parse_document()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    prefixes: BTreeMap<String, String>,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser { chars: text.chars().collect(), pos: 0, line: 1, col: 1, prefixes: BTreeMap::new() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> RdfError {
        RdfError::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn eat(&mut self, expected: char) -> Result<(), RdfError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.bump();
                Ok(())
            }
            found => Err(self.error(format!("expected {expected:?}, found {found:?}"))),
        }
    }

    fn at_str(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn eat_str(&mut self, s: &str) -> Result<(), RdfError> {
        if self.at_str(s) {
            for _ in s.chars() {
                self.bump();
            }
            Ok(())
        } else {
            Err(self.error(format!("expected {s:?}")))
        }
    }

    fn parse_document(mut self) -> Result<Graph, RdfError> {
        let mut graph = Graph::new();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(graph);
            }
            if self.at_str("@prefix") {
                self.parse_prefix_decl()?;
            } else {
                self.parse_triples_block(&mut graph)?;
            }
        }
    }

    fn parse_prefix_decl(&mut self) -> Result<(), RdfError> {
        self.eat_str("@prefix")?;
        self.skip_ws();
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                name.push(c);
                self.bump();
            } else {
                break;
            }
        }
        self.eat(':')?;
        self.skip_ws();
        let iri = self.parse_iri_ref()?;
        self.skip_ws();
        self.eat('.')?;
        self.prefixes.insert(name, iri);
        Ok(())
    }

    fn parse_triples_block(&mut self, graph: &mut Graph) -> Result<(), RdfError> {
        let subject = self.parse_subject()?;
        loop {
            self.skip_ws();
            let predicate = self.parse_verb()?;
            loop {
                self.skip_ws();
                let object = self.parse_object()?;
                graph.insert(
                    Triple::new(subject.clone(), predicate.clone(), object)
                        .map_err(|e| self.error(e.to_string()))?,
                );
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            if self.peek() == Some(';') {
                self.bump();
            } else {
                break;
            }
        }
        self.skip_ws();
        self.eat('.')?;
        Ok(())
    }

    fn parse_subject(&mut self) -> Result<Term, RdfError> {
        if self.at_str("<<") {
            self.parse_quoted()
        } else {
            self.parse_iri_term()
        }
    }

    fn parse_verb(&mut self) -> Result<String, RdfError> {
        if self.peek() == Some('a')
            && self
                .peek_at(1)
                .map(|c| c.is_whitespace() || c == '<')
                .unwrap_or(true)
        {
            self.bump();
            return Ok(rdf("type"));
        }
        match self.parse_iri_term()? {
            Term::Iri(iri) => Ok(iri),
            other => Err(self.error(format!("expected predicate IRI, found {other:?}"))),
        }
    }

    fn parse_object(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') if self.at_str("<<") => self.parse_quoted(),
            Some('"') => self.parse_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.parse_number(),
            _ => self.parse_iri_term(),
        }
    }

    fn parse_quoted(&mut self) -> Result<Term, RdfError> {
        self.eat_str("<<")?;
        self.skip_ws();
        if self.at_str("<<") {
            return Err(self.error("quoted triples may only nest one level deep"));
        }
        let subject = self.parse_iri_term()?;
        self.skip_ws();
        let predicate = self.parse_verb()?;
        self.skip_ws();
        if self.at_str("<<") {
            return Err(self.error("quoted triples may only nest one level deep"));
        }
        let object = match self.peek() {
            Some('"') => self.parse_literal()?,
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' => self.parse_number()?,
            _ => self.parse_iri_term()?,
        };
        self.skip_ws();
        self.eat_str(">>")?;
        let triple =
            Triple::new(subject, predicate, object).map_err(|e| self.error(e.to_string()))?;
        Ok(Term::Quoted(Box::new(triple)))
    }

    /// A prefixed name or `<IRI>` reference, as a [`Term::Iri`].
    fn parse_iri_term(&mut self) -> Result<Term, RdfError> {
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.parse_iri_ref()?)),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                let mut prefix = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        prefix.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.eat(':')?;
                let mut local = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                        local.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                let ns = self
                    .prefixes
                    .get(&prefix)
                    .ok_or_else(|| self.error(format!("undeclared prefix {prefix:?}")))?;
                Ok(Term::Iri(format!("{ns}{local}")))
            }
            found => Err(self.error(format!("expected IRI or prefixed name, found {found:?}"))),
        }
    }

    fn parse_iri_ref(&mut self) -> Result<String, RdfError> {
        self.eat('<')?;
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => return Ok(iri),
                Some(c) if c == '\n' => return Err(self.error("newline inside IRI reference")),
                Some(c) => iri.push(c),
                None => return Err(self.error("unterminated IRI reference")),
            }
        }
    }

    fn parse_literal(&mut self) -> Result<Term, RdfError> {
        self.eat('"')?;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('\\') => lexical.push('\\'),
                    Some('"') => lexical.push('"'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('t') => lexical.push('\t'),
                    other => return Err(self.error(format!("unsupported escape {other:?}"))),
                },
                Some(c) => lexical.push(c),
                None => return Err(self.error("unterminated string literal")),
            }
        }
        let kind = if self.peek() == Some('@') {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    tag.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if tag.is_empty() {
                return Err(self.error("empty language tag"));
            }
            LiteralKind::Lang(tag)
        } else if self.at_str("^^") {
            self.eat_str("^^")?;
            match self.parse_iri_term()? {
                Term::Iri(dt) => LiteralKind::Typed(dt),
                _ => unreachable!("parse_iri_term only returns IRIs"),
            }
        } else {
            LiteralKind::Plain
        };
        Ok(Term::Literal(Literal { lexical, kind }))
    }

    fn parse_number(&mut self) -> Result<Term, RdfError> {
        let mut lexical = String::new();
        if matches!(self.peek(), Some('+') | Some('-')) {
            lexical.push(self.bump().unwrap());
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                lexical.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if lexical.is_empty() || !lexical.chars().last().unwrap().is_ascii_digit() {
            return Err(self.error("malformed numeric literal"));
        }
        let datatype = if self.peek() == Some('.')
            && self.peek_at(1).map(|c| c.is_ascii_digit()).unwrap_or(false)
        {
            lexical.push(self.bump().unwrap());
            while let Some(c) = self.peek() {
                if c.is_ascii_digit() {
                    lexical.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            expand("xsd", "decimal")
        } else {
            expand("xsd", "integer")
        };
        Ok(Term::Literal(Literal::typed(lexical, datatype)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{dct, kb, prov, quoted, sebi, xsd};
    use proptest::prelude::*;

    fn t(s: Term, p: String, o: Term) -> Triple {
        Triple::new(s, p, o).unwrap()
    }

    #[test]
    fn serializes_grouped_sorted_blocks() {
        let mut g = Graph::new();
        g.insert(t(Term::iri(kb("item")), dct("title"), Term::Literal(Literal::lang("X", "en"))));
        g.insert(t(Term::iri(kb("item")), rdf("type"), Term::iri(sebi("Decree"))));
        let out = serialize_turtle_star(&g);
        assert!(out.starts_with("@prefix cito: <http://purl.org/spar/cito/> .\n"));
        assert!(out.ends_with("\nkb:item a sebi:Decree ;\n    dct:title \"X\"@en .\n"), "{out}");
    }

    #[test]
    fn serializes_quoted_subjects_and_bare_decimals() {
        let mut g = Graph::new();
        let q = quoted(Term::iri(kb("item")), rdf("type"), Term::iri(sebi("Forgery"))).unwrap();
        g.insert(t(q.clone(), prov("wasDerivedFrom"), Term::iri(kb("act"))));
        g.insert(t(Term::iri(kb("ev")), crate::rdf::ov("confidence"), Term::Literal(Literal::decimal("1.0"))));
        let out = serialize_turtle_star(&g);
        assert!(
            out.contains("<< kb:item rdf:type sebi:Forgery >> prov:wasDerivedFrom kb:act .\n"),
            "{out}"
        );
        assert!(out.contains("kb:ev ov:confidence 1.0 .\n"), "{out}");
    }

    #[test]
    fn multiple_objects_group_into_comma_lists() {
        let mut g = Graph::new();
        g.insert(t(Term::iri(kb("valla")), rdf("type"), Term::iri(sebi("Human"))));
        g.insert(t(Term::iri(kb("valla")), rdf("type"), Term::iri(dct("Agent"))));
        let out = serialize_turtle_star(&g);
        assert!(out.contains("kb:valla a dct:Agent, sebi:Human .\n"), "{out}");
    }

    #[test]
    fn empty_graph_serializes_to_prefix_block_only() {
        let out = serialize_turtle_star(&Graph::new());
        assert!(out.lines().all(|l| l.starts_with("@prefix") || l.is_empty()));
        assert_eq!(parse_turtle_star(&out).unwrap(), Graph::new());
    }

    #[test]
    fn parses_what_it_writes() {
        let mut g = Graph::new();
        let q = quoted(
            Term::iri(kb("doc")),
            dct("date"),
            Term::iri(kb("8th_century")),
        )
        .unwrap();
        g.insert(t(q, prov("wasDerivedFrom"), Term::iri(kb("act"))));
        g.insert(t(
            Term::iri(kb("act")),
            prov("wasQuotedFrom"),
            Term::Literal(Literal::typed("doc", xsd("anyURI"))),
        ));
        g.insert(t(
            Term::iri(kb("f")),
            crate::rdf::rdfs("label"),
            Term::Literal(Literal::plain("line\nbreak \"quoted\"")),
        ));
        let text = serialize_turtle_star(&g);
        let parsed = parse_turtle_star(&text).unwrap();
        assert_eq!(parsed, g);
        assert_eq!(serialize_turtle_star(&parsed), text);
    }

    #[test]
    fn parse_reports_line_and_column() {
        let text = "@prefix kb: <https://w3id.org/sebi/kb/> .\nkb:x zz:bad kb:y .\n";
        match parse_turtle_star(text) {
            Err(RdfError::Parse { line, col, msg }) => {
                assert_eq!(line, 2);
                assert!(col > 1);
                assert!(msg.contains("zz"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_nested_quotes_and_unterminated_literals() {
        let header = "@prefix kb: <https://w3id.org/sebi/kb/> .\n@prefix prov: <http://www.w3.org/ns/prov#> .\n";
        let nested = format!("{header}<< << kb:a kb:p kb:b >> kb:p kb:c >> prov:x kb:d .\n");
        assert!(matches!(parse_turtle_star(&nested), Err(RdfError::Parse { .. })));
        let unterminated = format!("{header}kb:a kb:p \"oops .\n");
        assert!(matches!(parse_turtle_star(&unterminated), Err(RdfError::Parse { .. })));
    }

    #[test]
    fn parse_accepts_comments() {
        let text = "# a comment\n@prefix kb: <https://w3id.org/sebi/kb/> .\n# another\nkb:a kb:p kb:b . # trailing\n";
        let g = parse_turtle_star(text).unwrap();
        assert_eq!(g.len(), 1);
    }

    fn arb_iri() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z][a-z0-9_]{0,8}".prop_map(|l| kb(&l)),
            "[A-Z][A-Za-z]{0,8}".prop_map(|l| sebi(&l)),
            "[a-z]{1,8}".prop_map(|l| format!("https://example.org/ns/{l}")),
        ]
    }

    fn arb_literal() -> impl Strategy<Value = Literal> {
        prop_oneof![
            "[ -~]{0,12}".prop_map(Literal::plain),
            ("[ -~]{0,12}", prop_oneof!["en".prop_map(String::from), "de".prop_map(String::from)])
                .prop_map(|(l, t)| Literal::lang(l, t)),
            "[a-z/:.]{1,16}".prop_map(|l| Literal::typed(l, xsd("anyURI"))),
            (0u32..1000, 0u32..100).prop_map(|(a, b)| Literal::decimal(format!("{a}.{b:02}"))),
            (-1000i64..1000).prop_map(|n| Literal::typed(n.to_string(), xsd("integer"))),
        ]
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        prop_oneof![
            4 => arb_iri().prop_map(Term::Iri),
            4 => arb_literal().prop_map(Term::Literal),
            1 => (arb_iri(), arb_iri(), arb_iri())
                .prop_map(|(s, p, o)| quoted(Term::Iri(s), p, Term::Iri(o)).unwrap()),
        ]
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        proptest::collection::vec(
            (
                prop_oneof![
                    3 => arb_iri().prop_map(Term::Iri),
                    1 => (arb_iri(), arb_iri(), arb_iri())
                        .prop_map(|(s, p, o)| quoted(Term::Iri(s), p, Term::Iri(o)).unwrap()),
                ],
                arb_iri(),
                arb_term(),
            ),
            0..40,
        )
        .prop_map(|triples| {
            triples
                .into_iter()
                .map(|(s, p, o)| Triple::new(s, p, o).unwrap())
                .collect::<Graph>()
        })
    }

    proptest! {
        #[test]
        fn round_trip_preserves_triples_and_bytes(g in arb_graph()) {
            let first = serialize_turtle_star(&g);
            let parsed = parse_turtle_star(&first).unwrap();
            prop_assert_eq!(&parsed, &g);
            prop_assert_eq!(serialize_turtle_star(&parsed), first);
        }
    }
}
