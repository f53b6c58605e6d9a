//! Reader for a documented subset of Turtle.
//!
//! Supported: `@prefix`/`PREFIX`, `@base`/`BASE`, prefixed names, `a`,
//! predicate-object lists (`;`), object lists (`,`), IRIs, plain, typed and
//! language-tagged literals (short and long quotes), numeric and boolean
//! literals, and labelled blank nodes. Anonymous blank nodes (`[ ... ]`),
//! collections and quoted triples are rejected with
//! [`IngestError::Unsupported`].

use std::collections::HashMap;

use super::scanner::Scanner;
use super::term::{Statement, Term};
use super::IngestError;
use crate::ingest::RDF_TYPE;

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn parse(src: &str) -> Result<Vec<Statement>, IngestError> {
    let mut parser = TurtleParser {
        sc: Scanner::new(src),
        prefixes: HashMap::new(),
        base: None,
        out: Vec::new(),
    };
    parser.document()?;
    Ok(parser.out)
}

struct TurtleParser<'a> {
    sc: Scanner<'a>,
    prefixes: HashMap<String, String>,
    base: Option<String>,
    out: Vec<Statement>,
}

impl TurtleParser<'_> {
    fn document(&mut self) -> Result<(), IngestError> {
        loop {
            self.sc.skip_ws_and_comments();
            if self.sc.is_eof() {
                return Ok(());
            }
            if self.sc.starts_with("@prefix") {
                self.sc.advance("@prefix".len());
                self.prefix_decl(true)?;
            } else if self.sc.starts_with("@base") {
                self.sc.advance("@base".len());
                self.base_decl(true)?;
            } else if self.keyword_ci("PREFIX") {
                self.prefix_decl(false)?;
            } else if self.keyword_ci("BASE") {
                self.base_decl(false)?;
            } else {
                self.triples()?;
            }
        }
    }

    /// Case-insensitive SPARQL-style keyword followed by whitespace.
    fn keyword_ci(&mut self, kw: &str) -> bool {
        let rest = self.sc.rest();
        let matches = rest.len() > kw.len()
            && rest[..kw.len()].eq_ignore_ascii_case(kw)
            && rest[kw.len()..].starts_with(char::is_whitespace);
        if matches {
            self.sc.advance(kw.len());
        }
        matches
    }

    fn prefix_decl(&mut self, with_dot: bool) -> Result<(), IngestError> {
        self.sc.skip_ws_and_comments();
        let start = self.sc.pos();
        while let Some(c) = self.sc.peek() {
            if c == ':' {
                break;
            }
            if !is_pn_char(c) && c != '.' {
                return Err(self.sc.error("malformed prefix name"));
            }
            self.sc.bump();
        }
        let name = self.sc.rest_from(start).to_string();
        if !self.sc.eat(':') {
            return Err(self.sc.error("expected ':' in prefix declaration"));
        }
        self.sc.skip_ws_and_comments();
        let iri = self.iriref()?;
        self.prefixes.insert(name, iri);
        if with_dot {
            self.sc.skip_ws_and_comments();
            if !self.sc.eat('.') {
                return Err(self.sc.error("expected '.' after @prefix"));
            }
        }
        Ok(())
    }

    fn base_decl(&mut self, with_dot: bool) -> Result<(), IngestError> {
        self.sc.skip_ws_and_comments();
        let iri = self.iriref()?;
        self.base = Some(iri);
        if with_dot {
            self.sc.skip_ws_and_comments();
            if !self.sc.eat('.') {
                return Err(self.sc.error("expected '.' after @base"));
            }
        }
        Ok(())
    }

    fn triples(&mut self) -> Result<(), IngestError> {
        let subject = self.subject()?;
        self.sc.skip_ws_and_comments();
        self.predicate_object_list(&subject)?;
        self.sc.skip_ws_and_comments();
        if !self.sc.eat('.') {
            return Err(self.sc.error("expected '.' at end of triples"));
        }
        Ok(())
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), IngestError> {
        loop {
            let predicate = self.verb()?;
            loop {
                self.sc.skip_ws_and_comments();
                let object = self.object()?;
                let ordinal = self.out.len();
                self.out
                    .push(Statement::new(subject.clone(), predicate.clone(), object, ordinal));
                self.sc.skip_ws_and_comments();
                if !self.sc.eat(',') {
                    break;
                }
            }
            // One or more ';' may follow, optionally closing the list.
            let mut saw_semicolon = false;
            while self.sc.eat(';') {
                saw_semicolon = true;
                self.sc.skip_ws_and_comments();
            }
            if !saw_semicolon || matches!(self.sc.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn subject(&mut self) -> Result<Term, IngestError> {
        match self.sc.peek() {
            Some('<') if self.sc.starts_with("<<") => Err(self.sc.unsupported("quoted triple")),
            Some('<') => Ok(Term::iri(self.iriref()?)),
            Some('_') if self.sc.starts_with("_:") => Ok(Term::blank(self.sc.read_blank_label()?)),
            Some('[') => Err(self.sc.unsupported("anonymous blank node")),
            Some('(') => Err(self.sc.unsupported("collection")),
            Some('{') => Err(self.sc.unsupported("graph block")),
            Some(_) => Ok(Term::iri(self.prefixed_name()?)),
            None => Err(self.sc.error("unexpected end of input")),
        }
    }

    fn verb(&mut self) -> Result<Term, IngestError> {
        if self.sc.peek() == Some('a') {
            let next = self.sc.peek_nth(1);
            if next.is_none_or(|c| !is_pn_char(c) && c != ':' && c != '.') {
                self.sc.bump();
                return Ok(Term::iri(RDF_TYPE));
            }
        }
        match self.sc.peek() {
            Some('<') if self.sc.starts_with("<<") => Err(self.sc.unsupported("quoted triple")),
            Some('<') => Ok(Term::iri(self.iriref()?)),
            Some(c) if is_pn_char(c) || c == ':' => Ok(Term::iri(self.prefixed_name()?)),
            _ => Err(self.sc.error("expected predicate")),
        }
    }

    fn object(&mut self) -> Result<Term, IngestError> {
        match self.sc.peek() {
            Some('<') if self.sc.starts_with("<<") => Err(self.sc.unsupported("quoted triple")),
            Some('<') => Ok(Term::iri(self.iriref()?)),
            Some('_') if self.sc.starts_with("_:") => Ok(Term::blank(self.sc.read_blank_label()?)),
            Some('[') => Err(self.sc.unsupported("anonymous blank node")),
            Some('(') => Err(self.sc.unsupported("collection")),
            Some('"') | Some('\'') => self.literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric(),
            Some(_) => {
                if let Some(b) = self.boolean() {
                    return Ok(Term::typed_literal(b, format!("{XSD}boolean")));
                }
                Ok(Term::iri(self.prefixed_name()?))
            }
            None => Err(self.sc.error("unexpected end of input")),
        }
    }

    fn literal(&mut self) -> Result<Term, IngestError> {
        let lexical = self.sc.read_string(true, true)?;
        if self.sc.peek() == Some('@') {
            let lang = self.sc.read_langtag()?;
            Ok(Term::lang_literal(lexical, lang))
        } else if self.sc.starts_with("^^") {
            self.sc.advance(2);
            let dt = match self.sc.peek() {
                Some('<') => self.iriref()?,
                _ => self.prefixed_name()?,
            };
            Ok(Term::typed_literal(lexical, dt))
        } else {
            Ok(Term::literal(lexical))
        }
    }

    fn numeric(&mut self) -> Result<Term, IngestError> {
        let start = self.sc.pos();
        let rest = self.sc.rest();
        let bytes = rest.as_bytes();
        let mut i = 0;
        if matches!(bytes.first(), Some(b'+') | Some(b'-')) {
            i += 1;
        }
        let int_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let has_int = i > int_start;
        let mut has_frac = false;
        // A '.' is a decimal point only when digits follow it.
        if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            has_frac = true;
        }
        let mut has_exp = false;
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') && (has_int || has_frac) {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            let exp_digits = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_digits {
                i = j;
                has_exp = true;
            }
        }
        if !has_int && !has_frac {
            return Err(self.sc.error_at(start, "malformed numeric literal"));
        }
        let lexical = rest[..i].to_string();
        self.sc.advance(i);
        let dt = if has_exp {
            "double"
        } else if has_frac {
            "decimal"
        } else {
            "integer"
        };
        Ok(Term::typed_literal(lexical, format!("{XSD}{dt}")))
    }

    fn boolean(&mut self) -> Option<String> {
        for kw in ["true", "false"] {
            let rest = self.sc.rest();
            if let Some(after) = rest.strip_prefix(kw) {
                let next = after.chars().next();
                if next.is_none_or(|c| !is_pn_char(c) && c != ':') {
                    self.sc.advance(kw.len());
                    return Some(kw.to_string());
                }
            }
        }
        None
    }

    fn iriref(&mut self) -> Result<String, IngestError> {
        let iri = self.sc.read_iriref()?;
        Ok(self.resolve(iri))
    }

    fn resolve(&self, iri: String) -> String {
        if has_scheme(&iri) {
            return iri;
        }
        let Some(base) = &self.base else {
            return iri;
        };
        if iri.is_empty() {
            return base.clone();
        }
        if iri.starts_with('#') {
            let stem = base.split('#').next().unwrap_or(base);
            return format!("{stem}{iri}");
        }
        if iri.starts_with("//") {
            let scheme = base.split(':').next().unwrap_or("http");
            return format!("{scheme}:{iri}");
        }
        if iri.starts_with('/') {
            let authority_end = base
                .find("://")
                .map(|p| p + 3)
                .and_then(|p| base[p..].find('/').map(|q| p + q))
                .unwrap_or(base.len());
            return format!("{}{iri}", &base[..authority_end]);
        }
        let stem = base.split('#').next().unwrap_or(base);
        let dir = match stem.rfind('/') {
            Some(p) if p + 1 > stem.find("://").map(|q| q + 3).unwrap_or(0) => &stem[..=p],
            _ => stem,
        };
        format!("{dir}{iri}")
    }

    fn prefixed_name(&mut self) -> Result<String, IngestError> {
        let start = self.sc.pos();
        while let Some(c) = self.sc.peek() {
            if c == ':' {
                break;
            }
            if is_pn_char(c) || c == '.' {
                self.sc.bump();
            } else {
                break;
            }
        }
        let prefix = self.sc.rest_from(start).to_string();
        if !self.sc.eat(':') {
            let what = self.sc.rest().chars().next().map(|c| c.to_string()).unwrap_or_default();
            return Err(self.sc.error_at(
                start,
                format!("expected IRI, prefixed name or literal near {prefix}{what:?}"),
            ));
        }
        let mut local = String::new();
        loop {
            match self.sc.peek() {
                Some('\\') => {
                    self.sc.bump();
                    match self.sc.bump() {
                        Some(c) if "_~.-!$&'()*+,;=/?#@%".contains(c) => local.push(c),
                        _ => return Err(self.sc.error("invalid escape in local name")),
                    }
                }
                Some('%') => {
                    let hex = self.sc.rest().get(1..3).unwrap_or("");
                    if hex.len() != 2 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                        return Err(self.sc.error("malformed percent escape in local name"));
                    }
                    local.push('%');
                    local.push_str(hex);
                    self.sc.advance(3);
                }
                Some(c) if is_pn_char(c) || c == ':' => {
                    local.push(c);
                    self.sc.bump();
                }
                Some('.') => {
                    // Dots are allowed inside a local name but not at its end.
                    match self.sc.peek_nth(1) {
                        Some(n) if is_pn_char(n) || n == ':' || n == '%' || n == '\\' => {
                            local.push('.');
                            self.sc.bump();
                        }
                        _ => break,
                    }
                }
                _ => break,
            }
        }
        match self.prefixes.get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(self.sc.error_at(start, format!("undeclared prefix '{prefix}:'"))),
        }
    }
}

fn is_pn_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{b7}'
}

fn has_scheme(iri: &str) -> bool {
    match iri.find(':') {
        Some(p) if p > 0 => {
            let scheme = &iri[..p];
            scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '+' || c == '-' || c == '.')
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ntriples;

    #[test]
    fn prefixes_a_and_lists() {
        let ttl = r#"
@prefix vg: <http://ex.org/vg#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
PREFIX xsd: <http://www.w3.org/2001/XMLSchema#>

vg:Multiplayer a rdfs:Class ;
    rdfs:subClassOf vg:Achievement , vg:Reward ;
    vg:points 10 ;
    vg:note "first"@en, 'second', """long
text"""^^xsd:string .
"#;
        let st = parse(ttl).unwrap();
        let labels: Vec<_> = st.iter().map(|s| s.labels().unwrap().map(String::from)).collect();
        assert_eq!(labels.len(), 7);
        assert_eq!(labels[0], ["Multiplayer", "type", "Class"]);
        assert_eq!(labels[1], ["Multiplayer", "subClassOf", "Achievement"]);
        assert_eq!(labels[2], ["Multiplayer", "subClassOf", "Reward"]);
        assert_eq!(labels[3], ["Multiplayer", "points", "10"]);
        assert_eq!(
            st[3].object.datatype.as_deref(),
            Some("http://www.w3.org/2001/XMLSchema#integer")
        );
        assert_eq!(st[4].object.language.as_deref(), Some("en"));
        assert_eq!(st[5].object.lexical, "second");
        assert_eq!(st[6].object.lexical, "long\ntext");
    }

    #[test]
    fn equals_hand_translated_ntriples() {
        let ttl = "@prefix ex: <http://ex.org/> .\nex:a ex:p ex:b ; ex:q \"x\" , _:n1 .\n_:n1 a ex:C .";
        let nt = concat!(
            "<http://ex.org/a> <http://ex.org/p> <http://ex.org/b> .\n",
            "<http://ex.org/a> <http://ex.org/q> \"x\" .\n",
            "<http://ex.org/a> <http://ex.org/q> _:n1 .\n",
            "_:n1 <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/C> .\n",
        );
        assert_eq!(parse(ttl).unwrap(), ntriples::parse(nt).unwrap());
    }

    #[test]
    fn base_resolution() {
        let ttl = "@base <http://ex.org/onto/main> .\n<#A> <p> </root/B> .";
        let st = parse(ttl).unwrap();
        assert_eq!(st[0].subject.lexical, "http://ex.org/onto/main#A");
        assert_eq!(st[0].predicate.lexical, "http://ex.org/onto/p");
        assert_eq!(st[0].object.lexical, "http://ex.org/root/B");
    }

    #[test]
    fn unsupported_constructs_are_named() {
        let cases = [
            (
                "@prefix ex: <http://ex.org/> .\nex:a ex:p [ ex:q ex:r ] .",
                "anonymous blank node",
            ),
            (
                "@prefix ex: <http://ex.org/> .\nex:a ex:p ( ex:b ex:c ) .",
                "collection",
            ),
            (
                "@prefix ex: <http://ex.org/> .\n<< ex:a ex:p ex:b >> ex:q ex:c .",
                "quoted triple",
            ),
        ];
        for (src, expected) in cases {
            match parse(src) {
                Err(IngestError::Unsupported { construct, line, .. }) => {
                    assert_eq!(construct, expected);
                    assert_eq!(line, 2);
                }
                other => panic!("{src}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn undeclared_prefix_and_missing_dot() {
        assert!(matches!(parse("ex:a ex:p ex:b ."), Err(IngestError::Syntax { .. })));
        assert!(matches!(
            parse("@prefix ex: <http://ex.org/> .\nex:a ex:p ex:b"),
            Err(IngestError::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn trailing_semicolon_and_dotted_local_names() {
        let ttl = "@prefix ex: <http://ex.org/> .\nex:a.b ex:p ex:c.d ;\n  ex:q true ; .\nex:x ex:y -1.5e3 .";
        let st = parse(ttl).unwrap();
        assert_eq!(st.len(), 3);
        assert_eq!(st[0].subject.lexical, "http://ex.org/a.b");
        assert_eq!(st[0].object.lexical, "http://ex.org/c.d");
        assert_eq!(st[1].object.lexical, "true");
        assert_eq!(
            st[2].object.datatype.as_deref(),
            Some("http://www.w3.org/2001/XMLSchema#double")
        );
    }
}
