use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};

use super::label::derive_label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermKind {
    Iri,
    Literal,
    Blank,
}

/// One RDF term as written in the source document.
///
/// `lexical` holds the full IRI, the literal's lexical form, or the blank-node
/// id. `label` is the readable name used in prompts: the derived local name for
/// IRIs, the lexical form for literals, and absent for blank nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl Term {
    /// IRI term; the label is derived from the IRI and is `None` when no local
    /// name can be extracted.
    pub fn iri(iri: impl Into<String>) -> Self {
        let lexical = iri.into();
        let label = derive_label(&lexical).ok();
        Term {
            kind: TermKind::Iri,
            lexical,
            label,
            datatype: None,
            language: None,
        }
    }

    pub fn blank(id: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Blank,
            lexical: id.into(),
            label: None,
            datatype: None,
            language: None,
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        let lexical = lexical.into();
        Term {
            kind: TermKind::Literal,
            label: Some(lexical.clone()),
            lexical,
            datatype: None,
            language: None,
        }
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term {
            datatype: Some(datatype.into()),
            ..Term::literal(lexical)
        }
    }

    pub fn lang_literal(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Term {
            language: Some(language.into()),
            ..Term::literal(lexical)
        }
    }

    pub fn is_blank(&self) -> bool {
        self.kind == TermKind::Blank
    }

    pub fn is_http_iri(&self) -> bool {
        self.kind == TermKind::Iri && (self.lexical.starts_with("http://") || self.lexical.starts_with("https://"))
    }

    /// N-Triples serialization of this term.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        match self.kind {
            TermKind::Iri => {
                out.push('<');
                escape_iri(&self.lexical, &mut out);
                out.push('>');
            }
            TermKind::Blank => {
                out.push_str("_:");
                out.push_str(&self.lexical);
            }
            TermKind::Literal => {
                out.push('"');
                escape_literal(&self.lexical, &mut out);
                out.push('"');
                if let Some(lang) = &self.language {
                    out.push('@');
                    out.push_str(lang);
                } else if let Some(dt) = &self.datatype {
                    out.push_str("^^<");
                    escape_iri(dt, &mut out);
                    out.push('>');
                }
            }
        }
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

fn escape_literal(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn escape_iri(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c if (c as u32) <= 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
}

/// One asserted triple. `ordinal` is the 0-based position in extraction order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
    pub ordinal: usize,
}

impl Statement {
    pub fn new(subject: Term, predicate: Term, object: Term, ordinal: usize) -> Self {
        Statement {
            subject,
            predicate,
            object,
            ordinal,
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Labels of the three terms, if all are present.
    pub fn labels(&self) -> Option<[&str; 3]> {
        Some([
            self.subject.label.as_deref()?,
            self.predicate.label.as_deref()?,
            self.object.label.as_deref()?,
        ])
    }

    pub fn to_ntriples(&self) -> String {
        format!(
            "{} {} {} .",
            self.subject.to_ntriples(),
            self.predicate.to_ntriples(),
            self.object.to_ntriples()
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounts {
    pub parsed: usize,
    pub excluded_blank: usize,
    pub excluded_opaque: usize,
    pub excluded_duplicate: usize,
    pub kept: usize,
}

impl IngestCounts {
    pub fn is_consistent(&self) -> bool {
        self.parsed == self.excluded_blank + self.excluded_opaque + self.excluded_duplicate + self.kept
    }
}

impl fmt::Display for IngestCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parsed={} excluded_blank={} excluded_opaque={} excluded_duplicate={} kept={}",
            self.parsed, self.excluded_blank, self.excluded_opaque, self.excluded_duplicate, self.kept
        )
    }
}

/// Filtered, immutable statements of one ontology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementSet {
    pub statements: Vec<Statement>,
    pub source_id: String,
    pub counts: IngestCounts,
}

impl StatementSet {
    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Statement> {
        self.statements.iter()
    }
}
