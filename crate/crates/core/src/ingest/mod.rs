//! Ontology ingestion: parse RDF documents into statements and keep the ones
//! whose terms have readable names.

mod label;
pub mod ntriples;
mod scanner;
mod term;
pub mod turtle;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use label::{derive_label, is_opaque_label};
pub use term::{IngestCounts, Statement, StatementSet, Term, TermKind};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported Turtle construct '{construct}' at line {line}, column {column}")]
    Unsupported {
        construct: String,
        line: usize,
        column: usize,
    },
    #[error("IRI has an empty local name: {0}")]
    EmptyLocalName(String),
    #[error("cannot infer RDF format from '{0}'; pass --format")]
    UnknownFormat(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    Ntriples,
    Turtle,
}

impl RdfFormat {
    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("nt") => Ok(RdfFormat::Ntriples),
            Some("ttl") => Ok(RdfFormat::Turtle),
            _ => Err(IngestError::UnknownFormat(path.display().to_string())),
        }
    }
}

impl std::str::FromStr for RdfFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ntriples" | "nt" => Ok(RdfFormat::Ntriples),
            "turtle" | "ttl" => Ok(RdfFormat::Turtle),
            other => Err(format!("unknown format '{other}' (expected ntriples or turtle)")),
        }
    }
}

/// All asserted triples in document order. No filtering.
pub fn parse_ontology(source: &str, format: RdfFormat) -> Result<Vec<Statement>, IngestError> {
    match format {
        RdfFormat::Ntriples => ntriples::parse(source),
        RdfFormat::Turtle => turtle::parse(source),
    }
}

/// Drops statements with blank-node subjects or objects, statements with any
/// unreadable IRI term, and repeated triples. Survivors get consecutive
/// ordinals.
pub fn filter_statements(raw: Vec<Statement>, source_id: impl Into<String>) -> StatementSet {
    let mut counts = IngestCounts {
        parsed: raw.len(),
        ..IngestCounts::default()
    };
    let mut seen = HashSet::new();
    let mut statements = Vec::with_capacity(raw.len());
    for st in raw {
        if st.subject.is_blank() || st.object.is_blank() {
            counts.excluded_blank += 1;
            continue;
        }
        if st.terms().iter().any(|t| is_unreadable(t)) {
            counts.excluded_opaque += 1;
            continue;
        }
        let key = (st.subject.clone(), st.predicate.clone(), st.object.clone());
        if !seen.insert(key) {
            counts.excluded_duplicate += 1;
            continue;
        }
        let ordinal = statements.len();
        statements.push(Statement { ordinal, ..st });
    }
    counts.kept = statements.len();
    StatementSet {
        statements,
        source_id: source_id.into(),
        counts,
    }
}

fn is_unreadable(term: &Term) -> bool {
    match term.kind {
        TermKind::Iri => !term.is_http_iri() || term.label.as_deref().is_none_or(is_opaque_label),
        // Predicates are always IRIs; a blank predicate can only come from
        // hand-built input.
        TermKind::Blank => true,
        TermKind::Literal => false,
    }
}

/// Reads, parses and filters one ontology file. The format is taken from the
/// extension unless given.
pub fn load_ontology(path: &Path, format: Option<RdfFormat>) -> Result<StatementSet, IngestError> {
    let format = match format {
        Some(f) => f,
        None => RdfFormat::from_path(path)?,
    };
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let raw = parse_ontology(&text, format)?;
    Ok(filter_statements(raw, path.display().to_string()))
}
