//! Validation of candidate questions against design questions by embedding
//! similarity.

mod embed;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use embed::{content_tokens, embed_http, embed_lexical, fnv1a, similarity, EmbeddingVector, STOP_WORDS};

use crate::filtration::normalize_question;

/// Slack for comparing a similarity against the threshold, so that identical
/// texts validate at τ = 1 despite rounding in the dot product.
pub const SIMILARITY_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MatcherError {
    #[error("text has no tokens to embed: {0:?}")]
    EmptyAfterTokenization(String),
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("embedding is the zero vector")]
    ZeroVector,
    #[error("embedding endpoint: {0}")]
    Endpoint(String),
    #[error("similarity threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("design question set is empty")]
    EmptyDesignSet,
    #[error("reading {path}: {message}")]
    Read { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    LexicalFallback,
    HttpEmbedding,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::LexicalFallback => "lexical_fallback",
            Backend::HttpEmbedding => "http_embedding",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lexical_fallback" | "lexical" => Ok(Backend::LexicalFallback),
            "http_embedding" | "http" => Ok(Backend::HttpEmbedding),
            other => Err(format!("unknown matcher backend '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub backend: Backend,
    pub similarity_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    /// Hashing dimension of the lexical backend.
    pub dimension: usize,
    pub batch_size: usize,
    pub request_timeout_ms: u64,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            backend: Backend::LexicalFallback,
            similarity_threshold: 0.70,
            endpoint_url: None,
            dimension: 512,
            batch_size: 64,
            request_timeout_ms: 60_000,
        }
    }
}

impl MatcherConfig {
    pub fn with_threshold(threshold: f64) -> Self {
        MatcherConfig {
            similarity_threshold: threshold,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), MatcherError> {
        if !(0.0..=1.0).contains(&self.similarity_threshold) {
            return Err(MatcherError::BadThreshold(self.similarity_threshold));
        }
        Ok(())
    }
}

/// Design-stage questions, cleaned: trimmed, single-spaced, `?`-terminated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCQSet {
    pub questions: Vec<String>,
    pub source_path: String,
}

impl DesignCQSet {
    pub fn new(questions: impl IntoIterator<Item = impl AsRef<str>>, source_path: impl Into<String>) -> Self {
        DesignCQSet {
            questions: questions
                .into_iter()
                .filter_map(|q| clean_design_question(q.as_ref()))
                .collect(),
            source_path: source_path.into(),
        }
    }

    /// Plain text (one question per line) or CSV whose header is `Questions`.
    pub fn parse(text: &str, source_path: &str) -> Result<Self, MatcherError> {
        let first = text.lines().next().unwrap_or("").trim().trim_start_matches('\u{feff}');
        if first == "Questions" {
            let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
            let mut qs = Vec::new();
            for rec in rdr.records() {
                let rec = rec.map_err(|e| MatcherError::Read {
                    path: source_path.to_string(),
                    message: e.to_string(),
                })?;
                if let Some(q) = rec.get(0) {
                    qs.push(q.to_string());
                }
            }
            Ok(DesignCQSet::new(qs, source_path))
        } else {
            Ok(DesignCQSet::new(text.lines(), source_path))
        }
    }

    pub fn load(path: &Path) -> Result<Self, MatcherError> {
        let text = std::fs::read_to_string(path).map_err(|e| MatcherError::Read {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }
}

fn clean_design_question(line: &str) -> Option<String> {
    let q = line.split_whitespace().collect::<Vec<_>>().join(" ");
    if !q.chars().any(char::is_alphanumeric) {
        return None;
    }
    Some(if q.ends_with('?') {
        q
    } else {
        format!("{}?", q.trim_end_matches(|c: char| c.is_ascii_punctuation()))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateMatch {
    pub best_design: Option<usize>,
    pub similarity: Option<f64>,
    pub validated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatch {
    pub best_candidate: Option<usize>,
    pub similarity: Option<f64>,
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub candidate_matches: Vec<CandidateMatch>,
    pub design_coverage: Vec<DesignMatch>,
    pub threshold: f64,
    pub backend: Backend,
}

impl MatchReport {
    pub fn validated_count(&self) -> usize {
        self.candidate_matches.iter().filter(|m| m.validated).count()
    }

    pub fn matched_count(&self) -> usize {
        self.design_coverage.iter().filter(|m| m.matched).count()
    }

    pub fn unmatched_design_indices(&self) -> Vec<usize> {
        self.design_coverage
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.matched)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Embeds texts (normalized first). Texts with nothing to embed get `None`.
pub struct Embedder {
    cfg: MatcherConfig,
    client: Option<reqwest::blocking::Client>,
}

impl Embedder {
    pub fn new(cfg: &MatcherConfig) -> Self {
        let client = (cfg.backend == Backend::HttpEmbedding).then(reqwest::blocking::Client::new);
        Embedder {
            cfg: cfg.clone(),
            client,
        }
    }

    pub fn embed(&self, text: &str) -> Result<EmbeddingVector, MatcherError> {
        self.embed_all(&[text.to_string()])?
            .pop()
            .flatten()
            .ok_or_else(|| MatcherError::EmptyAfterTokenization(text.to_string()))
    }

    pub fn embed_all(&self, texts: &[String]) -> Result<Vec<Option<EmbeddingVector>>, MatcherError> {
        let normalized: Vec<String> = texts.iter().map(|t| normalize_question(t)).collect();
        match self.cfg.backend {
            Backend::LexicalFallback => Ok(normalized
                .par_iter()
                .map(|t| embed_lexical(t, self.cfg.dimension).ok())
                .collect()),
            Backend::HttpEmbedding => {
                let idx: Vec<usize> = (0..texts.len())
                    .filter(|&i| normalized[i].chars().any(char::is_alphanumeric))
                    .collect();
                let payload: Vec<String> = idx.iter().map(|&i| normalized[i].clone()).collect();
                let client = self.client.as_ref().expect("http client");
                let vectors = embed_http(client, &self.cfg, &payload)?;
                let mut out = vec![None; texts.len()];
                for (i, v) in idx.into_iter().zip(vectors) {
                    out[i] = Some(v);
                }
                Ok(out)
            }
        }
    }
}

/// Full candidate × design similarity matrix. Rows or columns whose text
/// could not be embedded are `None`.
pub fn similarity_matrix(
    candidates: &[Option<EmbeddingVector>],
    design: &[Option<EmbeddingVector>],
) -> Result<Vec<Vec<Option<f64>>>, MatcherError> {
    candidates
        .par_iter()
        .map(|c| {
            design
                .iter()
                .map(|d| match (c, d) {
                    (Some(c), Some(d)) => similarity(c, d).map(Some),
                    _ => Ok(None),
                })
                .collect()
        })
        .collect()
}

/// Flags candidates and design questions from the row and column maxima.
pub fn report_from_matrix(
    matrix: &[Vec<Option<f64>>],
    n_design: usize,
    threshold: f64,
    backend: Backend,
) -> MatchReport {
    let best = |iter: &mut dyn Iterator<Item = (usize, Option<f64>)>| -> (Option<usize>, Option<f64>) {
        let mut best: (Option<usize>, Option<f64>) = (None, None);
        for (i, s) in iter {
            if let Some(s) = s {
                if best.1.is_none_or(|b| s > b) {
                    best = (Some(i), Some(s));
                }
            }
        }
        best
    };
    let passes = |s: Option<f64>| s.is_some_and(|s| s + SIMILARITY_EPS >= threshold);

    let candidate_matches = matrix
        .iter()
        .map(|row| {
            let (idx, sim) = best(&mut row.iter().copied().enumerate());
            CandidateMatch {
                best_design: idx,
                similarity: sim,
                validated: passes(sim),
            }
        })
        .collect();
    let design_coverage = (0..n_design)
        .map(|j| {
            let (idx, sim) = best(&mut matrix.iter().map(|row| row[j]).enumerate());
            DesignMatch {
                best_candidate: idx,
                similarity: sim,
                matched: passes(sim),
            }
        })
        .collect();
    MatchReport {
        candidate_matches,
        design_coverage,
        threshold,
        backend,
    }
}

/// Many-to-one matching: a candidate is validated when its best similarity to
/// any design question reaches τ, and a design question is matched when some
/// candidate reaches τ against it.
pub fn match_candidates(
    candidates: &[String],
    design: &DesignCQSet,
    cfg: &MatcherConfig,
) -> Result<MatchReport, MatcherError> {
    cfg.validate()?;
    if design.is_empty() {
        return Err(MatcherError::EmptyDesignSet);
    }
    let embedder = Embedder::new(cfg);
    let cand_vecs = embedder.embed_all(candidates)?;
    let design_vecs = embedder.embed_all(&design.questions)?;
    let matrix = similarity_matrix(&cand_vecs, &design_vecs)?;
    Ok(report_from_matrix(
        &matrix,
        design.len(),
        cfg.similarity_threshold,
        cfg.backend,
    ))
}
