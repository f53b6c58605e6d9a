//! Evaluation numbers: precision/recall/F1, questions per triple, word-count
//! statistics of unmatched design questions, human-label precision and a few
//! heuristics for explaining why a design question went unmatched.

mod grounding;
mod labels;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grounding::{
    categorize_unmatched, grounding_check, label_vocabulary, split_label, GroundingResult, UnmatchedCategory,
    Vocabulary,
};
pub use labels::{precision_from_labels, ValidationLabels, Verdict};

use crate::matcher::MatchReport;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("cannot compute questions per triple: the ontology has no triples")]
    ZeroTriples,
    #[error("{n_unmatched} unmatched design questions but only {n_design} design questions")]
    TooManyUnmatched { n_unmatched: usize, n_design: usize },
    #[error("{} candidate(s) have no verdict, e.g. {:?}", .0.len(), .0.first().map(String::as_str).unwrap_or(""))]
    MissingVerdicts(Vec<String>),
    #[error("conflicting verdicts for {0:?}")]
    ConflictingVerdict(String),
    #[error("validation labels line {line}: {message}")]
    BadLabels { line: u64, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Rounds half away from zero (half-up for the non-negative values used
/// here) to `places` decimals. A tiny relative nudge keeps values such as
/// 1.005 from falling below the midpoint through binary representation.
pub fn round_half_up(x: f64, places: u32) -> f64 {
    let f = 10f64.powi(places as i32);
    let y = x * f;
    let nudged = y + y.abs() * 1e-12;
    (nudged.abs() + 0.5).floor().copysign(x) / f
}

pub fn mean_questions_per_triple(n_questions: usize, n_triples: usize) -> Result<f64, MetricsError> {
    if n_triples == 0 {
        return Err(MetricsError::ZeroTriples);
    }
    Ok(n_questions as f64 / n_triples as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// No candidates at all, so precision is reported as 0.
    pub precision_undefined: bool,
    /// No validated candidates and no unmatched design questions.
    pub recall_undefined: bool,
    pub n_questions: usize,
    pub n_triples: usize,
    pub mean_q_per_triple: Option<f64>,
    pub n_candidates: usize,
    pub n_design: usize,
}

impl EvalMetrics {
    /// From raw counts: `validated` of `n_candidates` candidates reached a
    /// design question, and `unmatched_design` of `n_design` design questions
    /// were reached by none.
    pub fn from_counts(
        validated: usize,
        n_candidates: usize,
        unmatched_design: usize,
        n_design: usize,
        n_questions: usize,
        n_triples: usize,
    ) -> Self {
        let tp = validated.min(n_candidates);
        let fp = n_candidates - tp;
        let fn_ = unmatched_design;
        let (precision, precision_undefined) = ratio(tp, tp + fp);
        let (recall, recall_undefined) = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalMetrics {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
            n_questions,
            n_triples,
            mean_q_per_triple: mean_questions_per_triple(n_questions, n_triples).ok(),
            n_candidates,
            n_design: n_design.max(unmatched_design),
        }
    }

    pub fn rounded(&self) -> RoundedMetrics {
        RoundedMetrics {
            precision: round_half_up(self.precision, 4),
            recall: round_half_up(self.recall, 4),
            f1: round_half_up(self.f1, 4),
            mean_q_per_triple: self.mean_q_per_triple.map(|m| round_half_up(m, 2)),
        }
    }
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

/// Display values: metrics to 4 decimals, questions per triple to 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundedMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_q_per_triple: Option<f64>,
}

pub fn compute_metrics(
    report: &MatchReport,
    n_questions: usize,
    n_triples: usize,
) -> Result<EvalMetrics, MetricsError> {
    if n_triples == 0 {
        return Err(MetricsError::ZeroTriples);
    }
    Ok(EvalMetrics::from_counts(
        report.validated_count(),
        report.candidate_matches.len(),
        report.design_coverage.len() - report.matched_count(),
        report.design_coverage.len(),
        n_questions,
        n_triples,
    ))
}

/// Whitespace-separated tokens once the trailing `?` is gone.
pub fn word_count(q: &str) -> usize {
    q.trim().trim_end_matches('?').split_whitespace().count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub n_unmatched: usize,
    /// Whole percent of the design set.
    pub pct_unmatched: u32,
    pub mean: f64,
    /// Sample standard deviation; absent for a single value.
    pub std: Option<f64>,
    pub min: usize,
    pub p25: f64,
    pub p50: f64,
    pub max: usize,
}

impl StatsRow {
    /// Cells as printed: `(n) p%`, mean, std (or `-`), min, p25, p50, max.
    pub fn display_cells(&self) -> [String; 7] {
        let num = |x: f64| {
            let r = round_half_up(x, 2);
            let s = format!("{r:.2}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        };
        [
            format!("({}) {}%", self.n_unmatched, self.pct_unmatched),
            num(self.mean),
            self.std.map_or_else(|| "-".to_string(), num),
            self.min.to_string(),
            num(self.p25),
            num(self.p50),
            self.max.to_string(),
        ]
    }
}

/// Linear interpolation at index `p * (n - 1)` of sorted `values`.
pub fn percentile(sorted: &[usize], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] as f64 + (sorted[hi] as f64 - sorted[lo] as f64) * frac
}

/// Word-count statistics of the unmatched design questions. `None` when
/// every design question was matched.
pub fn unmatched_stats(word_counts: &[usize], n_design: usize) -> Result<Option<StatsRow>, MetricsError> {
    if word_counts.is_empty() {
        return Ok(None);
    }
    let n = word_counts.len();
    if n > n_design {
        return Err(MetricsError::TooManyUnmatched {
            n_unmatched: n,
            n_design,
        });
    }
    let mut sorted = word_counts.to_vec();
    sorted.sort_unstable();
    let mean = sorted.iter().sum::<usize>() as f64 / n as f64;
    let std = (n > 1).then(|| {
        let ss: f64 = sorted.iter().map(|&x| (x as f64 - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    });
    Ok(Some(StatsRow {
        n_unmatched: n,
        pct_unmatched: round_half_up(100.0 * n as f64 / n_design as f64, 0) as u32,
        mean,
        std,
        min: sorted[0],
        p25: percentile(&sorted, 0.25),
        p50: percentile(&sorted, 0.50),
        max: sorted[n - 1],
    }))
}
