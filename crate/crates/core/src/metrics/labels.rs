use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MetricsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Valid,
    Invalid,
    /// Not a design question, but judged useful in hindsight.
    HindsightValid,
}

impl Verdict {
    pub fn counts_as_valid(self) -> bool {
        matches!(self, Verdict::Valid | Verdict::HindsightValid)
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "valid" => Ok(Verdict::Valid),
            "invalid" => Ok(Verdict::Invalid),
            "hindsight_valid" => Ok(Verdict::HindsightValid),
            other => Err(format!("unknown verdict '{other}'")),
        }
    }
}

/// Reviewer verdicts keyed by the trimmed candidate text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationLabels {
    pub entries: BTreeMap<String, Verdict>,
}

impl ValidationLabels {
    /// Adds a verdict. Repeating a text with the same verdict is harmless; a
    /// different verdict is an error.
    pub fn insert(&mut self, question: &str, verdict: Verdict) -> Result<(), MetricsError> {
        let key = question.trim().to_string();
        match self.entries.get(&key) {
            Some(v) if *v != verdict => Err(MetricsError::ConflictingVerdict(key)),
            _ => {
                self.entries.insert(key, verdict);
                Ok(())
            }
        }
    }

    pub fn get(&self, question: &str) -> Option<Verdict> {
        self.entries.get(question.trim()).copied()
    }

    /// CSV with header `question,verdict`.
    pub fn parse_csv(text: &str) -> Result<Self, MetricsError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let bad = |line: u64, message: String| MetricsError::BadLabels { line, message };
        let headers = rdr.headers().map_err(|e| bad(1, e.to_string()))?.clone();
        let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
        let (Some(qi), Some(vi)) = (col("question"), col("verdict")) else {
            return Err(bad(1, "header must be `question,verdict`".into()));
        };
        let mut labels = ValidationLabels::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line());
            let q = rec.get(qi).unwrap_or("");
            let v: Verdict = rec.get(vi).unwrap_or("").parse().map_err(|m| bad(line, m))?;
            labels.insert(q, v)?;
        }
        Ok(labels)
    }

    pub fn load(path: &Path) -> Result<Self, MetricsError> {
        let text = std::fs::read_to_string(path).map_err(|source| MetricsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_csv(&text)
    }
}

/// Share of candidates a reviewer judged valid (including hindsight-valid).
/// Every candidate needs a verdict.
pub fn precision_from_labels<S: AsRef<str>>(candidates: &[S], labels: &ValidationLabels) -> Result<f64, MetricsError> {
    let missing: Vec<String> = candidates
        .iter()
        .filter(|c| labels.get(c.as_ref()).is_none())
        .map(|c| c.as_ref().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingVerdicts(missing));
    }
    if candidates.is_empty() {
        return Ok(0.0);
    }
    let valid = candidates
        .iter()
        .filter(|c| labels.get(c.as_ref()).is_some_and(Verdict::counts_as_valid))
        .count();
    Ok(valid as f64 / candidates.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::round_half_up;

    fn labelled(n: usize, valid: usize) -> (Vec<String>, ValidationLabels) {
        let qs: Vec<String> = (0..n).map(|i| format!("Question number {i}?")).collect();
        let mut l = ValidationLabels::default();
        for (i, q) in qs.iter().enumerate() {
            let v = match i {
                i if i < valid / 2 => Verdict::Valid,
                i if i < valid => Verdict::HindsightValid,
                _ => Verdict::Invalid,
            };
            l.insert(q, v).unwrap();
        }
        (qs, l)
    }

    #[test]
    fn solar_system_rows() {
        let (qs, l) = labelled(206, 180);
        assert_eq!(round_half_up(precision_from_labels(&qs, &l).unwrap(), 4), 0.8738);
        let (qs, l) = labelled(800, 609);
        assert_eq!(round_half_up(precision_from_labels(&qs, &l).unwrap(), 4), 0.7613);
        let (qs, l) = labelled(12, 0);
        assert_eq!(precision_from_labels(&qs, &l).unwrap(), 0.0);
    }

    #[test]
    fn missing_and_conflicting() {
        let (mut qs, l) = labelled(3, 1);
        qs.push("Unlabelled?".into());
        match precision_from_labels(&qs, &l) {
            Err(MetricsError::MissingVerdicts(m)) => assert_eq!(m, ["Unlabelled?"]),
            other => panic!("{other:?}"),
        }
        let mut l = ValidationLabels::default();
        l.insert("Q?", Verdict::Valid).unwrap();
        l.insert(" Q? ", Verdict::Valid).unwrap();
        assert!(l.insert("Q?", Verdict::Invalid).is_err());
    }

    #[test]
    fn csv_input() {
        let l = ValidationLabels::parse_csv(
            "question,verdict\n\"What is X, exactly?\",valid\nWhy?,hindsight-valid\nHow?,invalid\n",
        )
        .unwrap();
        assert_eq!(l.get("What is X, exactly?"), Some(Verdict::Valid));
        assert_eq!(l.get("Why?"), Some(Verdict::HindsightValid));
        assert!(ValidationLabels::parse_csv("q,v\nx,valid\n").is_err());
        match ValidationLabels::parse_csv("question,verdict\nx,maybe\n") {
            Err(MetricsError::BadLabels { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
