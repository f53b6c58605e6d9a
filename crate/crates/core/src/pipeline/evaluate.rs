use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{io, GenerationSidecar, PipelineError};
use crate::ingest::load_ontology;
use crate::matcher::{match_candidates, Backend, DesignCQSet, MatcherConfig};
use crate::metrics::{
    categorize_unmatched, label_vocabulary, precision_from_labels, round_half_up, unmatched_stats, word_count,
    EvalMetrics, RoundedMetrics, StatsRow, UnmatchedCategory, ValidationLabels, Verdict, Vocabulary,
};
use crate::prompt::TemplateId;

#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    /// Where candidate files are looked for (this directory and its direct
    /// subdirectories) and where `report.json` and `summary.csv` go.
    pub output_dir: PathBuf,
    /// Explicit candidate files; when empty, files are discovered.
    pub candidates: Vec<PathBuf>,
    pub design_cq_path: Option<PathBuf>,
    pub matcher: MatcherConfig,
    /// Used for triple counts and vocabulary when a candidate file has no
    /// sidecar. Only consulted when exactly one is given.
    pub ontology_paths: Vec<PathBuf>,
    pub validation_labels: Option<PathBuf>,
    /// Audit mode: metrics from given counts, no matching.
    pub counts_fixture: Option<PathBuf>,
}

/// One row of a counts fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsFixtureRow {
    #[serde(default)]
    pub ontology: String,
    pub template: String,
    pub model: String,
    pub n_questions: usize,
    pub n_triples: usize,
    pub n_candidates: usize,
    pub n_validated: usize,
    pub n_unmatched: usize,
    #[serde(default)]
    pub n_design: Option<usize>,
    /// Word counts of the unmatched design questions, for the statistics.
    #[serde(default)]
    pub unmatched_word_counts: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSource {
    Matcher,
    Fixture,
    Labels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnmatchedDesignCQ {
    pub text: String,
    pub word_count: usize,
    pub categories: Vec<UnmatchedCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub ontology: String,
    pub template: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates_file: Option<String>,
    pub source: MetricSource,
    pub n_questions: usize,
    pub n_triples: Option<usize>,
    pub n_candidates: usize,
    pub metrics: Option<EvalMetrics>,
    pub rounded: Option<RoundedMetrics>,
    pub unmatched: Option<StatsRow>,
    pub unmatched_design: Vec<UnmatchedDesignCQ>,
    pub label_valid: Option<usize>,
    pub label_precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub threshold: f64,
    pub backend: Backend,
    pub design_cq_path: Option<String>,
    pub n_design: Option<usize>,
    pub cells: Vec<CellReport>,
}

/// Scores candidate files (or fixture counts) and writes `report.json` and
/// `summary.csv` into the output directory.
pub fn run_evaluate(opts: &EvaluateOptions) -> Result<EvaluationReport, PipelineError> {
    opts.matcher.validate()?;
    let report = if let Some(fixture) = &opts.counts_fixture {
        evaluate_fixture(fixture, opts)?
    } else {
        evaluate_files(opts)?
    };
    let json = serde_json::to_vec_pretty(&report).expect("report serializes");
    io::atomic_write(&opts.output_dir.join("report.json"), &json)?;
    io::atomic_write(&opts.output_dir.join("summary.csv"), summary_csv(&report).as_bytes())?;
    Ok(report)
}

fn evaluate_fixture(path: &Path, opts: &EvaluateOptions) -> Result<EvaluationReport, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
    let rows: Vec<CountsFixtureRow> =
        serde_json::from_str(&text).map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))?;
    let mut cells = Vec::new();
    for r in rows {
        if r.n_validated > r.n_candidates {
            return Err(PipelineError::Format(format!(
                "fixture {} / {}: {} validated of {} candidates",
                r.template, r.model, r.n_validated, r.n_candidates
            )));
        }
        let n_design = r.n_design.unwrap_or(r.n_unmatched);
        let m = EvalMetrics::from_counts(
            r.n_validated,
            r.n_candidates,
            r.n_unmatched,
            n_design,
            r.n_questions,
            r.n_triples,
        );
        let unmatched = match (&r.unmatched_word_counts, r.n_design) {
            (Some(wc), Some(nd)) => unmatched_stats(wc, nd)?,
            (Some(_), None) => {
                return Err(PipelineError::Format(format!(
                    "fixture {} / {}: unmatched_word_counts needs n_design",
                    r.template, r.model
                )))
            }
            _ => None,
        };
        cells.push(CellReport {
            ontology: r.ontology,
            template: r.template,
            model: r.model,
            candidates_file: None,
            source: MetricSource::Fixture,
            n_questions: r.n_questions,
            n_triples: Some(r.n_triples),
            n_candidates: r.n_candidates,
            rounded: Some(m.rounded()),
            metrics: Some(m),
            unmatched,
            unmatched_design: Vec::new(),
            label_valid: None,
            label_precision: None,
        });
    }
    Ok(EvaluationReport {
        threshold: opts.matcher.similarity_threshold,
        backend: opts.matcher.backend,
        design_cq_path: None,
        n_design: None,
        cells,
    })
}

/// `questions_*.csv` in `root` and its direct subdirectories, sorted.
pub fn discover_candidate_files(root: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut found = Vec::new();
    let mut subdirs = Vec::new();
    scan_dir(root, &mut found, Some(&mut subdirs))?;
    for d in subdirs {
        scan_dir(&d, &mut found, None)?;
    }
    found.sort();
    Ok(found)
}

fn scan_dir(dir: &Path, found: &mut Vec<PathBuf>, mut subdirs: Option<&mut Vec<PathBuf>>) -> Result<(), PipelineError> {
    for entry in std::fs::read_dir(dir).map_err(|e| PipelineError::io(dir, e))? {
        let path = entry.map_err(|e| PipelineError::io(dir, e))?.path();
        if path.is_dir() {
            if let Some(s) = subdirs.as_deref_mut() {
                s.push(path);
            }
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| io::parse_questions_filename(n).is_some())
        {
            found.push(path);
        }
    }
    Ok(())
}

struct CellInput {
    path: PathBuf,
    ontology: String,
    template: String,
    model: String,
    candidates: Vec<String>,
    n_questions: usize,
    n_triples: Option<usize>,
}

fn read_cell(path: &Path, opts: &EvaluateOptions, fallback_triples: Option<usize>) -> Result<CellInput, PipelineError> {
    let candidates = io::read_questions_csv(path)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let (template, model) = io::parse_questions_filename(name).unwrap_or(("?".into(), name.to_string()));
    let sidecar_path = GenerationSidecar::path_for(path);
    if sidecar_path.exists() {
        let sc = GenerationSidecar::load(&sidecar_path)?;
        return Ok(CellInput {
            path: path.to_path_buf(),
            ontology: sc.ontology,
            template: sc.template.as_str().to_string(),
            model: sc.model_name,
            candidates,
            n_questions: sc.n_questions,
            n_triples: Some(sc.n_triples),
        });
    }
    let ontology = match opts.ontology_paths.as_slice() {
        [one] => one.display().to_string(),
        _ => String::new(),
    };
    Ok(CellInput {
        path: path.to_path_buf(),
        ontology,
        template,
        model,
        n_questions: candidates.len(),
        candidates,
        n_triples: fallback_triples,
    })
}

fn template_rank(t: &str) -> (TemplateId, String) {
    (t.parse().unwrap_or(TemplateId::Custom(t.to_string())), t.to_string())
}

fn evaluate_files(opts: &EvaluateOptions) -> Result<EvaluationReport, PipelineError> {
    let design = opts.design_cq_path.as_deref().map(DesignCQSet::load).transpose()?;
    let labels = opts
        .validation_labels
        .as_deref()
        .map(ValidationLabels::load)
        .transpose()?;
    if design.is_none() && labels.is_none() {
        return Err(PipelineError::Config(
            "evaluate needs design questions, validation labels or a counts fixture".into(),
        ));
    }
    if design.as_ref().is_some_and(|d| d.is_empty()) {
        return Err(crate::matcher::MatcherError::EmptyDesignSet.into());
    }

    let files = if opts.candidates.is_empty() {
        discover_candidate_files(&opts.output_dir)?
    } else {
        opts.candidates.clone()
    };
    if files.is_empty() {
        return Err(PipelineError::Config(format!(
            "no questions_*.csv files under {}",
            opts.output_dir.display()
        )));
    }

    let mut sets: HashMap<String, Option<crate::ingest::StatementSet>> = HashMap::new();
    let mut set_for = |ontology: &str| -> Option<crate::ingest::StatementSet> {
        if ontology.is_empty() {
            return None;
        }
        sets.entry(ontology.to_string())
            .or_insert_with(|| match load_ontology(Path::new(ontology), None) {
                Ok(s) => Some(s),
                Err(e) => {
                    log::warn!("cannot load {ontology} for vocabulary checks: {e}");
                    None
                }
            })
            .clone()
    };
    let fallback_triples = match opts.ontology_paths.as_slice() {
        [one] => set_for(&one.display().to_string()).map(|s| s.len()),
        _ => None,
    };

    let mut inputs = files
        .iter()
        .map(|f| read_cell(f, opts, fallback_triples))
        .collect::<Result<Vec<_>, _>>()?;
    inputs.sort_by(|a, b| {
        (&a.ontology, template_rank(&a.template), &a.model).cmp(&(&b.ontology, template_rank(&b.template), &b.model))
    });

    let mut cells = Vec::new();
    for input in inputs {
        let vocab: Option<Vocabulary> = set_for(&input.ontology).map(|s| label_vocabulary(&s));
        let mut cell = CellReport {
            ontology: input.ontology.clone(),
            template: input.template.clone(),
            model: input.model.clone(),
            candidates_file: Some(relative_name(&input.path, &opts.output_dir)),
            source: if design.is_some() {
                MetricSource::Matcher
            } else {
                MetricSource::Labels
            },
            n_questions: input.n_questions,
            n_triples: input.n_triples,
            n_candidates: input.candidates.len(),
            metrics: None,
            rounded: None,
            unmatched: None,
            unmatched_design: Vec::new(),
            label_valid: None,
            label_precision: None,
        };
        if let Some(design) = &design {
            let report = match_candidates(&input.candidates, design, &opts.matcher)?;
            let unmatched_idx = report.unmatched_design_indices();
            let m = EvalMetrics::from_counts(
                report.validated_count(),
                input.candidates.len(),
                unmatched_idx.len(),
                design.len(),
                input.n_questions,
                input.n_triples.unwrap_or(0),
            );
            let word_counts: Vec<usize> = unmatched_idx
                .iter()
                .map(|&i| word_count(&design.questions[i]))
                .collect();
            cell.unmatched = unmatched_stats(&word_counts, design.len())?;
            cell.unmatched_design = unmatched_idx
                .iter()
                .map(|&i| {
                    let text = design.questions[i].clone();
                    UnmatchedDesignCQ {
                        word_count: word_count(&text),
                        categories: vocab
                            .as_ref()
                            .map(|v| categorize_unmatched(&text, v).into_iter().collect())
                            .unwrap_or_default(),
                        text,
                    }
                })
                .collect();
            cell.rounded = Some(m.rounded());
            cell.metrics = Some(m);
        }
        if let Some(labels) = &labels {
            let p = precision_from_labels(&input.candidates, labels)?;
            cell.label_valid = Some(
                input
                    .candidates
                    .iter()
                    .filter(|c| labels.get(c).is_some_and(Verdict::counts_as_valid))
                    .count(),
            );
            cell.label_precision = Some(p);
        }
        cells.push(cell);
    }

    Ok(EvaluationReport {
        threshold: opts.matcher.similarity_threshold,
        backend: opts.matcher.backend,
        design_cq_path: opts.design_cq_path.as_ref().map(|p| p.display().to_string()),
        n_design: design.as_ref().map(DesignCQSet::len),
        cells,
    })
}

fn relative_name(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

pub const SUMMARY_HEADER: [&str; 19] = [
    "Ontology",
    "Template",
    "Model",
    "No. Q.",
    "Mean Q/T",
    "No. Candidate CQs",
    "No. Validated CQs",
    "Precision",
    "Recall",
    "F1",
    "Unmatched",
    "Unmatched %",
    "Mean",
    "Std",
    "Min",
    "0.25",
    "0.50",
    "Max",
    "Label Precision",
];

fn summary_row(c: &CellReport) -> Vec<String> {
    let f4 = |x: f64| format!("{:.4}", round_half_up(x, 4));
    let opt = |x: Option<String>| x.unwrap_or_default();
    let mean_qt = c
        .n_triples
        .filter(|&t| t > 0)
        .map(|t| format!("{:.2}", round_half_up(c.n_questions as f64 / t as f64, 2)));
    let validated = c.metrics.as_ref().map(|m| m.tp).or(c.label_valid);
    let mut row = vec![
        c.ontology.clone(),
        c.template.clone(),
        c.model.clone(),
        c.n_questions.to_string(),
        opt(mean_qt),
        c.n_candidates.to_string(),
        opt(validated.map(|v| v.to_string())),
        opt(c.metrics.as_ref().map(|m| f4(m.precision))),
        opt(c.metrics.as_ref().map(|m| f4(m.recall))),
        opt(c.metrics.as_ref().map(|m| f4(m.f1))),
    ];
    match &c.unmatched {
        Some(s) => {
            let cells = s.display_cells();
            row.push(s.n_unmatched.to_string());
            row.push(s.pct_unmatched.to_string());
            row.extend(cells[1..].iter().cloned());
        }
        None => {
            let n = c.metrics.as_ref().map(|m| m.fn_.to_string()).unwrap_or_default();
            row.push(n);
            row.extend(std::iter::repeat_n(String::new(), 7));
        }
    }
    row.push(opt(c.label_precision.map(f4)));
    row
}

/// Table-shaped summary: generation and matching columns, then the
/// unmatched-question statistics, then label precision when available.
pub fn summary_csv(report: &EvaluationReport) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("write to Vec");
    for c in &report.cells {
        w.write_record(summary_row(c)).expect("write to Vec");
    }
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("utf-8")
}

/// Fixed-width text rendering of the summary for terminals.
pub fn render_report_table(report: &EvaluationReport) -> String {
    let rows: Vec<Vec<String>> = std::iter::once(SUMMARY_HEADER.iter().map(|s| s.to_string()).collect())
        .chain(report.cells.iter().map(summary_row))
        .collect();
    let widths: Vec<usize> = (0..SUMMARY_HEADER.len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (n, r) in rows.iter().enumerate() {
        let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if n == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_row_formatting() {
        let dir = tempfile::tempdir().unwrap();
        let fixture = dir.path().join("counts.json");
        std::fs::write(
            &fixture,
            r#"[{"ontology": "vg", "template": "P1", "model": "gpt-4", "n_questions": 1373, "n_triples": 363,
                 "n_candidates": 1306, "n_validated": 1115, "n_unmatched": 5, "n_design": 66,
                 "unmatched_word_counts": [8, 9, 8, 9, 9]}]"#,
        )
        .unwrap();
        let opts = EvaluateOptions {
            output_dir: dir.path().to_path_buf(),
            counts_fixture: Some(fixture),
            ..Default::default()
        };
        run_evaluate(&opts).unwrap();
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let line = summary.lines().nth(1).unwrap();
        assert_eq!(
            line,
            "vg,P1,gpt-4,1373,3.78,1306,1115,0.8538,0.9955,0.9192,5,8,8.6,0.55,8,8,9,9,"
        );
    }
}
