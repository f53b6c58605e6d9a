//! End-to-end orchestration: extract statements, generate and filter
//! questions for every (ontology, template, provider) cell, and evaluate the
//! resulting candidate files.

mod config;
mod evaluate;
pub mod io;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{parse_provider_spec, RunConfig};
pub use evaluate::{
    render_report_table, run_evaluate, summary_csv, CellReport, CountsFixtureRow, EvaluateOptions, EvaluationReport,
    MetricSource, UnmatchedDesignCQ,
};

use crate::filtration::{CandidateCQ, Filter, FiltrationConfig, RemovalReason};
use crate::gateway::{Gateway, GenerationRecord};
use crate::ingest::{load_ontology, IngestCounts, RdfFormat, StatementSet};
use crate::prompt::{PromptInstance, PromptTemplate, TemplateId};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error(transparent)]
    Prompt(#[from] crate::prompt::PromptError),
    #[error(transparent)]
    Filtration(#[from] crate::filtration::FiltrationError),
    #[error(transparent)]
    Gateway(#[from] crate::gateway::GatewayError),
    #[error(transparent)]
    Matcher(#[from] crate::matcher::MatcherError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// Loads an ontology and writes `statements.tsv` into `output_dir`.
pub fn run_extract(path: &Path, format: Option<RdfFormat>, output_dir: &Path) -> Result<StatementSet, PipelineError> {
    let set = load_ontology(path, format)?;
    io::atomic_write(&output_dir.join("statements.tsv"), io::statements_tsv(&set).as_bytes())?;
    Ok(set)
}

/// Provenance written next to each questions CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSidecar {
    pub ontology: String,
    pub template: TemplateId,
    pub provider_id: String,
    pub model_name: String,
    pub ingest: IngestCounts,
    pub n_triples: usize,
    /// Questions extracted from the responses, before filtration.
    pub n_questions: usize,
    pub n_kept: usize,
    pub cache_hits: usize,
    pub truncated_responses: usize,
    pub responses: Vec<ResponseProvenance>,
    pub candidates: Vec<CandidateCQ>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseProvenance {
    pub statement_ordinal: usize,
    pub from_cache: bool,
    pub truncated: bool,
    pub n_questions: usize,
}

impl GenerationSidecar {
    pub fn path_for(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("json")
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Format(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub ontology: String,
    pub template: String,
    pub model: String,
    /// The questions CSV, when the cell succeeded.
    pub csv_path: Option<PathBuf>,
    pub n_questions: usize,
    pub n_kept: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerateOutcome {
    pub cells: Vec<CellOutcome>,
}

impl GenerateOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.cells.iter().all(|c| c.error.is_none())
    }

    pub fn files(&self) -> Vec<&Path> {
        self.cells.iter().filter_map(|c| c.csv_path.as_deref()).collect()
    }
}

fn templates_of(cfg: &RunConfig) -> Result<Vec<PromptTemplate>, PipelineError> {
    let mut out = Vec::new();
    for id in &cfg.templates {
        out.push(PromptTemplate::builtin(id)?);
    }
    for f in &cfg.template_files {
        out.push(PromptTemplate::from_file(f)?);
    }
    Ok(out)
}

struct Generated {
    ontology: String,
    dir: PathBuf,
    set: std::sync::Arc<StatementSet>,
    template: TemplateId,
    provider_id: String,
    model: String,
    records: Vec<GenerationRecord>,
    candidates: Vec<CandidateCQ>,
}

/// Runs every (ontology, template, provider) cell. A failing cell is
/// reported in the outcome and does not stop the others; configuration
/// problems are returned as errors up front.
pub fn run_generate(cfg: &RunConfig) -> Result<GenerateOutcome, PipelineError> {
    cfg.validate()?;
    let templates = templates_of(cfg)?;
    let filter = Filter::new(&cfg.filtration)?;
    let mut gateway = Gateway::new(cfg.seed);
    if let Some(dir) = &cfg.cache_dir {
        gateway = gateway.with_cache_dir(dir)?;
    }

    let dirs = io::ontology_dirs(&cfg.output_dir, &cfg.ontology_paths);
    let mut outcome = GenerateOutcome::default();
    let mut generated: Vec<Generated> = Vec::new();

    for (path, dir) in cfg.ontology_paths.iter().zip(&dirs) {
        let ontology = path.display().to_string();
        let set = match load_ontology(path, None) {
            Ok(s) => std::sync::Arc::new(s),
            Err(e) => {
                for t in &templates {
                    for p in &cfg.providers {
                        outcome
                            .cells
                            .push(failed_cell(&ontology, t.id.as_str(), &p.model_name, &e.to_string()));
                    }
                }
                continue;
            }
        };
        log::info!("{ontology}: {}", set.counts);
        for template in &templates {
            let prompts: Result<Vec<PromptInstance>, _> = set.iter().map(|st| template.render(st)).collect();
            let prompts = match prompts {
                Ok(p) => p,
                Err(e) => {
                    for p in &cfg.providers {
                        outcome.cells.push(failed_cell(
                            &ontology,
                            template.id.as_str(),
                            &p.model_name,
                            &e.to_string(),
                        ));
                    }
                    continue;
                }
            };
            for provider in &cfg.providers {
                match gateway.generate(&prompts, provider, cfg.parallelism) {
                    Ok(records) => {
                        let candidates = if filter.global_dedup() {
                            Vec::new()
                        } else {
                            filter.filter_questions(&records)
                        };
                        generated.push(Generated {
                            ontology: ontology.clone(),
                            dir: dir.clone(),
                            set: set.clone(),
                            template: template.id.clone(),
                            provider_id: provider.provider_id.clone(),
                            model: provider.model_name.clone(),
                            records,
                            candidates,
                        });
                    }
                    Err(e) => {
                        log::error!("{ontology} / {} / {}: {e}", template.id, provider.model_name);
                        outcome.cells.push(failed_cell(
                            &ontology,
                            template.id.as_str(),
                            &provider.model_name,
                            &e.to_string(),
                        ));
                    }
                }
            }
        }
    }

    if filter.global_dedup() {
        apply_global_filter(&filter, &mut generated);
    }

    for g in generated {
        outcome.cells.push(write_cell(g)?);
    }
    Ok(outcome)
}

/// Filters all cells as one sequence, so a question repeated in a later
/// cell counts as a duplicate of the earlier one.
fn apply_global_filter(filter: &Filter, generated: &mut [Generated]) {
    let mut all = Vec::new();
    let mut sizes = Vec::new();
    for g in generated.iter() {
        let cands: Vec<CandidateCQ> = g
            .records
            .iter()
            .flat_map(|r| {
                r.questions.iter().map(|q| {
                    CandidateCQ::new(
                        q.clone(),
                        r.statement_ordinal,
                        r.template_id.clone(),
                        r.provider_id.clone(),
                    )
                })
            })
            .collect();
        sizes.push(cands.len());
        all.extend(cands);
    }
    let mut filtered = filter.filter_candidates(all).into_iter();
    for (g, n) in generated.iter_mut().zip(sizes) {
        g.candidates = filtered.by_ref().take(n).collect();
    }
}

fn failed_cell(ontology: &str, template: &str, model: &str, error: &str) -> CellOutcome {
    CellOutcome {
        ontology: ontology.to_string(),
        template: template.to_string(),
        model: model.to_string(),
        csv_path: None,
        n_questions: 0,
        n_kept: 0,
        error: Some(error.to_string()),
    }
}

fn write_cell(g: Generated) -> Result<CellOutcome, PipelineError> {
    let csv_path = g.dir.join(io::questions_filename(g.template.as_str(), &g.model));
    let kept: Vec<&str> = g
        .candidates
        .iter()
        .filter(|c| c.is_kept())
        .map(|c| c.text.as_str())
        .collect();
    let n_questions: usize = g.records.iter().map(|r| r.questions.len()).sum();
    let sidecar = GenerationSidecar {
        ontology: g.ontology.clone(),
        template: g.template.clone(),
        provider_id: g.provider_id.clone(),
        model_name: g.model.clone(),
        ingest: g.set.counts,
        n_triples: g.set.len(),
        n_questions,
        n_kept: kept.len(),
        cache_hits: g.records.iter().filter(|r| r.from_cache).count(),
        truncated_responses: g.records.iter().filter(|r| r.truncated).count(),
        responses: g
            .records
            .iter()
            .map(|r| ResponseProvenance {
                statement_ordinal: r.statement_ordinal,
                from_cache: r.from_cache,
                truncated: r.truncated,
                n_questions: r.questions.len(),
            })
            .collect(),
        candidates: g.candidates.clone(),
    };
    io::write_questions_csv(&csv_path, &kept)?;
    let json = serde_json::to_vec_pretty(&sidecar).expect("sidecar serializes");
    io::atomic_write(&GenerationSidecar::path_for(&csv_path), &json)?;
    Ok(CellOutcome {
        ontology: g.ontology,
        template: g.template.as_str().to_string(),
        model: g.model,
        csv_path: Some(csv_path),
        n_questions,
        n_kept: kept.len(),
        error: None,
    })
}

/// Result of filtering a questions file on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub n_input: usize,
    pub n_kept: usize,
    pub removed: Vec<(String, RemovalReason)>,
}

/// Re-filters the questions of `input` and writes the kept ones to `output`
/// (a `Questions` CSV) plus a JSON sidecar listing every candidate.
pub fn run_filter(input: &Path, output: &Path, cfg: &FiltrationConfig) -> Result<FilterOutcome, PipelineError> {
    let questions = io::read_questions_csv(input)?;
    let filter = Filter::new(cfg)?;
    let (template, provider) = io::parse_questions_filename(&input.file_name().unwrap_or_default().to_string_lossy())
        .map(|(t, m)| (t.parse().unwrap_or(TemplateId::Custom(t)), m))
        .unwrap_or((TemplateId::Custom("unknown".into()), "unknown".into()));
    let cands: Vec<CandidateCQ> = questions
        .iter()
        .map(|q| CandidateCQ::new(q.clone(), 0, template.clone(), provider.clone()))
        .collect();
    let cands = filter.filter_candidates(cands);
    let kept: Vec<&str> = cands.iter().filter(|c| c.is_kept()).map(|c| c.text.as_str()).collect();
    io::write_questions_csv(output, &kept)?;
    io::atomic_write(
        &output.with_extension("filter.json"),
        &serde_json::to_vec_pretty(&cands).expect("candidates serialize"),
    )?;
    Ok(FilterOutcome {
        n_input: cands.len(),
        n_kept: kept.len(),
        removed: cands
            .iter()
            .filter_map(|c| c.removal_reason.map(|r| (c.text.clone(), r)))
            .collect(),
    })
}
