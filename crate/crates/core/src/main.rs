use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use retrofit_cq::filtration::{read_pattern_file, FiltrationConfig, Strictness};
use retrofit_cq::ingest::RdfFormat;
use retrofit_cq::matcher::Backend;
use retrofit_cq::pipeline::{
    self, parse_provider_spec, render_report_table, summary_csv, EvaluateOptions, EvaluationReport, RunConfig,
};
use retrofit_cq::prompt::{list_templates, PromptTemplate, TemplateId};

/// Retrofit candidate competency questions onto an existing ontology.
#[derive(Parser)]
#[command(name = "retrofit-cq", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the readable statements of an ontology as statements.tsv.
    Extract {
        ontology: PathBuf,
        /// nt or ttl; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<RdfFormat>,
        #[arg(long, default_value = ".")]
        output_dir: PathBuf,
    },
    /// Generate and filter questions for every template and provider.
    Generate(GenerateArgs),
    /// Re-run filtration over an existing questions CSV.
    Filter {
        input: PathBuf,
        /// Defaults to <input stem>_filtered.csv next to the input.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        filtration: FiltrationArgs,
    },
    /// Match candidates against design questions and compute metrics.
    Evaluate(EvaluateArgs),
    /// Print a previously written report.
    Report {
        /// report.json, or a directory containing one.
        #[arg(default_value = ".")]
        path: PathBuf,
        #[arg(long, value_parser = ["table", "csv", "json"], default_value = "table")]
        format: String,
    },
    /// Prompt templates.
    Templates {
        #[command(subcommand)]
        action: TemplatesAction,
    },
}

#[derive(Subcommand)]
enum TemplatesAction {
    /// Show the built-in templates and any custom template files.
    List {
        #[arg(long = "template-file")]
        template_files: Vec<PathBuf>,
    },
}

#[derive(Args, Default)]
struct FiltrationArgs {
    /// Token-sort ratio (0-100) at or above which questions are duplicates.
    #[arg(long)]
    dedup_threshold: Option<u32>,
    /// off, lenient or strict.
    #[arg(long)]
    strictness: Option<Strictness>,
    /// Deduplicate across all output files instead of per file.
    #[arg(long)]
    global_dedup: bool,
    #[arg(long)]
    primitive_lexicon: Option<PathBuf>,
    #[arg(long)]
    narrative_patterns: Option<PathBuf>,
}

impl FiltrationArgs {
    fn apply(&self, cfg: &mut FiltrationConfig) -> Result<()> {
        if let Some(t) = self.dedup_threshold {
            cfg.dedup_ratio_threshold = t;
        }
        if let Some(s) = self.strictness {
            cfg.strictness = s;
        }
        if self.global_dedup {
            cfg.global_dedup = true;
        }
        if let Some(p) = &self.primitive_lexicon {
            cfg.primitive_lexicon = read_pattern_file(p)?;
        }
        if let Some(p) = &self.narrative_patterns {
            cfg.narrative_patterns = read_pattern_file(p)?;
        }
        Ok(())
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "ontology")]
    ontologies: Vec<PathBuf>,
    /// P1, P2 or P3 (repeatable); replaces the configured list.
    #[arg(long = "template")]
    templates: Vec<TemplateId>,
    /// Custom template file with one <statement> slot (repeatable).
    #[arg(long = "template-file")]
    template_files: Vec<PathBuf>,
    /// mock:<model> or <model>@<endpoint-url> (repeatable); replaces the
    /// configured providers.
    #[arg(long = "provider")]
    providers: Vec<String>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[command(flatten)]
    filtration: FiltrationArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// JSON run configuration (design questions, matcher, output directory).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Design questions: one per line, or a CSV with header `Questions`.
    #[arg(long)]
    design_cqs: Option<PathBuf>,
    /// Candidate files to score; by default every questions_*.csv found.
    #[arg(long = "candidates")]
    candidates: Vec<PathBuf>,
    /// Ontology for triple counts and vocabulary when there is no sidecar.
    #[arg(long = "ontology")]
    ontologies: Vec<PathBuf>,
    /// Similarity threshold in [0, 1].
    #[arg(long)]
    threshold: Option<f64>,
    /// lexical_fallback or http_embedding.
    #[arg(long)]
    backend: Option<Backend>,
    #[arg(long)]
    embedding_url: Option<String>,
    /// Compute metrics from given counts instead of matching (JSON list).
    #[arg(long)]
    counts_fixture: Option<PathBuf>,
    /// Reviewer verdicts, CSV with header `question,verdict`.
    #[arg(long)]
    validation_labels: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Extract {
            ontology,
            format,
            output_dir,
        } => {
            let set = pipeline::run_extract(&ontology, format, &output_dir)
                .with_context(|| format!("extracting {}", ontology.display()))?;
            eprintln!("{}: {}", ontology.display(), set.counts);
            println!("{}", output_dir.join("statements.tsv").display());
        }
        Command::Generate(args) => return generate(args),
        Command::Filter {
            input,
            output,
            filtration,
        } => {
            let mut cfg = FiltrationConfig::default();
            filtration.apply(&mut cfg)?;
            let output = output.unwrap_or_else(|| filtered_name(&input));
            if output == input {
                bail!("refusing to overwrite the input file");
            }
            let out = pipeline::run_filter(&input, &output, &cfg)?;
            eprintln!("{} of {} questions kept", out.n_kept, out.n_input);
            for (q, reason) in &out.removed {
                eprintln!("  removed ({}): {q}", reason.as_str());
            }
            println!("{}", output.display());
        }
        Command::Evaluate(args) => evaluate(args)?,
        Command::Report { path, format } => {
            let file = if path.is_dir() { path.join("report.json") } else { path };
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let report: EvaluationReport =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
            match format.as_str() {
                "csv" => print!("{}", summary_csv(&report)),
                "json" => println!("{}", serde_json::to_string_pretty(&report)?),
                _ => print!("{}", render_report_table(&report)),
            }
        }
        Command::Templates {
            action: TemplatesAction::List { template_files },
        } => {
            let mut all = list_templates();
            for f in &template_files {
                all.push(PromptTemplate::from_file(f)?);
            }
            for t in all {
                let suffix = if t.append_statement { " <statement>" } else { "" };
                println!("{}\t{}{suffix}", t.id, t.body.replace('\n', " "));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn filtered_name(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    input.with_file_name(format!("{stem}_filtered.csv"))
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !args.ontologies.is_empty() {
        cfg.ontology_paths = args.ontologies;
    }
    if !args.templates.is_empty() {
        cfg.templates = args.templates;
    }
    if !args.template_files.is_empty() {
        cfg.template_files = args.template_files;
    }
    if !args.providers.is_empty() {
        cfg.providers = args
            .providers
            .iter()
            .map(|s| parse_provider_spec(s))
            .collect::<Result<_, _>>()?;
    }
    if let Some(d) = args.output_dir {
        cfg.output_dir = d;
    }
    if let Some(d) = args.cache_dir {
        cfg.cache_dir = Some(d);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.parallelism {
        cfg.parallelism = p;
    }
    args.filtration.apply(&mut cfg.filtration)?;

    let outcome = pipeline::run_generate(&cfg)?;
    for cell in &outcome.cells {
        match (&cell.csv_path, &cell.error) {
            (Some(path), _) => {
                eprintln!(
                    "{} / {} / {}: {} questions, {} kept",
                    cell.ontology, cell.template, cell.model, cell.n_questions, cell.n_kept
                );
                println!("{}", path.display());
            }
            (None, Some(err)) => eprintln!("{} / {} / {}: FAILED: {err}", cell.ontology, cell.template, cell.model),
            (None, None) => {}
        }
    }
    Ok(if outcome.all_succeeded() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(p) => Some(RunConfig::load(p)?),
        None => None,
    };
    let mut matcher = cfg.as_ref().map(|c| c.matcher.clone()).unwrap_or_default();
    if let Some(t) = args.threshold {
        matcher.similarity_threshold = t;
    }
    if let Some(b) = args.backend {
        matcher.backend = b;
    }
    if let Some(u) = args.embedding_url {
        matcher.endpoint_url = Some(u);
    }
    let opts = EvaluateOptions {
        output_dir: args
            .output_dir
            .or_else(|| cfg.as_ref().map(|c| c.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from(".")),
        candidates: args.candidates,
        design_cq_path: args
            .design_cqs
            .or_else(|| cfg.as_ref().and_then(|c| c.design_cq_path.clone())),
        matcher,
        ontology_paths: if args.ontologies.is_empty() {
            cfg.as_ref().map(|c| c.ontology_paths.clone()).unwrap_or_default()
        } else {
            args.ontologies
        },
        validation_labels: args.validation_labels,
        counts_fixture: args.counts_fixture,
    };
    let report = pipeline::run_evaluate(&opts)?;
    print!("{}", render_report_table(&report));
    Ok(())
}
