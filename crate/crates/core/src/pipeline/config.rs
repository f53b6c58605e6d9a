use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::filtration::FiltrationConfig;
use crate::gateway::ProviderConfig;
use crate::matcher::MatcherConfig;
use crate::prompt::TemplateId;

fn default_templates() -> Vec<TemplateId> {
    TemplateId::BUILTIN.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_parallelism() -> usize {
    4
}

/// Everything a run needs. Loaded from JSON; every field but the ontology
/// list and providers has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub ontology_paths: Vec<PathBuf>,
    #[serde(default = "default_templates")]
    pub templates: Vec<TemplateId>,
    /// Files holding custom template bodies; each adds a template named after
    /// the file stem.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub template_files: Vec<PathBuf>,
    #[serde(default)]
    pub providers: Vec<ProviderConfig>,
    #[serde(default)]
    pub filtration: FiltrationConfig,
    #[serde(default)]
    pub matcher: MatcherConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_cq_path: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ontology_paths: Vec::new(),
            templates: default_templates(),
            template_files: Vec::new(),
            providers: Vec::new(),
            filtration: FiltrationConfig::default(),
            matcher: MatcherConfig::default(),
            design_cq_path: None,
            output_dir: default_output_dir(),
            cache_dir: None,
            parallelism: default_parallelism(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Checks the config is runnable for generation.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.ontology_paths.is_empty() {
            return Err(PipelineError::Config("no ontology given".into()));
        }
        if self.templates.is_empty() && self.template_files.is_empty() {
            return Err(PipelineError::Config("no prompt template given".into()));
        }
        if self.providers.is_empty() {
            return Err(PipelineError::Config("no provider given".into()));
        }
        for p in &self.providers {
            p.validate().map_err(PipelineError::Config)?;
        }
        self.matcher
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }
}

/// Parses a provider given on the command line: `mock:<model>` for the
/// offline mock, or `<model>@<url>` for an OpenAI-compatible endpoint with
/// the model's preset token ceiling.
pub fn parse_provider_spec(spec: &str) -> Result<ProviderConfig, PipelineError> {
    if let Some(model) = spec.strip_prefix("mock:") {
        if model.is_empty() {
            return Err(PipelineError::Config("mock provider needs a model name".into()));
        }
        return Ok(ProviderConfig::mock(model));
    }
    match spec.split_once('@') {
        Some((model, url)) if !model.is_empty() && !url.is_empty() => Ok(ProviderConfig::preset(model, url)),
        _ => Err(PipelineError::Config(format!(
            "provider '{spec}' is neither mock:<model> nor <model>@<url>"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"ontology_paths": ["a.nt"], "providers": [{"provider_id": "mock", "model_name": "m"}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.templates, TemplateId::BUILTIN.to_vec());
        assert_eq!(cfg.filtration.dedup_ratio_threshold, 90);
        assert_eq!(cfg.matcher.similarity_threshold, 0.70);
        assert!(cfg.providers[0].is_mock());
        cfg.validate().unwrap();
        assert!(RunConfig::default().validate().is_err());
    }

    #[test]
    fn provider_specs() {
        assert!(parse_provider_spec("mock:gpt-3.5-turbo").unwrap().is_mock());
        let p = parse_provider_spec("gpt-4@http://localhost:8080/v1/chat/completions").unwrap();
        assert_eq!(p.max_tokens, 8192);
        assert!(parse_provider_spec("gpt-4").is_err());
        assert!(parse_provider_spec("mock:").is_err());
    }
}
