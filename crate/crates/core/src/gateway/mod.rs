//! Dispatches rendered prompts to chat-completion providers and turns the
//! responses into question lists.

mod cache;
mod config;
mod extract;
pub mod http;
mod mock;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{prompt_digest, CacheEntry, ResponseCache};
pub use config::{ProviderConfig, MAX_BACKOFF};
pub use extract::extract_questions;
pub use mock::{mock_generate, model_seed};

use crate::prompt::{PromptInstance, TemplateId};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("provider returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid provider config: {0}")]
    Config(String),
    #[error("response cache: {0}")]
    Cache(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawResponse {
    pub prompt_digest: String,
    pub provider_id: String,
    pub model_name: String,
    pub text: String,
    pub from_cache: bool,
    #[serde(default)]
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

/// Questions extracted from one response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub statement_ordinal: usize,
    pub template_id: TemplateId,
    pub provider_id: String,
    pub model_name: String,
    pub questions: Vec<String>,
    pub from_cache: bool,
    pub truncated: bool,
}

impl GenerationRecord {
    pub fn from_response(prompt: &PromptInstance, resp: &RawResponse) -> Self {
        GenerationRecord {
            statement_ordinal: prompt.statement_ordinal,
            template_id: prompt.template_id.clone(),
            provider_id: resp.provider_id.clone(),
            model_name: resp.model_name.clone(),
            questions: extract_questions(&resp.text),
            from_cache: resp.from_cache,
            truncated: resp.truncated,
        }
    }
}

/// Provider access with an optional response cache. The mock provider uses
/// `seed`.
pub struct Gateway {
    cache: Option<ResponseCache>,
    client: reqwest::blocking::Client,
    seed: u64,
    network_calls: AtomicUsize,
}

impl Gateway {
    pub fn new(seed: u64) -> Self {
        Gateway {
            cache: None,
            client: reqwest::blocking::Client::new(),
            seed,
            network_calls: AtomicUsize::new(0),
        }
    }

    pub fn with_cache_dir(mut self, dir: &Path) -> Result<Self, GatewayError> {
        self.cache = Some(ResponseCache::open(dir)?);
        Ok(self)
    }

    pub fn cache(&self) -> Option<&ResponseCache> {
        self.cache.as_ref()
    }

    /// HTTP requests sent so far (retries included).
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    /// Cache first; on a miss, the mock or the HTTP provider.
    pub fn complete(&self, prompt: &PromptInstance, cfg: &ProviderConfig) -> Result<RawResponse, GatewayError> {
        let digest = prompt_digest(&cfg.model_name, &prompt.rendered);
        if let Some(hit) = self
            .cache
            .as_ref()
            .and_then(|c| c.get(&digest, &cfg.model_name, &prompt.rendered))
        {
            return Ok(RawResponse {
                prompt_digest: digest,
                provider_id: cfg.provider_id.clone(),
                model_name: cfg.model_name.clone(),
                text: hit.text,
                from_cache: true,
                truncated: hit.truncated,
                latency_ms: None,
            });
        }

        let (text, truncated, latency_ms) = if cfg.is_mock() {
            let text = mock::mock_generate_from_labels(
                &prompt.labels,
                prompt.statement_ordinal,
                &prompt.template_id,
                mock::model_seed(self.seed, &cfg.model_name),
            );
            (text, false, None)
        } else {
            cfg.validate().map_err(GatewayError::Config)?;
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            let c = http::complete(&self.client, cfg, &prompt.rendered)?;
            (c.text, c.truncated, Some(c.latency_ms))
        };
        if truncated {
            log::warn!(
                "{} truncated its answer for statement {} ({})",
                cfg.model_name,
                prompt.statement_ordinal,
                prompt.template_id
            );
        }

        if let Some(cache) = &self.cache {
            cache.put(
                &digest,
                &CacheEntry {
                    model_name: cfg.model_name.clone(),
                    prompt: prompt.rendered.clone(),
                    text: text.clone(),
                    truncated,
                },
            )?;
        }
        Ok(RawResponse {
            prompt_digest: digest,
            provider_id: cfg.provider_id.clone(),
            model_name: cfg.model_name.clone(),
            text,
            from_cache: false,
            truncated,
            latency_ms,
        })
    }

    /// Completes every prompt with at most `parallelism` requests in flight.
    /// Records come back in prompt order whatever the completion order.
    pub fn generate(
        &self,
        prompts: &[PromptInstance],
        cfg: &ProviderConfig,
        parallelism: usize,
    ) -> Result<Vec<GenerationRecord>, GatewayError> {
        use rayon::prelude::*;

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism.max(1))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        pool.install(|| {
            prompts
                .par_iter()
                .map(|p| self.complete(p, cfg).map(|r| GenerationRecord::from_response(p, &r)))
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Statement, Term};
    use crate::prompt::render_prompt;

    fn prompts(n: usize) -> Vec<PromptInstance> {
        (0..n)
            .map(|i| {
                let st = Statement::new(
                    Term::iri(format!("http://ex.org/C{i}x")),
                    Term::iri("http://ex.org/rel"),
                    Term::iri("http://ex.org/Thing"),
                    i,
                );
                render_prompt(&TemplateId::P1, &st).unwrap()
            })
            .collect()
    }

    #[test]
    fn mock_is_deterministic_and_cached() {
        let dir = tempfile::tempdir().unwrap();
        let gw = Gateway::new(7).with_cache_dir(dir.path()).unwrap();
        let cfg = ProviderConfig::mock("mock-a");
        let p = &prompts(1)[0];
        let first = gw.complete(p, &cfg).unwrap();
        assert!(!first.from_cache);
        let second = gw.complete(p, &cfg).unwrap();
        assert!(second.from_cache);
        assert_eq!(first.text, second.text);
        assert_eq!(first.prompt_digest, prompt_digest("mock-a", &p.rendered));
        let uncached = Gateway::new(7).complete(p, &cfg).unwrap();
        assert_eq!(uncached.text, first.text);
    }

    #[test]
    fn ordered_output_under_parallelism() {
        let gw = Gateway::new(1);
        let ps = prompts(40);
        let seq = gw.generate(&ps, &ProviderConfig::mock("m"), 1).unwrap();
        let par = gw.generate(&ps, &ProviderConfig::mock("m"), 8).unwrap();
        assert_eq!(seq, par);
        let ords: Vec<_> = par.iter().map(|r| r.statement_ordinal).collect();
        assert_eq!(ords, (0..40).collect::<Vec<_>>());
        for r in &par {
            assert!(r
                .questions
                .iter()
                .all(|q| !q.is_empty() && q.ends_with('?') && !q.contains('\n')));
        }
        assert_eq!(gw.network_calls(), 0);
    }

    #[test]
    fn missing_credential_is_auth_error() {
        let gw = Gateway::new(0);
        let mut cfg = ProviderConfig::gpt4("http://127.0.0.1:9/v1/chat/completions");
        cfg.api_key_env = Some("RETROFIT_TEST_UNSET_KEY_VAR".into());
        let err = gw.complete(&prompts(1)[0], &cfg).unwrap_err();
        assert!(matches!(err, GatewayError::Auth(_)), "{err}");
    }
}
