use std::time::Duration;

use serde::{Deserialize, Serialize};

/// One chat-completion provider. A provider without `endpoint_url` is the
/// offline mock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub provider_id: String,
    pub model_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// `None` leaves the provider's default in place.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "default_timeout_ms")]
    pub request_timeout_ms: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    /// Overrides the credential variable name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
}

fn default_max_tokens() -> u32 {
    4096
}
fn default_timeout_ms() -> u64 {
    60_000
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}

pub const MAX_BACKOFF: Duration = Duration::from_secs(30);

impl ProviderConfig {
    fn base(provider_id: &str, model_name: &str, endpoint_url: Option<&str>, max_tokens: u32) -> Self {
        ProviderConfig {
            provider_id: provider_id.to_string(),
            model_name: model_name.to_string(),
            endpoint_url: endpoint_url.map(String::from),
            max_tokens,
            temperature: None,
            request_timeout_ms: default_timeout_ms(),
            max_retries: default_max_retries(),
            initial_backoff_ms: default_backoff_ms(),
            api_key_env: None,
        }
    }

    pub fn mock(model_name: &str) -> Self {
        Self::base("mock", model_name, None, default_max_tokens())
    }

    /// gpt-3.5-class preset: 4096 max tokens.
    pub fn gpt35_turbo(endpoint_url: &str) -> Self {
        Self::base("openai", "gpt-3.5-turbo", Some(endpoint_url), 4096)
    }

    /// gpt-4-class preset: 8192 max tokens.
    pub fn gpt4(endpoint_url: &str) -> Self {
        Self::base("openai", "gpt-4", Some(endpoint_url), 8192)
    }

    /// Preset by model name, falling back to an HTTP provider with the default
    /// ceiling.
    pub fn preset(model_name: &str, endpoint_url: &str) -> Self {
        if model_name.starts_with("gpt-4") {
            Self {
                model_name: model_name.to_string(),
                ..Self::gpt4(endpoint_url)
            }
        } else if model_name.starts_with("gpt-3.5") {
            Self {
                model_name: model_name.to_string(),
                ..Self::gpt35_turbo(endpoint_url)
            }
        } else {
            Self::base("http", model_name, Some(endpoint_url), default_max_tokens())
        }
    }

    pub fn is_mock(&self) -> bool {
        self.endpoint_url.is_none()
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_millis(self.request_timeout_ms)
    }

    /// `RETROFIT_API_KEY_<PROVIDER_ID>`, upper-cased, non-alphanumerics as `_`.
    pub fn credential_var(&self) -> String {
        if let Some(var) = &self.api_key_env {
            return var.clone();
        }
        let id: String = self
            .provider_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() {
                    c.to_ascii_uppercase()
                } else {
                    '_'
                }
            })
            .collect();
        format!("RETROFIT_API_KEY_{id}")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_tokens == 0 {
            return Err(format!("provider {}: max_tokens must be > 0", self.provider_id));
        }
        if self.model_name.trim().is_empty() {
            return Err(format!("provider {}: empty model_name", self.provider_id));
        }
        if let Some(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(format!("provider {}: temperature {t} outside [0, 2]", self.provider_id));
            }
        }
        Ok(())
    }

    /// Backoff before retry `attempt` (0-based): initial × 2^attempt, capped.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let ms = self
            .initial_backoff_ms
            .saturating_mul(1u64.checked_shl(attempt).unwrap_or(u64::MAX));
        Duration::from_millis(ms).min(MAX_BACKOFF)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets() {
        assert_eq!(ProviderConfig::gpt35_turbo("http://x").max_tokens, 4096);
        assert_eq!(ProviderConfig::gpt4("http://x").max_tokens, 8192);
        assert_eq!(ProviderConfig::preset("gpt-4-0613", "http://x").max_tokens, 8192);
        assert_eq!(
            ProviderConfig::preset("gpt-4-0613", "http://x").model_name,
            "gpt-4-0613"
        );
        assert!(ProviderConfig::mock("m").is_mock());
    }

    #[test]
    fn credential_variable() {
        let mut p = ProviderConfig::gpt4("http://x");
        p.provider_id = "open-ai".into();
        assert_eq!(p.credential_var(), "RETROFIT_API_KEY_OPEN_AI");
        p.api_key_env = Some("MY_KEY".into());
        assert_eq!(p.credential_var(), "MY_KEY");
    }

    #[test]
    fn exponential_backoff() {
        let mut p = ProviderConfig::mock("m");
        p.initial_backoff_ms = 100;
        assert_eq!(p.backoff(0), Duration::from_millis(100));
        assert_eq!(p.backoff(3), Duration::from_millis(800));
        assert_eq!(p.backoff(40), MAX_BACKOFF);
    }

    #[test]
    fn json_defaults() {
        let p: ProviderConfig = serde_json::from_str(r#"{"provider_id":"mock","model_name":"mock-a"}"#).unwrap();
        assert_eq!(p.max_tokens, 4096);
        assert_eq!(p.max_retries, 3);
        assert!(p.is_mock());
        let mut bad = p.clone();
        bad.max_tokens = 0;
        assert!(bad.validate().is_err());
    }
}
