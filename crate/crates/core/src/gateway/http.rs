//! Chat-completion HTTP client with retry and exponential backoff.

use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Serialize;
use serde_json::Value;

use super::config::ProviderConfig;
use super::GatewayError;

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

pub(crate) struct Completion {
    pub text: String,
    pub truncated: bool,
    pub latency_ms: u64,
}

/// The request body: one user message carrying the prompt, no system message.
pub fn request_body(cfg: &ProviderConfig, prompt: &str) -> Value {
    serde_json::to_value(ChatRequest {
        model: &cfg.model_name,
        messages: [ChatMessage {
            role: "user",
            content: prompt,
        }],
        max_tokens: cfg.max_tokens,
        temperature: cfg.temperature,
    })
    .expect("request serializes")
}

enum Attempt {
    Done(Completion),
    Retry { err: GatewayError, after: Option<Duration> },
    Fail(GatewayError),
}

pub(crate) fn complete(client: &Client, cfg: &ProviderConfig, prompt: &str) -> Result<Completion, GatewayError> {
    let url = cfg.endpoint_url.as_deref().expect("http provider has an endpoint");
    let var = cfg.credential_var();
    let key = std::env::var(&var).map_err(|_| GatewayError::Auth(format!("missing credential: set {var}")))?;
    let body = request_body(cfg, prompt);

    let mut attempt = 0;
    loop {
        match try_once(client, cfg, url, &key, &body) {
            Attempt::Done(c) => return Ok(c),
            Attempt::Fail(e) => return Err(e),
            Attempt::Retry { err, after } => {
                if attempt >= cfg.max_retries {
                    return Err(err);
                }
                let wait = after
                    .unwrap_or_else(|| cfg.backoff(attempt))
                    .min(super::config::MAX_BACKOFF);
                log::debug!("{}: {err}; retrying in {wait:?}", cfg.provider_id);
                std::thread::sleep(wait);
                attempt += 1;
            }
        }
    }
}

fn try_once(client: &Client, cfg: &ProviderConfig, url: &str, key: &str, body: &Value) -> Attempt {
    let started = Instant::now();
    let resp = client
        .post(url)
        .bearer_auth(key)
        .timeout(cfg.request_timeout())
        .json(body)
        .send();
    let resp = match resp {
        Ok(r) => r,
        Err(e) if e.is_timeout() => {
            return Attempt::Retry {
                err: GatewayError::Timeout(cfg.request_timeout()),
                after: None,
            }
        }
        Err(e) => {
            return Attempt::Retry {
                err: GatewayError::Transport(e.to_string()),
                after: None,
            }
        }
    };
    let status = resp.status();
    let retry_after = resp
        .headers()
        .get(reqwest::header::RETRY_AFTER)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs);
    let text = match resp.text() {
        Ok(t) => t,
        Err(e) if e.is_timeout() => {
            return Attempt::Retry {
                err: GatewayError::Timeout(cfg.request_timeout()),
                after: None,
            }
        }
        Err(e) => {
            return Attempt::Retry {
                err: GatewayError::Transport(e.to_string()),
                after: None,
            }
        }
    };
    match status {
        s if s.is_success() => match parse_completion(&text) {
            Ok((content, truncated)) => Attempt::Done(Completion {
                text: content,
                truncated,
                latency_ms: started.elapsed().as_millis() as u64,
            }),
            Err(e) => Attempt::Fail(e),
        },
        StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => Attempt::Fail(GatewayError::Auth(format!("HTTP {status}"))),
        StatusCode::TOO_MANY_REQUESTS => Attempt::Retry {
            err: GatewayError::RateLimited {
                attempts: cfg.max_retries + 1,
            },
            after: retry_after,
        },
        StatusCode::REQUEST_TIMEOUT | StatusCode::GATEWAY_TIMEOUT => Attempt::Retry {
            err: GatewayError::Timeout(cfg.request_timeout()),
            after: retry_after,
        },
        s if s.is_server_error() => Attempt::Retry {
            err: GatewayError::Http {
                status: s.as_u16(),
                body: truncate(&text),
            },
            after: retry_after,
        },
        s => Attempt::Fail(GatewayError::Http {
            status: s.as_u16(),
            body: truncate(&text),
        }),
    }
}

/// `choices[0].message.content`; `finish_reason == "length"` marks truncation.
pub fn parse_completion(body: &str) -> Result<(String, bool), GatewayError> {
    let v: Value = serde_json::from_str(body).map_err(|e| GatewayError::Malformed(e.to_string()))?;
    let choice = v
        .get("choices")
        .and_then(|c| c.get(0))
        .ok_or_else(|| GatewayError::Malformed("no choices in response".into()))?;
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| GatewayError::Malformed("choice has no message content".into()))?;
    let truncated = choice.get("finish_reason").and_then(Value::as_str) == Some("length");
    Ok((content.to_string(), truncated))
}

fn truncate(s: &str) -> String {
    s.chars().take(300).collect()
}
