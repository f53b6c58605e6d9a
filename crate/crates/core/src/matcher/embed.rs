use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{MatcherConfig, MatcherError};

/// Unit-length embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    components: Vec<f64>,
}

impl EmbeddingVector {
    /// L2-normalizes `components`. Fails on an all-zero vector.
    pub fn normalized(mut components: Vec<f64>) -> Result<Self, MatcherError> {
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(MatcherError::ZeroVector);
        }
        components.iter_mut().for_each(|x| *x /= norm);
        Ok(EmbeddingVector { components })
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Cosine similarity of two unit vectors, i.e. their dot product.
pub fn similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, MatcherError> {
    if a.dimension() != b.dimension() {
        return Err(MatcherError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    let dot: f64 = a.components.iter().zip(&b.components).map(|(x, y)| x * y).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

pub const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "of", "to", "in", "on", "at", "for", "and", "or", "by",
    "with", "as", "from", "it", "its", "this", "that", "these", "those", "what", "which", "who", "how", "do", "does",
    "did",
];

/// Lower-cased alphanumeric tokens minus stop words. Falls back to all tokens
/// when every token is a stop word.
pub fn content_tokens(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let all: Vec<&str> = lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    let content: Vec<&str> = all.iter().copied().filter(|t| !STOP_WORDS.contains(t)).collect();
    let chosen = if content.is_empty() { all } else { content };
    chosen.into_iter().map(String::from).collect()
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

/// Bag-of-tokens count vector with feature hashing, L2-normalized.
pub fn embed_lexical(text: &str, dimension: usize) -> Result<EmbeddingVector, MatcherError> {
    let tokens = content_tokens(text);
    if tokens.is_empty() {
        return Err(MatcherError::EmptyAfterTokenization(text.to_string()));
    }
    let mut counts = vec![0.0; dimension];
    for t in &tokens {
        counts[(fnv1a(t.as_bytes()) % dimension as u64) as usize] += 1.0;
    }
    EmbeddingVector::normalized(counts)
}

/// POSTs `{"texts": [...]}` and expects `{"vectors": [[...], ...]}`.
pub fn embed_http(
    client: &reqwest::blocking::Client,
    cfg: &MatcherConfig,
    texts: &[String],
) -> Result<Vec<EmbeddingVector>, MatcherError> {
    let url = cfg
        .endpoint_url
        .as_deref()
        .ok_or_else(|| MatcherError::Endpoint("http_embedding backend needs endpoint_url".into()))?;
    let mut out = Vec::with_capacity(texts.len());
    for chunk in texts.chunks(cfg.batch_size.max(1)) {
        let resp = client
            .post(url)
            .timeout(std::time::Duration::from_millis(cfg.request_timeout_ms))
            .json(&json!({ "texts": chunk }))
            .send()
            .map_err(|e| MatcherError::Endpoint(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(MatcherError::Endpoint(format!("HTTP {status}")));
        }
        #[derive(Deserialize)]
        struct Reply {
            vectors: Vec<Vec<f64>>,
        }
        let reply: Reply = resp
            .json()
            .map_err(|e| MatcherError::Endpoint(format!("malformed embedding response: {e}")))?;
        if reply.vectors.len() != chunk.len() {
            return Err(MatcherError::Endpoint(format!(
                "asked for {} vectors, got {}",
                chunk.len(),
                reply.vectors.len()
            )));
        }
        for v in reply.vectors {
            out.push(EmbeddingVector::normalized(v)?);
        }
    }
    if let Some(first) = out.first() {
        let dim = first.dimension();
        if let Some(bad) = out.iter().find(|v| v.dimension() != dim) {
            return Err(MatcherError::DimensionMismatch(dim, bad.dimension()));
        }
    }
    Ok(out)
}
