use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{EmbeddingProvider, EmbeddingSet};
use crate::error::{Error, Result};
use crate::transport::{JsonPoster, RetryPolicy, API_KEY_ENV};

/// Settings for an embedding endpoint speaking the common
/// `{"model", "input"} -> {"data": [{"index", "embedding"}]}` shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpProviderConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub batch_size: usize,
    pub timeout_seconds: f64,
    pub max_retries: usize,
    /// First retry delay; doubles on every further retry.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

fn default_backoff_ms() -> u64 {
    500
}

impl HttpProviderConfig {
    pub fn new(endpoint_url: &str, model_name: &str) -> Self {
        Self {
            endpoint_url: endpoint_url.to_owned(),
            model_name: model_name.to_owned(),
            batch_size: 32,
            timeout_seconds: 60.0,
            max_retries: 3,
            backoff_base_ms: default_backoff_ms(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(Error::invalid("timeout_seconds", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    index: usize,
    embedding: Vec<f64>,
}

pub struct HttpProvider {
    config: HttpProviderConfig,
    poster: JsonPoster,
}

impl HttpProvider {
    /// Reads the bearer token from `LLM_API_KEY` when it is set.
    pub fn new(config: HttpProviderConfig) -> Result<Self> {
        Self::with_api_key(config, std::env::var(API_KEY_ENV).ok())
    }

    pub fn with_api_key(config: HttpProviderConfig, api_key: Option<String>) -> Result<Self> {
        config.validate()?;
        let poster = JsonPoster::new(
            &config.endpoint_url,
            Duration::from_secs_f64(config.timeout_seconds),
            api_key,
            RetryPolicy {
                max_retries: config.max_retries,
                backoff_base: Duration::from_millis(config.backoff_base_ms),
            },
        );
        Ok(Self { config, poster })
    }

    fn fetch_batch(&self, batch: &[(String, String)]) -> Result<Vec<Vec<f64>>> {
        let body = json!({
            "model": self.config.model_name,
            "input": batch.iter().map(|(_, text)| text.as_str()).collect::<Vec<_>>(),
        });
        let value: Value = self.poster.post(&body)?;
        let mut response: EmbeddingResponse = serde_json::from_value(value)
            .map_err(|e| Error::ResponseShape(format!("embedding response: {e}")))?;
        response.data.sort_by_key(|d| d.index);
        let indices: Vec<usize> = response.data.iter().map(|d| d.index).collect();
        if indices != (0..batch.len()).collect::<Vec<_>>() {
            return Err(Error::ResponseShape(format!(
                "expected indices 0..{} but got {indices:?}",
                batch.len()
            )));
        }
        Ok(response.data.into_iter().map(|d| d.embedding).collect())
    }
}

impl EmbeddingProvider for HttpProvider {
    /// One request per `batch_size` texts, issued sequentially.
    fn embed(&self, texts: &[(String, String)]) -> Result<EmbeddingSet> {
        let mut set: Option<EmbeddingSet> = None;
        for batch in texts.chunks(self.config.batch_size) {
            let vectors = self.fetch_batch(batch)?;
            for ((id, _), values) in batch.iter().zip(vectors) {
                let target = match &mut set {
                    Some(set) => set,
                    None => set.insert(EmbeddingSet::new(
                        values.len(),
                        format!("http:{}", self.config.model_name),
                    )?),
                };
                target.insert(id.clone(), values)?;
            }
        }
        set.ok_or_else(|| Error::invalid("texts", "nothing to embed"))
    }
}

/// Embeds `texts` through the configured endpoint.
pub fn fetch_embeddings(config: &HttpProviderConfig, texts: &[(String, String)]) -> Result<EmbeddingSet> {
    HttpProvider::new(config.clone())?.embed(texts)
}
