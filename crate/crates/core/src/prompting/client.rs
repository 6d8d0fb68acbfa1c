//! Chat-completion client and the backends a prompt run can talk to.

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::transport::{JsonPoster, RetryPolicy, API_KEY_ENV};

pub const DEFAULT_CHAT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub seed: i64,
    pub max_tokens: u32,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub top_p: f64,
    pub max_retries: usize,
    pub timeout_seconds: f64,
    pub backoff_base_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint_url: DEFAULT_CHAT_ENDPOINT.into(),
            model_name: "gpt-4o".into(),
            temperature: 0.0,
            seed: 16,
            max_tokens: 2000,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            top_p: 1.0,
            max_retries: 3,
            timeout_seconds: 120.0,
            backoff_base_ms: 1000,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be non-negative"));
        }
        if self.max_tokens == 0 {
            return Err(Error::invalid("max_tokens", "must be positive"));
        }
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(Error::invalid("timeout_seconds", "must be positive"));
        }
        Ok(())
    }

    /// Request body for a single user message.
    pub fn request_body(&self, prompt: &str) -> Value {
        json!({
            "model": self.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
            "seed": self.seed,
            "max_tokens": self.max_tokens,
            "frequency_penalty": self.frequency_penalty,
            "presence_penalty": self.presence_penalty,
            "top_p": self.top_p,
        })
    }
}

/// Anything that answers a prompt with raw text.
pub trait ChatBackend: Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

pub struct HttpChat {
    config: LlmConfig,
    poster: JsonPoster,
}

impl HttpChat {
    /// Requires `LLM_API_KEY`.
    pub fn new(config: LlmConfig) -> Result<Self> {
        let key = std::env::var(API_KEY_ENV).map_err(|_| Error::MissingEnv(API_KEY_ENV))?;
        Self::with_api_key(config, Some(key))
    }

    pub fn with_api_key(config: LlmConfig, api_key: Option<String>) -> Result<Self> {
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

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }
}

fn assistant_text(response: &Value) -> Result<String> {
    response
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .and_then(|m| m.get("content"))
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| Error::ResponseShape(format!("no choices[0].message.content in {response}")))
}

impl ChatBackend for HttpChat {
    fn complete(&self, prompt: &str) -> Result<String> {
        assistant_text(&self.poster.post(&self.config.request_body(prompt))?)
    }
}

/// One chat request with `config`, authenticated from the environment.
pub fn query_llm(config: &LlmConfig, prompt: &str) -> Result<String> {
    HttpChat::new(config.clone())?.complete(prompt)
}

/// Answers from recorded responses, keyed by prompt text.
#[derive(Debug, Clone, Default)]
pub struct ReplayBackend {
    responses: HashMap<String, String>,
}

impl ReplayBackend {
    pub fn new(responses: HashMap<String, String>) -> Self {
        Self { responses }
    }
}

impl ChatBackend for ReplayBackend {
    fn complete(&self, prompt: &str) -> Result<String> {
        self.responses
            .get(prompt)
            .cloned()
            .ok_or_else(|| Error::Undefined("prompt not present in the replayed transcript".into()))
    }
}

/// Stands in for the network during a dry run; any call is a bug.
#[derive(Debug, Clone, Copy, Default)]
pub struct OfflineBackend;

impl ChatBackend for OfflineBackend {
    fn complete(&self, _prompt: &str) -> Result<String> {
        Err(Error::invalid("backend", "offline backend cannot answer prompts"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_request_body() {
        let body = LlmConfig::default().request_body("hi");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["seed"], 16);
        assert_eq!(body["max_tokens"], 2000);
        assert_eq!(body["top_p"], 1.0);
        assert_eq!(body["messages"][0]["role"], "user");
    }

    #[test]
    fn envelope_errors() {
        assert_eq!(
            assistant_text(&json!({"choices": [{"message": {"content": "ok"}}]})).unwrap(),
            "ok"
        );
        assert!(matches!(assistant_text(&json!({"choices": []})), Err(Error::ResponseShape(_))));
    }
}
