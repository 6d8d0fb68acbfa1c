//! Blocking JSON-over-HTTP POST with bounded exponential-backoff retries,
//! shared by the embedding and chat-completion clients.

use std::thread;
use std::time::Duration;

use serde_json::Value;

use crate::error::{Error, Result};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: usize,
    /// Delay before retry `n` is `base * 2^n`.
    pub backoff_base: Duration,
}

pub(crate) struct JsonPoster {
    agent: ureq::Agent,
    url: String,
    api_key: Option<String>,
    retry: RetryPolicy,
}

impl JsonPoster {
    pub fn new(url: &str, timeout: Duration, api_key: Option<String>, retry: RetryPolicy) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            url: url.to_owned(),
            api_key,
            retry,
        }
    }

    /// Posts `body`; 429, 5xx and transport failures are retried, 401/403
    /// fail immediately as authentication errors.
    pub fn post(&self, body: &Value) -> Result<Value> {
        let payload = body.to_string();
        let mut last_error = String::new();
        let attempts = self.retry.max_retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                let factor = 1u32.checked_shl(attempt as u32 - 1).unwrap_or(u32::MAX);
                thread::sleep(self.retry.backoff_base.saturating_mul(factor));
            }
            let mut request = self
                .agent
                .post(&self.url)
                .header("Content-Type", "application/json");
            if let Some(key) = &self.api_key {
                request = request.header("Authorization", &format!("Bearer {key}"));
            }
            match request.send(payload.as_str()) {
                Ok(mut response) => {
                    let status = response.status().as_u16();
                    let text = response.body_mut().read_to_string().unwrap_or_default();
                    match status {
                        200..=299 => {
                            return serde_json::from_str(&text).map_err(|e| {
                                Error::ResponseShape(format!("body is not JSON ({e}): {text}"))
                            })
                        }
                        401 | 403 => {
                            return Err(Error::Auth {
                                url: self.url.clone(),
                                status,
                            })
                        }
                        429 | 500..=599 => last_error = format!("status {status}: {text}"),
                        _ => {
                            return Err(Error::Network {
                                url: self.url.clone(),
                                attempts: attempt + 1,
                                message: format!("status {status}: {text}"),
                            })
                        }
                    }
                }
                Err(e) => last_error = e.to_string(),
            }
        }
        Err(Error::Network {
            url: self.url.clone(),
            attempts,
            message: last_error,
        })
    }
}
