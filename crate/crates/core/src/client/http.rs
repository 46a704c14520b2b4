use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use ureq::Agent;

use super::{ChatClient, ChatRequest, ClientError};

/// Environment variable holding the bearer credential.
pub const API_KEY_ENV: &str = "SECREV_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct EndpointConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Retries after the first attempt for transient failures.
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            api_key: None,
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }

    /// Reads the credential from [`API_KEY_ENV`].
    pub fn with_env_key(mut self) -> Self {
        self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.trim().is_empty());
        self
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

pub struct HttpChatClient {
    config: EndpointConfig,
    agent: Agent,
}

enum Failure {
    Transient(String),
    Fatal(ClientError),
}

impl HttpChatClient {
    pub fn new(config: EndpointConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        HttpChatClient { config, agent }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &request.system {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": request.user}));
        json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": request.temperature,
            "top_p": request.top_p,
            "frequency_penalty": request.frequency_penalty,
            "max_tokens": request.max_tokens,
        })
    }

    fn attempt(&self, key: &str, body: &Value) -> Result<String, Failure> {
        let mut response = self
            .agent
            .post(&self.config.url())
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(body)
            .map_err(|e| Failure::Transient(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Failure::Transient(e.to_string()))?;
        match status {
            200..=299 => parse_completion(&text).map_err(Failure::Fatal),
            401 | 403 => Err(Failure::Fatal(ClientError::AuthFailure(format!("HTTP {status}")))),
            408 | 429 | 500..=599 => Err(Failure::Transient(format!("HTTP {status}"))),
            _ => Err(Failure::Fatal(ClientError::ModelUnavailable {
                attempts: 1,
                last: format!("HTTP {status}: {}", snippet(&text)),
            })),
        }
    }
}

impl ChatClient for HttpChatClient {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        request.validate()?;
        let key = self
            .config
            .api_key
            .as_deref()
            .ok_or_else(|| ClientError::AuthFailure(format!("{API_KEY_ENV} is not set")))?;
        let body = self.body(request);
        let mut backoff = self.config.initial_backoff;
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                thread::sleep(backoff);
                backoff = backoff.saturating_mul(2);
            }
            match self.attempt(key, &body) {
                Ok(text) => return Ok(text),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Transient(msg)) => last = msg,
            }
        }
        Err(ClientError::ModelUnavailable { attempts: self.config.max_retries + 1, last })
    }
}

/// Extracts `choices[0].message.content`.
pub(crate) fn parse_completion(text: &str) -> Result<String, ClientError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| ClientError::ResponseSchemaError(format!("invalid JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .ok_or_else(|| ClientError::ResponseSchemaError(format!("no choices[0].message.content in {}", snippet(text))))
}

fn snippet(text: &str) -> String {
    text.chars().take(200).collect()
}
