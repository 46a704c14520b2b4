//! Chat-completion client abstraction.
//!
//! Every model-backed stage talks to a [`ChatClient`]. [`HttpChatClient`]
//! speaks the common chat-completions wire format; [`stub`] holds in-process
//! clients for tests and dry runs.

mod bounded;
mod http;
pub mod stub;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bounded::{run_bounded, BoundedClient};
pub use http::{EndpointConfig, HttpChatClient, API_KEY_ENV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub user: String,
    pub temperature: f64,
    pub top_p: f64,
    pub frequency_penalty: f64,
    pub max_tokens: u32,
}

pub const DEFAULT_MAX_TOKENS: u32 = 1024;

impl ChatRequest {
    /// Sampling settings used for API-hosted baseline models.
    pub fn baseline(user: impl Into<String>) -> Self {
        ChatRequest {
            system: None,
            user: user.into(),
            temperature: 0.7,
            top_p: 0.7,
            frequency_penalty: 0.5,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    /// Greedy decoding for reproducible runs.
    pub fn greedy(user: impl Into<String>) -> Self {
        ChatRequest {
            system: None,
            user: user.into(),
            temperature: 0.0,
            top_p: 1.0,
            frequency_penalty: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }

    pub fn with_system(mut self, system: impl Into<String>) -> Self {
        self.system = Some(system.into());
        self
    }

    pub fn validate(&self) -> Result<(), ClientError> {
        if !(self.temperature >= 0.0) {
            return Err(ClientError::InvalidRequest(format!("temperature {} < 0", self.temperature)));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ClientError::InvalidRequest(format!("top_p {} outside (0, 1]", self.top_p)));
        }
        Ok(())
    }
}

/// Sampling preset selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    Greedy,
    Baseline,
}

impl Sampling {
    pub fn request(self, user: impl Into<String>) -> ChatRequest {
        match self {
            Sampling::Greedy => ChatRequest::greedy(user),
            Sampling::Baseline => ChatRequest::baseline(user),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClientError {
    #[error("model unavailable after {attempts} attempt(s): {last}")]
    ModelUnavailable { attempts: u32, last: String },
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("unexpected response shape: {0}")]
    ResponseSchemaError(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

pub trait ChatClient: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError>;
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (**self).chat(request)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (**self).chat(request)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Arc<C> {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (**self).chat(request)
    }
}
