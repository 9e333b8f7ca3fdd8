//! Chat-completion gateway for the generative modules.
//!
//! [`Gateway`] is the one seam through which the pipeline talks to a model.
//! [`HttpGateway`] speaks the OpenAI-compatible chat-completions protocol,
//! [`CachedGateway`] puts a content-addressed disk cache in front of any
//! backend, and [`FixtureGateway`] replays canned teacher outputs for tests
//! and offline runs.

mod cache;
mod fixture;
mod http;
pub mod output;
pub mod prompts;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::CachedGateway;
pub use fixture::{FixtureEntry, FixtureGateway};
pub use http::HttpGateway;
pub use output::{extract_final_answer, parse_toolmaker_output, NoSolutionFound};
pub use prompts::{PromptBundle, PromptError, PromptKind};

pub const ENV_ENDPOINT: &str = "TABREX_ENDPOINT";
pub const ENV_API_KEY: &str = "TABREX_API_KEY";
pub const ENV_CACHE_DIR: &str = "TABREX_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GatewayErrorKind {
    Transport,
    HttpStatus,
    Timeout,
    MalformedResponse,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("gateway {kind:?} error: {message}")]
pub struct GatewayError {
    pub kind: GatewayErrorKind,
    pub message: String,
    /// HTTP status for `HttpStatus` errors.
    pub status: Option<u16>,
}

impl GatewayError {
    pub fn new(kind: GatewayErrorKind, message: impl Into<String>) -> Self {
        GatewayError {
            kind,
            message: message.into(),
            status: None,
        }
    }

    pub fn http_status(status: u16, body: impl Into<String>) -> Self {
        GatewayError {
            kind: GatewayErrorKind::HttpStatus,
            message: body.into(),
            status: Some(status),
        }
    }

    /// Transport failures, timeouts, 429 and 5xx are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        match self.kind {
            GatewayErrorKind::Transport | GatewayErrorKind::Timeout => true,
            GatewayErrorKind::HttpStatus => {
                matches!(self.status, Some(s) if s == 429 || s >= 500)
            }
            GatewayErrorKind::MalformedResponse => false,
        }
    }
}

/// Anything that can turn a prompt bundle into assistant text.
pub trait Gateway: Send + Sync {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError>;
}

impl<G: Gateway + ?Sized> Gateway for Box<G> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        (**self).complete(bundle)
    }
}

impl<G: Gateway + ?Sized> Gateway for std::sync::Arc<G> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        (**self).complete(bundle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Http,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub backend: Backend,
    pub base_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub cache_dir: Option<PathBuf>,
    pub in_flight_limit: usize,
    pub api_key: Option<String>,
    pub timeout_secs: u64,
    /// First retry delay; doubles on each further attempt.
    pub backoff_ms: u64,
    /// Estimated-token budget for the serialized table inside a prompt.
    pub token_budget: usize,
    /// Teacher-output file for the fixture backend.
    pub fixture: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            backend: Backend::Http,
            base_url: "http://localhost:8000/v1".into(),
            model_name: "gpt-4".into(),
            temperature: 0.0,
            max_retries: 3,
            cache_dir: None,
            in_flight_limit: 4,
            api_key: None,
            timeout_secs: 120,
            backoff_ms: 500,
            token_budget: 6000,
            fixture: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("in_flight_limit must be at least 1")]
    InFlightLimit,
    #[error("fixture backend requires `fixture` to point at a teacher-output file")]
    MissingFixture,
    #[error("failed to load fixture: {0}")]
    Fixture(String),
    #[error("failed to build http client: {0}")]
    Client(String),
}

impl GatewayConfig {
    /// Applies the endpoint, key, and cache-dir environment overrides.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(url) = std::env::var(ENV_ENDPOINT) {
            self.base_url = url;
        }
        if let Ok(key) = std::env::var(ENV_API_KEY) {
            self.api_key = Some(key);
        }
        if let Ok(dir) = std::env::var(ENV_CACHE_DIR) {
            self.cache_dir = Some(PathBuf::from(dir));
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.in_flight_limit == 0 {
            return Err(ConfigError::InFlightLimit);
        }
        Ok(())
    }
}

/// Builds the configured backend, wrapped in the disk cache when a cache
/// directory is set.
pub fn build_gateway(config: &GatewayConfig) -> Result<Box<dyn Gateway>, ConfigError> {
    config.validate()?;
    let backend: Box<dyn Gateway> = match config.backend {
        Backend::Http => Box::new(HttpGateway::new(config.clone())?),
        Backend::Fixture => {
            let path = config.fixture.as_ref().ok_or(ConfigError::MissingFixture)?;
            Box::new(FixtureGateway::from_path(path).map_err(ConfigError::Fixture)?)
        }
    };
    Ok(match &config.cache_dir {
        Some(dir) => Box::new(CachedGateway::new(backend, dir.clone(), &config.model_name)),
        None => backend,
    })
}

/// Rough token estimate used for prompt budgets: four characters per token.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}
