//! Run configuration: command-line flags override the optional TOML file,
//! which overrides built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use secrev_core::client::{EndpointConfig, Sampling};

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CONCURRENCY: usize = 4;
pub const DEFAULT_THRESHOLD: f64 = 0.70;
pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 5.0;
pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_MAX_RETRIES: u32 = 3;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub concurrency: Option<usize>,
    pub keywords: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
    pub base_url: Option<String>,
    pub model: Option<String>,
    pub max_retries: Option<u32>,
    pub sampling: Option<Sampling>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointSettings {
    pub base_url: Option<String>,
    pub model: String,
    pub max_retries: u32,
    pub sampling: Sampling,
}

impl EndpointSettings {
    pub fn endpoint(&self) -> Result<EndpointConfig> {
        let Some(url) = &self.base_url else {
            bail!("no model endpoint configured; pass --base-url or set base_url in the config file");
        };
        let mut cfg = EndpointConfig::new(url.clone(), self.model.clone()).with_env_key();
        cfg.max_retries = self.max_retries;
        Ok(cfg)
    }
}

/// Fully resolved settings for one invocation; printed by `--dry-run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: BTreeMap<String, PathBuf>,
    pub output: Option<PathBuf>,
    pub keywords: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub threshold: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub concurrency: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointSettings>,
}

impl RunConfig {
    /// Checks inputs exist and numeric settings are in range.
    pub fn validate(&self) -> Result<()> {
        let optional = [("keywords", &self.keywords), ("weights", &self.weights)];
        let named = self.inputs.iter().map(|(k, v)| (k.as_str(), Some(v))).chain(optional.iter().map(|(k, v)| (*k, v.as_ref())));
        for (name, path) in named {
            if let Some(path) = path {
                if !path.is_file() {
                    bail!("{name} file {} does not exist", path.display());
                }
            }
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            bail!("threshold {} must lie in [-1, 1]", self.threshold);
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                bail!("{name} must be a finite non-negative number, got {v}");
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            bail!("lambda {} must lie in [0, 1]", self.lambda);
        }
        if self.concurrency == 0 {
            bail!("concurrency must be at least 1");
        }
        Ok(())
    }
}
