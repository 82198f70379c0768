use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsl::DEFAULT_THRESHOLD;

/// Service settings, read from TOML. Relative paths resolve against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    /// Shared bearer token required on every request.
    pub token: String,
    /// Graph file; created on first ingest if missing.
    pub graph: PathBuf,
    /// Category list; the placeholder taxonomy when unset.
    #[serde(default)]
    pub taxonomy: Option<PathBuf>,
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    /// Labeled snippets; feedback is appended here.
    pub corpus: PathBuf,
    /// Classifier and synthesizer models; created if missing.
    pub model_dir: PathBuf,
    #[serde(default)]
    pub trajectories: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    pub default_threshold: f64,
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

impl ServiceConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut cfg: ServiceConfig =
            toml::from_str(&text).map_err(|source| ConfigError::Toml { path: path.into(), source })?;
        if let Some(base) = path.parent() {
            cfg.resolve_against(base);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn resolve_against(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.graph);
        fix(&mut self.corpus);
        fix(&mut self.model_dir);
        for p in [&mut self.taxonomy, &mut self.gazetteer, &mut self.trajectories].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.token.is_empty() {
            return Err(ConfigError::Invalid("token must not be empty".into()));
        }
        if !(0.0..=1.0).contains(&self.default_threshold) {
            return Err(ConfigError::Invalid(format!("default_threshold {} outside [0, 1]", self.default_threshold)));
        }
        Ok(())
    }
}
