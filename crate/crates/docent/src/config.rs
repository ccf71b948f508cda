//! Service configuration file (TOML) and environment overrides.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use docent_core::dialogue::{PromptTemplate, TemplateError};
use docent_core::session::{InvalidConfig, SessionConfig};
use docent_core::AnnotatedMap;
use serde::Deserialize;
use thiserror::Error;

use crate::gateway::GatewayConfig;
use crate::mapfile::{read_map, MapError};

pub const ENV_MAP: &str = "DOCENT_MAP";
pub const ENV_ENDPOINT: &str = "DOCENT_ENDPOINT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// Sessions advance in real time at the tick rate.
    #[default]
    Wall,
    /// Sessions advance only through the advance endpoint.
    Virtual,
}

fn default_bind() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}

fn default_tick_hz() -> f64 {
    10.0
}

/// ```toml
/// bind = "127.0.0.1:8080"
/// map = "museum.map"
/// tick_hz = 10
/// clock = "wall"
///
/// [session]
/// silence_threshold = 45
///
/// [gateway]
/// backend = "scripted"
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_bind")]
    pub bind: SocketAddr,
    pub map: PathBuf,
    /// Prompt template file; the built-in template otherwise.
    #[serde(default)]
    pub template: Option<PathBuf>,
    #[serde(default = "default_tick_hz")]
    pub tick_hz: f64,
    #[serde(default)]
    pub clock: ClockMode,
    /// Seeds retry jitter.
    #[serde(default)]
    pub seed: u64,
    /// Defaults for new sessions; a create request may override fields.
    #[serde(default)]
    pub session: SessionConfig,
    #[serde(default)]
    pub gateway: GatewayConfig,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("tick_hz must be a positive number")]
    TickRate,
    #[error("session.{}", .0 .0)]
    Session(InvalidConfig),
    #[error("map {path}: {source}")]
    Map { path: PathBuf, source: MapError },
    #[error("template {path}: {source}")]
    Template { path: PathBuf, source: TemplateError },
}

impl ServiceConfig {
    /// A config with every default and the given map.
    pub fn with_map(map: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            bind: default_bind(),
            map: map.into(),
            template: None,
            tick_hz: default_tick_hz(),
            clock: ClockMode::default(),
            seed: 0,
            session: SessionConfig::default(),
            gateway: GatewayConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ServiceConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`; relative map, template and rule paths resolve against
    /// the file's directory.
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(dir) = path.parent() {
            cfg.map = dir.join(&cfg.map);
            cfg.template = cfg.template.map(|t| dir.join(t));
            if let GatewayConfig::Scripted { rules: Some(r) } = &mut cfg.gateway {
                *r = dir.join(&*r);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tick_hz > 0.0) || !self.tick_hz.is_finite() {
            return Err(ConfigError::TickRate);
        }
        self.session.validate().map_err(ConfigError::Session)
    }

    /// `DOCENT_MAP` replaces the map path; `DOCENT_ENDPOINT` replaces the
    /// endpoint of a remote gateway. The credential is read from the
    /// gateway's `api_key_env` when the backend is built.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) {
        if let Some(map) = get(ENV_MAP) {
            self.map = PathBuf::from(map);
        }
        if let (Some(url), GatewayConfig::Remote { endpoint, .. }) = (get(ENV_ENDPOINT), &mut self.gateway) {
            *endpoint = url;
        }
    }

    pub fn load_map(&self) -> Result<Arc<AnnotatedMap>, ConfigError> {
        read_map(&self.map).map(Arc::new).map_err(|source| ConfigError::Map {
            path: self.map.clone(),
            source,
        })
    }

    pub fn load_template(&self) -> Result<Arc<PromptTemplate>, ConfigError> {
        load_template(self.template.as_deref())
    }
}

pub fn load_template(path: Option<&Path>) -> Result<Arc<PromptTemplate>, ConfigError> {
    let Some(path) = path else {
        return Ok(Arc::new(PromptTemplate::default()));
    };
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    PromptTemplate::parse(&text).map(Arc::new).map_err(|source| ConfigError::Template {
        path: path.to_path_buf(),
        source,
    })
}
