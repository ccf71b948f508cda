//! Language-model backends and their selection.

mod remote;
mod retry;
mod scripted;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use docent_core::gateway::{GatewayError, LanguageModel};
use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

pub use remote::{tool_schema, HttpTransport, RemoteBackend, RemoteConfig, Transport};
pub use retry::Retrying;
pub use scripted::{RuleSpec, ScriptError, ScriptFile, ScriptedBackend};

/// Rules used when no rule file is given.
pub const BUILTIN_RULES: &str = include_str!("../../fixtures/guide.rules.json");

pub type SharedModel = Arc<dyn LanguageModel + Send + Sync>;

fn default_key_env() -> String {
    "DOCENT_API_KEY".to_string()
}

fn default_backoff_ms() -> u64 {
    500
}

/// Exactly one backend, chosen by the `backend` tag.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum GatewayConfig {
    Scripted {
        #[serde(default)]
        rules: Option<PathBuf>,
    },
    Remote {
        endpoint: String,
        model: String,
        /// Environment variable holding the bearer credential.
        #[serde(default = "default_key_env")]
        api_key_env: String,
        /// Seconds per attempt; requests carry their own default otherwise.
        #[serde(default)]
        deadline: Option<f64>,
        #[serde(default = "default_backoff_ms")]
        max_backoff_ms: u64,
    },
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig::Scripted { rules: None }
    }
}

impl GatewayConfig {
    /// Remote backend configured from `DOCENT_ENDPOINT` and `DOCENT_MODEL`.
    pub fn remote_from_env() -> Result<Self, GatewaySetupError> {
        let endpoint = std::env::var("DOCENT_ENDPOINT").map_err(|_| GatewaySetupError::MissingEnv("DOCENT_ENDPOINT"))?;
        Ok(GatewayConfig::Remote {
            endpoint,
            model: std::env::var("DOCENT_MODEL").unwrap_or_else(|_| "gpt-4o-mini".to_string()),
            api_key_env: default_key_env(),
            deadline: None,
            max_backoff_ms: default_backoff_ms(),
        })
    }
}

#[derive(Debug, Error)]
pub enum GatewaySetupError {
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("cannot read rule file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Script(#[from] ScriptError),
    #[error("deadline must be positive")]
    BadDeadline,
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<(u16, String), GatewayError> {
        (**self).post_json(url, bearer, body, timeout)
    }
}

pub fn build_gateway(config: &GatewayConfig, seed: u64) -> Result<SharedModel, GatewaySetupError> {
    build_gateway_with(config, seed, Arc::new(HttpTransport))
}

/// Like [`build_gateway`], with the network transport supplied by the caller.
pub fn build_gateway_with(
    config: &GatewayConfig,
    seed: u64,
    transport: Arc<dyn Transport>,
) -> Result<SharedModel, GatewaySetupError> {
    match config {
        GatewayConfig::Scripted { rules } => {
            let text = match rules {
                Some(path) => std::fs::read_to_string(path).map_err(|source| GatewaySetupError::Io {
                    path: path.clone(),
                    source,
                })?,
                None => BUILTIN_RULES.to_string(),
            };
            Ok(Arc::new(ScriptedBackend::from_json(&text)?))
        }
        GatewayConfig::Remote {
            endpoint,
            model,
            api_key_env,
            deadline,
            max_backoff_ms,
        } => {
            if deadline.is_some_and(|d| !(d > 0.0) || !d.is_finite()) {
                return Err(GatewaySetupError::BadDeadline);
            }
            let remote = RemoteBackend::with_transport(
                RemoteConfig {
                    endpoint: endpoint.clone(),
                    model: model.clone(),
                    api_key: std::env::var(api_key_env).ok(),
                    deadline: None,
                },
                transport,
            );
            let mut retrying = Retrying::new(remote, Duration::from_millis(*max_backoff_ms), seed);
            if let Some(d) = deadline {
                retrying = retrying.with_deadline(Duration::from_secs_f64(*d));
            }
            Ok(Arc::new(retrying))
        }
    }
}
