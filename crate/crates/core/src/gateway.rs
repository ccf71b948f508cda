//! Language-model seam. Backends (remote chat completion, scripted) live in
//! the `docent` crate; the core only sees this trait.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Temperature for free-text handler responses.
pub const HANDLER_TEMPERATURE: f64 = 0.2;
/// Temperature for classification and structured extraction.
pub const STRICT_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_DEADLINE_SECS: f64 = 20.0;
pub const DEFAULT_MAX_TOKENS: u32 = 300;

/// What a request is for; scripted backends may key rules on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Classify,
    Extract,
    Respond,
    Proactive,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Classify => "classify",
            Purpose::Extract => "extract",
            Purpose::Respond => "respond",
            Purpose::Proactive => "proactive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayRequest {
    pub purpose: Purpose,
    pub system_text: String,
    pub user_text: String,
    pub max_tokens: u32,
    /// In [0, 2].
    pub temperature: f64,
    /// Seconds per attempt.
    pub deadline: f64,
}

impl GatewayRequest {
    pub fn new(purpose: Purpose, system_text: impl Into<String>, user_text: impl Into<String>) -> Self {
        let temperature = match purpose {
            Purpose::Classify | Purpose::Extract => STRICT_TEMPERATURE,
            Purpose::Respond | Purpose::Proactive => HANDLER_TEMPERATURE,
        };
        GatewayRequest {
            purpose,
            system_text: system_text.into(),
            user_text: user_text.into(),
            max_tokens: DEFAULT_MAX_TOKENS,
            temperature,
            deadline: DEFAULT_DEADLINE_SECS,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.system_text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("system_text is empty".to_string()));
        }
        if self.user_text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("user_text is empty".to_string()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest("temperature must be in [0, 2]".to_string()));
        }
        if !(self.deadline > 0.0) || !self.deadline.is_finite() {
            return Err(GatewayError::InvalidRequest("deadline must be positive".to_string()));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::InvalidRequest("max_tokens must be positive".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Int,
    Text,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub name: String,
    pub kind: FieldKind,
    pub description: String,
}

impl FieldSpec {
    pub fn new(name: &str, kind: FieldKind, description: &str) -> Self {
        FieldSpec {
            name: name.to_string(),
            kind,
            description: description.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Bool(bool),
    Int(i64),
    Text(String),
}

impl FieldValue {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldValue::Bool(_) => FieldKind::Bool,
            FieldValue::Int(_) => FieldKind::Int,
            FieldValue::Text(_) => FieldKind::Text,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            FieldValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            FieldValue::Text(v) => Some(v),
            _ => None,
        }
    }
}

pub type FieldMap = BTreeMap<String, FieldValue>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("extraction schema is empty")]
    EmptySchema,
    #[error("deadline exceeded")]
    Timeout,
    #[error("remote returned status {status}: {body}")]
    Remote { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("response is missing or mistyped fields: {}", .missing.join(", "))]
    ParseFailure { missing: Vec<String> },
    #[error("model answered {0:?}, which is not a valid label")]
    InvalidLabel(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl GatewayError {
    /// Failures worth a second attempt.
    pub fn is_transient(&self) -> bool {
        matches!(
            self,
            GatewayError::Timeout | GatewayError::Remote { .. } | GatewayError::Transport(_)
        )
    }
}

/// A language-model backend.
pub trait LanguageModel {
    /// Free-text completion; never returns an empty string on success.
    fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError>;

    /// Structured extraction returning a value for every schema field.
    fn extract_structured(&self, req: &GatewayRequest, schema: &[FieldSpec]) -> Result<FieldMap, GatewayError>;
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError> {
        (**self).complete(req)
    }

    fn extract_structured(&self, req: &GatewayRequest, schema: &[FieldSpec]) -> Result<FieldMap, GatewayError> {
        (**self).extract_structured(req, schema)
    }
}

/// Keeps only schema fields, checking every one is present with the right kind.
///
/// Integers written as text (`"13"`) are accepted for `Int` fields.
pub fn conform_to_schema(schema: &[FieldSpec], values: &FieldMap) -> Result<FieldMap, GatewayError> {
    if schema.is_empty() {
        return Err(GatewayError::EmptySchema);
    }
    let mut out = FieldMap::new();
    let mut missing = Vec::new();
    for spec in schema {
        let v = values.get(&spec.name).and_then(|v| match (spec.kind, v) {
            (k, v) if v.kind() == k => Some(v.clone()),
            (FieldKind::Int, FieldValue::Text(t)) => t.trim().parse().ok().map(FieldValue::Int),
            _ => None,
        });
        match v {
            Some(v) => {
                out.insert(spec.name.clone(), v);
            }
            None => missing.push(spec.name.clone()),
        }
    }
    if missing.is_empty() {
        Ok(out)
    } else {
        Err(GatewayError::ParseFailure { missing })
    }
}
