//! Deterministic canned-response backend for tests and offline demos.

use std::collections::BTreeMap;

use docent_core::gateway::{
    conform_to_schema, FieldMap, FieldSpec, FieldValue, GatewayError, GatewayRequest, LanguageModel, Purpose,
};
use regex::{Regex, RegexBuilder};
use serde::Deserialize;
use thiserror::Error;

/// Rule file layout.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptFile {
    pub rules: Vec<RuleSpec>,
    pub default: String,
    #[serde(default)]
    pub default_fields: BTreeMap<String, FieldValue>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    /// Case-insensitive substring, or a regex when `regex` is set.
    #[serde(rename = "match")]
    pub pattern: String,
    #[serde(default)]
    pub regex: bool,
    /// Restricts the rule to one kind of request.
    #[serde(default)]
    pub purpose: Option<Purpose>,
    pub response: String,
    #[serde(default)]
    pub fields: Option<BTreeMap<String, FieldValue>>,
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("malformed rule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("rule {index}: bad regex: {source}")]
    Regex { index: usize, source: regex::Error },
    #[error("rule {0}: response is empty")]
    EmptyResponse(usize),
    #[error("default response is empty")]
    EmptyDefault,
}

#[derive(Debug, Clone)]
struct Rule {
    matcher: Regex,
    expand: bool,
    purpose: Option<Purpose>,
    response: String,
    fields: Option<BTreeMap<String, FieldValue>>,
}

/// First matching rule wins; the default answers everything else.
///
/// Rules match against the request's user text. Regex rules may refer to
/// capture groups (`$1`, `${name}`) in their response and text fields.
#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    rules: Vec<Rule>,
    default: String,
    default_fields: BTreeMap<String, FieldValue>,
}

impl ScriptedBackend {
    pub fn from_json(text: &str) -> Result<Self, ScriptError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn new(file: ScriptFile) -> Result<Self, ScriptError> {
        if file.default.trim().is_empty() {
            return Err(ScriptError::EmptyDefault);
        }
        let mut rules = Vec::with_capacity(file.rules.len());
        for (index, spec) in file.rules.into_iter().enumerate() {
            if spec.response.trim().is_empty() {
                return Err(ScriptError::EmptyResponse(index));
            }
            let source = if spec.regex { spec.pattern.clone() } else { regex::escape(&spec.pattern) };
            let matcher = RegexBuilder::new(&source)
                .case_insensitive(true)
                .build()
                .map_err(|source| ScriptError::Regex { index, source })?;
            rules.push(Rule {
                matcher,
                expand: spec.regex,
                purpose: spec.purpose,
                response: spec.response,
                fields: spec.fields,
            });
        }
        Ok(ScriptedBackend {
            rules,
            default: file.default,
            default_fields: file.default_fields,
        })
    }

    /// The matching rule's response and fields, expanded.
    fn lookup(&self, req: &GatewayRequest) -> (String, Option<FieldMap>) {
        for rule in &self.rules {
            if rule.purpose.is_some_and(|p| p != req.purpose) {
                continue;
            }
            let Some(caps) = rule.matcher.captures(&req.user_text) else {
                continue;
            };
            let expand = |s: &str| {
                if rule.expand {
                    let mut out = String::new();
                    caps.expand(s, &mut out);
                    out
                } else {
                    s.to_string()
                }
            };
            let fields = rule.fields.as_ref().map(|f| {
                f.iter()
                    .map(|(k, v)| {
                        let v = match v {
                            FieldValue::Text(t) => FieldValue::Text(expand(t)),
                            other => other.clone(),
                        };
                        (k.clone(), v)
                    })
                    .collect()
            });
            return (expand(&rule.response), fields);
        }
        (self.default.clone(), Some(self.default_fields.clone().into_iter().collect()))
    }
}

impl LanguageModel for ScriptedBackend {
    fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError> {
        req.validate()?;
        let (text, _) = self.lookup(req);
        if text.trim().is_empty() {
            return Err(GatewayError::Malformed("scripted response expanded to nothing".into()));
        }
        Ok(text)
    }

    fn extract_structured(&self, req: &GatewayRequest, schema: &[FieldSpec]) -> Result<FieldMap, GatewayError> {
        if schema.is_empty() {
            return Err(GatewayError::EmptySchema);
        }
        req.validate()?;
        let (_, fields) = self.lookup(req);
        conform_to_schema(schema, &fields.unwrap_or_default())
    }
}
