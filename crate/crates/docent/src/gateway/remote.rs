//! Chat-completion backend over HTTP.

use std::sync::mpsc;
use std::time::Duration;

use docent_core::gateway::{
    conform_to_schema, FieldKind, FieldMap, FieldSpec, FieldValue, GatewayError, GatewayRequest, LanguageModel,
};
use serde_json::{json, Value};

/// One JSON POST. Implementations must give up after `timeout`.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<(u16, String), GatewayError>;
}

/// Blocking transport on `ureq`.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    /// The deadline is enforced on the wall clock: the request runs on a
    /// helper thread and is abandoned when time is up.
    fn post_json(
        &self,
        url: &str,
        bearer: Option<&str>,
        body: &Value,
        timeout: Duration,
    ) -> Result<(u16, String), GatewayError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut request = agent.post(url).header("content-type", "application/json");
        if let Some(key) = bearer {
            request = request.header("authorization", &format!("Bearer {key}"));
        }
        let payload = body.to_string();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let result = request.send(payload).and_then(|mut response| {
                let status = response.status().as_u16();
                response.body_mut().read_to_string().map(|text| (status, text))
            });
            let _ = tx.send(result.map_err(map_ureq_error));
        });
        match rx.recv_timeout(timeout) {
            Ok(result) => result,
            Err(mpsc::RecvTimeoutError::Timeout) => Err(GatewayError::Timeout),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(GatewayError::Transport("request thread died".into())),
        }
    }
}

fn map_ureq_error(e: ureq::Error) -> GatewayError {
    match e {
        ureq::Error::Timeout(_) => GatewayError::Timeout,
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => GatewayError::Timeout,
        other => GatewayError::Transport(other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    /// Full chat-completions URL.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    /// Overrides the per-request deadline when set.
    pub deadline: Option<f64>,
}

pub struct RemoteBackend<T = HttpTransport> {
    config: RemoteConfig,
    transport: T,
}

const TOOL_NAME: &str = "record_fields";

impl RemoteBackend<HttpTransport> {
    pub fn new(config: RemoteConfig) -> Self {
        RemoteBackend::with_transport(config, HttpTransport)
    }
}

impl<T: Transport> RemoteBackend<T> {
    pub fn with_transport(config: RemoteConfig, transport: T) -> Self {
        RemoteBackend { config, transport }
    }

    fn body(&self, req: &GatewayRequest) -> Value {
        json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": req.system_text},
                {"role": "user", "content": req.user_text},
            ],
            "max_tokens": req.max_tokens,
            "temperature": req.temperature,
        })
    }

    fn call(&self, req: &GatewayRequest, body: &Value) -> Result<Value, GatewayError> {
        req.validate()?;
        let secs = self.config.deadline.unwrap_or(req.deadline);
        let timeout = Duration::from_secs_f64(secs);
        let (status, text) =
            self.transport
                .post_json(&self.config.endpoint, self.config.api_key.as_deref(), body, timeout)?;
        if !(200..300).contains(&status) {
            tracing::warn!(status, body = %text, "language model endpoint returned an error");
            return Err(GatewayError::Remote { status, body: text });
        }
        serde_json::from_str(&text).map_err(|e| GatewayError::Malformed(e.to_string()))
    }
}

fn message(v: &Value) -> Result<&Value, GatewayError> {
    v.pointer("/choices/0/message")
        .ok_or_else(|| GatewayError::Malformed("response has no choices[0].message".into()))
}

fn json_type(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::Int => "integer",
        FieldKind::Text => "string",
        FieldKind::Bool => "boolean",
    }
}

/// Function-calling parameter schema for the requested fields.
pub fn tool_schema(schema: &[FieldSpec]) -> Value {
    let properties: serde_json::Map<String, Value> = schema
        .iter()
        .map(|f| (f.name.clone(), json!({"type": json_type(f.kind), "description": f.description})))
        .collect();
    let required: Vec<&str> = schema.iter().map(|f| f.name.as_str()).collect();
    json!({"type": "object", "properties": properties, "required": required})
}

impl<T: Transport> LanguageModel for RemoteBackend<T> {
    fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError> {
        let v = self.call(req, &self.body(req))?;
        match message(&v)?.get("content").and_then(Value::as_str) {
            Some(text) if !text.trim().is_empty() => Ok(text.trim().to_string()),
            _ => Err(GatewayError::Malformed("empty completion".into())),
        }
    }

    fn extract_structured(&self, req: &GatewayRequest, schema: &[FieldSpec]) -> Result<FieldMap, GatewayError> {
        if schema.is_empty() {
            return Err(GatewayError::EmptySchema);
        }
        let mut body = self.body(req);
        body["tools"] = json!([{
            "type": "function",
            "function": {
                "name": TOOL_NAME,
                "description": "Record the values extracted from the visitor's request.",
                "parameters": tool_schema(schema),
            }
        }]);
        body["tool_choice"] = json!({"type": "function", "function": {"name": TOOL_NAME}});
        let v = self.call(req, &body)?;
        let args = message(&v)?
            .pointer("/tool_calls/0/function/arguments")
            .and_then(Value::as_str)
            .ok_or_else(|| GatewayError::ParseFailure {
                missing: schema.iter().map(|f| f.name.clone()).collect(),
            })?;
        let parsed: serde_json::Map<String, Value> =
            serde_json::from_str(args).map_err(|e| GatewayError::Malformed(e.to_string()))?;
        let values: FieldMap = parsed
            .into_iter()
            .filter_map(|(k, v)| {
                let v = match v {
                    Value::Bool(b) => FieldValue::Bool(b),
                    Value::Number(n) => FieldValue::Int(n.as_i64()?),
                    Value::String(s) => FieldValue::Text(s),
                    _ => return None,
                };
                Some((k, v))
            })
            .collect();
        conform_to_schema(schema, &values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use docent_core::gateway::Purpose;
    use std::sync::Mutex;

    struct Canned {
        status: u16,
        body: String,
        seen: Mutex<Vec<Value>>,
    }

    impl Transport for Canned {
        fn post_json(&self, _: &str, bearer: Option<&str>, body: &Value, _: Duration) -> Result<(u16, String), GatewayError> {
            assert_eq!(bearer, Some("k"));
            self.seen.lock().unwrap().push(body.clone());
            Ok((self.status, self.body.clone()))
        }
    }

    fn backend(status: u16, body: Value) -> RemoteBackend<Canned> {
        RemoteBackend::with_transport(
            RemoteConfig {
                endpoint: "http://127.0.0.1:9/v1/chat/completions".into(),
                model: "m".into(),
                api_key: Some("k".into()),
                deadline: None,
            },
            Canned {
                status,
                body: body.to_string(),
                seen: Mutex::new(Vec::new()),
            },
        )
    }

    fn req() -> GatewayRequest {
        GatewayRequest::new(Purpose::Extract, "Extract the goal.", "Can you show me exhibit 13?")
    }

    #[test]
    fn chat_completion_round_trip() {
        let b = backend(200, json!({"choices": [{"message": {"content": " Hello there. "}}]}));
        assert_eq!(b.complete(&req()).unwrap(), "Hello there.");
        let sent = &b.transport.seen.lock().unwrap()[0];
        assert_eq!(sent["messages"][1]["content"], "Can you show me exhibit 13?");
        assert_eq!(sent["temperature"], 0.0);
    }

    #[test]
    fn function_call_fields() {
        let args = json!({"exhibit_number": 13}).to_string();
        let b = backend(
            200,
            json!({"choices": [{"message": {"tool_calls": [{"function": {"name": TOOL_NAME, "arguments": args}}]}}]}),
        );
        let schema = [FieldSpec::new("exhibit_number", FieldKind::Int, "n")];
        let got = b.extract_structured(&req(), &schema).unwrap();
        assert_eq!(got["exhibit_number"], FieldValue::Int(13));
        let sent = &b.transport.seen.lock().unwrap()[0];
        assert_eq!(sent["tools"][0]["function"]["parameters"]["required"][0], "exhibit_number");

        let missing = json!({}).to_string();
        let b = backend(
            200,
            json!({"choices": [{"message": {"tool_calls": [{"function": {"name": TOOL_NAME, "arguments": missing}}]}}]}),
        );
        assert_eq!(
            b.extract_structured(&req(), &schema),
            Err(GatewayError::ParseFailure { missing: vec!["exhibit_number".into()] })
        );
    }

    #[test]
    fn error_status_surfaces_body() {
        let b = backend(503, json!({"error": "overloaded"}));
        match b.complete(&req()) {
            Err(GatewayError::Remote { status: 503, body }) => assert!(body.contains("overloaded")),
            other => panic!("{other:?}"),
        }
    }
}
