#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use docent::config::ClockMode;
use docent::gateway::{build_gateway, GatewayConfig};
use docent::mapfile::read_map;
use docent::service::{AppState, BackgroundServer};
use docent_core::dialogue::PromptTemplate;
use docent_core::session::SessionConfig;
use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn start(clock: ClockMode, tick_hz: f64) -> BackgroundServer {
    let map = Arc::new(read_map(fixture("museum11.map")).unwrap());
    let llm = build_gateway(&GatewayConfig::default(), 0).unwrap();
    let state = AppState::new(
        map,
        Arc::new(PromptTemplate::default()),
        llm,
        SessionConfig::default(),
        clock,
        tick_hz,
    );
    BackgroundServer::start(state, SocketAddr::from(([127, 0, 0, 1], 0))).unwrap()
}

pub struct Http {
    agent: ureq::Agent,
}

impl Http {
    pub fn new() -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .new_agent();
        Http { agent }
    }

    pub fn get(&self, url: &str) -> (u16, String) {
        let mut r = self.agent.get(url).call().unwrap();
        (r.status().as_u16(), r.body_mut().read_to_string().unwrap())
    }

    pub fn get_json(&self, url: &str) -> (u16, Value) {
        let (s, b) = self.get(url);
        (s, serde_json::from_str(&b).unwrap())
    }

    pub fn post(&self, url: &str, body: &str) -> (u16, Value) {
        let mut r = self
            .agent
            .post(url)
            .header("content-type", "application/json")
            .send(body)
            .unwrap();
        let status = r.status().as_u16();
        let text = r.body_mut().read_to_string().unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    pub fn delete(&self, url: &str) -> (u16, Value) {
        let mut r = self.agent.delete(url).call().unwrap();
        let status = r.status().as_u16();
        let text = r.body_mut().read_to_string().unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    /// Reads an SSE stream to its end.
    pub fn sse(&self, url: &str, last_event_id: Option<usize>) -> Vec<SseMessage> {
        let mut req = self.agent.get(url);
        if let Some(id) = last_event_id {
            req = req.header("Last-Event-ID", id.to_string());
        }
        let r = req.call().unwrap();
        assert_eq!(r.status().as_u16(), 200);
        let reader = BufReader::new(r.into_body().into_reader());
        let mut out = Vec::new();
        let mut cur = SseMessage::default();
        for line in reader.lines() {
            let line = line.unwrap();
            if line.is_empty() {
                if !cur.data.is_empty() || cur.event.is_some() {
                    out.push(std::mem::take(&mut cur));
                }
                continue;
            }
            if line.starts_with(':') {
                continue;
            }
            let (k, v) = line.split_once(':').unwrap_or((&line, ""));
            let v = v.strip_prefix(' ').unwrap_or(v);
            match k {
                "event" => cur.event = Some(v.to_string()),
                "id" => cur.id = Some(v.parse().unwrap()),
                "data" => {
                    if !cur.data.is_empty() {
                        cur.data.push('\n');
                    }
                    cur.data.push_str(v);
                }
                _ => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SseMessage {
    pub event: Option<String>,
    pub id: Option<usize>,
    pub data: String,
}

/// Transcript messages only, as log lines.
pub fn event_lines(msgs: &[SseMessage]) -> Vec<String> {
    msgs.iter()
        .filter(|m| m.event.as_deref() == Some("event"))
        .map(|m| m.data.clone())
        .collect()
}
