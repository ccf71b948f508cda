mod common;

use std::io::Read;
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::fixture;
use docent::gateway::{build_gateway, build_gateway_with, GatewayConfig, Transport};
use docent::mapfile::read_map;
use docent::script::{parse_script, run_script};
use docent_core::dialogue::PromptTemplate;
use docent_core::gateway::{GatewayError, GatewayRequest, Purpose};
use docent_core::session::{Engine, EventBody, NavCommand, Session, SessionConfig};
use serde_json::{json, Value};

/// Records every request that would have gone over the network.
#[derive(Default)]
struct Probe {
    calls: AtomicUsize,
}

impl Transport for Probe {
    fn post_json(&self, _: &str, _: Option<&str>, _: &Value, _: Duration) -> Result<(u16, String), GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let reply = json!({"choices": [{"message": {"role": "assistant", "content": "hello"}}]});
        Ok((200, reply.to_string()))
    }
}

fn session(cfg: SessionConfig) -> Session {
    let map = Arc::new(read_map(fixture("museum11.map")).unwrap());
    Session::new("t", map, cfg, Arc::new(PromptTemplate::default())).unwrap()
}

#[test]
fn scripted_backend_never_touches_the_network() {
    let probe = Arc::new(Probe::default());
    let llm = build_gateway_with(&GatewayConfig::default(), 0, probe.clone()).unwrap();
    let cfg = SessionConfig {
        classifier: Engine::Model,
        goal_extractor: Engine::Model,
        ..SessionConfig::default()
    };
    let mut s = session(cfg);
    let steps = parse_script(&std::fs::read_to_string(fixture("demo.script")).unwrap()).unwrap();
    run_script(&mut s, &steps, llm.as_ref(), None).unwrap();
    assert!(s.transcript().len() > 50);
    assert_eq!(probe.calls.load(Ordering::SeqCst), 0);

    // The probe does see traffic from a remote backend.
    let remote = GatewayConfig::Remote {
        endpoint: "http://probe.invalid/v1/chat/completions".into(),
        model: "m".into(),
        api_key_env: "DOCENT_TEST_UNSET_KEY".into(),
        deadline: None,
        max_backoff_ms: 1,
    };
    let llm = build_gateway_with(&remote, 0, probe.clone()).unwrap();
    assert_eq!(llm.complete(&GatewayRequest::new(Purpose::Respond, "s", "u")).unwrap(), "hello");
    assert_eq!(probe.calls.load(Ordering::SeqCst), 1);
}

#[test]
fn model_engines_route_through_scripted_rules() {
    let llm = build_gateway(&GatewayConfig::default(), 0).unwrap();
    let cfg = SessionConfig {
        classifier: Engine::Model,
        goal_extractor: Engine::Model,
        ..SessionConfig::default()
    };
    let mut s = session(cfg);
    let events = s.submit_utterance("Can you show me exhibit 13?", llm.as_ref()).unwrap();
    assert!(events.iter().any(|e| matches!(
        e.body,
        EventBody::NavCommand(NavCommand::Goal { goal_exhibit: 13, .. })
    )));
    assert_eq!(s.robot().goal_exhibit(), Some(13));
}

#[test]
fn silent_endpoint_times_out_within_budget() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let accepted = Arc::new(AtomicUsize::new(0));
    let counter = accepted.clone();
    std::thread::spawn(move || {
        let mut held = Vec::new();
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            counter.fetch_add(1, Ordering::SeqCst);
            // Read the request, never answer.
            let mut buf = [0u8; 4096];
            let _ = stream.set_read_timeout(Some(Duration::from_millis(50)));
            let _ = stream.read(&mut buf);
            held.push(stream);
        }
    });

    let deadline = 0.3;
    let cap_ms = 200;
    let cfg = GatewayConfig::Remote {
        endpoint: format!("http://{addr}/v1/chat/completions"),
        model: "m".into(),
        api_key_env: "DOCENT_TEST_UNSET_KEY".into(),
        deadline: Some(deadline),
        max_backoff_ms: cap_ms,
    };
    let llm = build_gateway(&cfg, 3).unwrap();
    let began = Instant::now();
    let r = llm.complete(&GatewayRequest::new(Purpose::Respond, "s", "u"));
    let took = began.elapsed();
    assert_eq!(r, Err(GatewayError::Timeout));
    let bound = Duration::from_secs_f64(2.0 * deadline) + Duration::from_millis(cap_ms);
    assert!(took <= bound, "took {took:?}, bound {bound:?}");
    // Two real attempts: each waited out a deadline, with a pause between.
    assert!(took >= Duration::from_secs_f64(deadline), "took {took:?}");
    std::thread::sleep(Duration::from_millis(50));
    assert_eq!(accepted.load(Ordering::SeqCst), 2);
}

#[test]
fn refused_connection_is_a_transport_error() {
    let addr = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let cfg = GatewayConfig::Remote {
        endpoint: format!("http://{addr}/v1/chat/completions"),
        model: "m".into(),
        api_key_env: "DOCENT_TEST_UNSET_KEY".into(),
        deadline: Some(2.0),
        max_backoff_ms: 10,
    };
    let llm = build_gateway(&cfg, 0).unwrap();
    match llm.complete(&GatewayRequest::new(Purpose::Respond, "s", "u")) {
        Err(GatewayError::Transport(_)) => {}
        other => panic!("expected a transport error, got {other:?}"),
    }
}
