//! HTTP API and server-sent event stream.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{"config": {..}}` (optional) |
//! | POST | `/sessions/{id}/utterance` | `{"text": ".."}` |
//! | POST | `/sessions/{id}/command` | `{"cmd": "turn_left"}` |
//! | POST | `/sessions/{id}/suggestion_response` | `{"response": "accept"}` |
//! | POST | `/sessions/{id}/advance` | `{"dt": 1.5}` (virtual clock only) |
//! | GET | `/sessions/{id}/snapshot` | |
//! | GET | `/sessions/{id}/log` | newline-delimited events |
//! | GET | `/sessions/{id}/timeline` | |
//! | GET | `/sessions/{id}/events` | SSE; `?from=N` or `Last-Event-ID` |
//! | GET | `/map` | |
//! | DELETE | `/sessions/{id}` | |
//!
//! Errors are JSON `{"error": .., "field": ..}` with 404 for unknown
//! sessions, 409 for closed sessions or a missing suggestion and 422 for
//! malformed bodies.
//!
//! On the stream, transcript events are sent as `event: event` with the
//! transcript index as id and the log line as data; `event: pose` messages
//! carry no id. The stream ends once the session is closed and every event
//! has been sent.

use std::collections::{HashMap, VecDeque};
use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use docent_core::analysis::{code_events, export_timeline};
use docent_core::dialogue::PromptTemplate;
use docent_core::gateway::LanguageModel;
use docent_core::navsim::Directional;
use docent_core::session::{Session, SessionConfig, SessionError};
use docent_core::{AnnotatedMap, SimTime};
use futures::Stream;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{oneshot, watch};

use crate::config::{ClockMode, ServiceConfig};
use crate::gateway::{build_gateway, SharedModel};
use crate::logfile::{event_line, to_ndjson};
use crate::mapfile::serialize_map;

/// Longest single `advance` request, in seconds.
pub const MAX_ADVANCE: f64 = 86_400.0;

pub struct AppState {
    map: Arc<AnnotatedMap>,
    template: Arc<PromptTemplate>,
    llm: SharedModel,
    defaults: SessionConfig,
    clock: ClockMode,
    tick: Duration,
    sessions: RwLock<HashMap<String, Arc<Handle>>>,
    next_id: AtomicU64,
}

struct Handle {
    session: Mutex<Session>,
    /// Bumped after every change; stream readers wait on it.
    version: watch::Sender<u64>,
}

impl Handle {
    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn bump(&self) {
        self.version.send_modify(|v| *v += 1);
    }
}

impl AppState {
    pub fn new(
        map: Arc<AnnotatedMap>,
        template: Arc<PromptTemplate>,
        llm: SharedModel,
        defaults: SessionConfig,
        clock: ClockMode,
        tick_hz: f64,
    ) -> Self {
        AppState {
            map,
            template,
            llm,
            defaults,
            clock,
            tick: Duration::from_secs_f64(1.0 / tick_hz),
            sessions: RwLock::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn from_config(cfg: &ServiceConfig) -> anyhow::Result<Self> {
        cfg.validate()?;
        Ok(AppState::new(
            cfg.load_map()?,
            cfg.load_template()?,
            build_gateway(&cfg.gateway, cfg.seed)?,
            cfg.session.clone(),
            cfg.clock,
            cfg.tick_hz,
        ))
    }

    fn handle(&self, id: &str) -> Result<Arc<Handle>, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(format!("no session {id:?}")))
    }
}

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    Conflict(String),
    Unprocessable { field: String, message: String },
    Internal(String),
}

impl ApiError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ApiError::Unprocessable {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::EmptyUtterance => ApiError::field("text", e.to_string()),
            SessionError::Closed | SessionError::NoPendingSuggestion => ApiError::Conflict(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, json!({ "error": m })),
            ApiError::Unprocessable { field, message } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": format!("{field}: {message}"), "field": field }),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

/// Name in backticks from serde's "missing field `x`" / "unknown field `x`".
fn quoted_field(message: &str) -> Option<&str> {
    let rest = message
        .strip_prefix("missing field `")
        .or_else(|| message.strip_prefix("unknown field `"))?;
    rest.split('`').next()
}

fn decode<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T, ApiError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let message = e.inner().to_string();
        let mut parts: Vec<String> = Vec::new();
        if !prefix.is_empty() {
            parts.push(prefix.to_string());
        }
        let path = e.path().to_string();
        if path != "." {
            parts.push(path);
        }
        let mut field = parts.join(".");
        if let Some(name) = quoted_field(&message) {
            if field != name && !field.ends_with(&format!(".{name}")) {
                if !field.is_empty() {
                    field.push('.');
                }
                field.push_str(name);
            }
        }
        if field.is_empty() {
            field = "body".to_string();
        }
        ApiError::field(field, message)
    })
}

fn parse_json(bytes: &[u8]) -> Result<Value, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::field("body", e.to_string()))
}

fn parse_body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    decode(parse_json(bytes)?, "")
}

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Runs `f` on the session off the async executor, then wakes streams.
async fn with_session<T, F>(app: &AppState, id: &str, f: F) -> Result<(T, usize), ApiError>
where
    T: Send + 'static,
    F: FnOnce(&mut Session, &dyn LanguageModel) -> Result<T, SessionError> + Send + 'static,
{
    let h = app.handle(id)?;
    let llm = app.llm.clone();
    tokio::task::spawn_blocking(move || {
        let mut s = h.lock();
        let out = f(&mut s, llm.as_ref());
        let n = s.transcript().len();
        drop(s);
        h.bump();
        out.map(|v| (v, n))
    })
    .await
    .map_err(|e| ApiError::Internal(e.to_string()))?
    .map_err(ApiError::from)
}

fn accepted(n: usize) -> (StatusCode, Json<Value>) {
    (StatusCode::ACCEPTED, Json(json!({ "event_count": n })))
}

fn map_summary(map: &AnnotatedMap) -> Value {
    let grid = map.grid();
    json!({
        "width": grid.width(),
        "height": grid.height(),
        "resolution": grid.resolution(),
        "origin": grid.origin(),
        "areas": map.areas().iter().map(|a| json!({"id": a.id, "name": a.name})).collect::<Vec<_>>(),
        "exhibits": map.exhibits().iter().map(|e| json!({
            "id": e.id, "name": e.name, "area_id": e.area_id, "viewing_pose": e.viewing_pose,
        })).collect::<Vec<_>>(),
        "tour_order": map.tour_order(),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    #[serde(default)]
    config: Option<Value>,
}

async fn create_session(State(app): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateBody = if body.iter().all(u8::is_ascii_whitespace) {
        CreateBody { config: None }
    } else {
        parse_body(&body)?
    };
    let mut config = app.defaults.clone();
    if let Some(patch) = req.config {
        if !patch.is_object() {
            return Err(ApiError::field("config", "expected an object"));
        }
        let mut base = serde_json::to_value(&config).map_err(|e| ApiError::Internal(e.to_string()))?;
        merge(&mut base, patch);
        config = decode(base, "config")?;
    }
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session::new(id.clone(), app.map.clone(), config, app.template.clone())
        .map_err(|e| ApiError::field(format!("config.{}", e.0), e.to_string()))?;
    let start = session.robot().pose();
    let (tx, _) = watch::channel(0);
    let handle = Arc::new(Handle {
        session: Mutex::new(session),
        version: tx,
    });
    app.sessions
        .write()
        .unwrap_or_else(|p| p.into_inner())
        .insert(id.clone(), handle.clone());
    if app.clock == ClockMode::Wall {
        spawn_ticker(app.clone(), handle);
    }
    tracing::info!(session = %id, "session created");
    let body = json!({ "session_id": id, "start_pose": start, "map": map_summary(&app.map) });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

fn spawn_ticker(app: Arc<AppState>, h: Arc<Handle>) {
    let period = app.tick;
    let dt = SimTime::from_secs_f64(period.as_secs_f64());
    tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        interval.tick().await;
        loop {
            interval.tick().await;
            let (h, llm) = (h.clone(), app.llm.clone());
            let open = tokio::task::spawn_blocking(move || {
                let mut s = h.lock();
                let open = s.advance(dt, llm.as_ref()).is_ok();
                drop(s);
                h.bump();
                open
            })
            .await
            .unwrap_or(false);
            if !open {
                break;
            }
        }
    });
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UtteranceBody {
    text: String,
}

async fn utterance(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let UtteranceBody { text } = parse_body(&body)?;
    let ((), n) = with_session(&app, &id, move |s, llm| s.submit_utterance(&text, llm).map(drop)).await?;
    Ok(accepted(n))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CommandBody {
    cmd: Directional,
}

async fn command(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let CommandBody { cmd } = parse_body(&body)?;
    let ((), n) = with_session(&app, &id, move |s, _| s.press(cmd).map(drop)).await?;
    Ok(accepted(n))
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Answer {
    Accept,
    Reject,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuggestionBody {
    response: Answer,
}

async fn suggestion_response(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let SuggestionBody { response } = parse_body(&body)?;
    let accept = response == Answer::Accept;
    let ((), n) = with_session(&app, &id, move |s, llm| s.respond_suggestion(accept, llm).map(drop)).await?;
    Ok(accepted(n))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvanceBody {
    dt: f64,
}

async fn advance(State(app): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let AdvanceBody { dt } = parse_body(&body)?;
    if !(0.0..=MAX_ADVANCE).contains(&dt) {
        return Err(ApiError::field("dt", format!("must be between 0 and {MAX_ADVANCE} seconds")));
    }
    if app.clock == ClockMode::Wall {
        app.handle(&id)?;
        return Err(ApiError::Conflict("the service runs on the wall clock".into()));
    }
    let ((), n) = with_session(&app, &id, move |s, llm| s.advance(SimTime::from_secs_f64(dt), llm).map(drop)).await?;
    Ok(accepted(n))
}

async fn snapshot(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let h = app.handle(&id)?;
    let snap = h.lock().snapshot();
    Ok(Json(snap))
}

async fn log(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let h = app.handle(&id)?;
    let text = to_ndjson(h.lock().transcript());
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], text))
}

async fn timeline(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let h = app.handle(&id)?;
    let rows = export_timeline(&code_events(h.lock().transcript(), Some(&app.map)));
    Ok(Json(rows))
}

async fn get_map(State(app): State<Arc<AppState>>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], serialize_map(&app.map))
}

async fn close(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    let ((), n) = with_session(&app, &id, |s, _| s.close()).await?;
    tracing::info!(session = %id, "session closed");
    Ok(Json(json!({ "closed": true, "event_count": n })))
}

/// First transcript index to send: one past `Last-Event-ID` when present,
/// otherwise `?from=`, otherwise 0.
fn resume_index(headers: &HeaderMap, query: &HashMap<String, String>) -> Result<usize, ApiError> {
    if let Some(v) = headers.get("last-event-id") {
        let last: usize = v
            .to_str()
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| ApiError::field("Last-Event-ID", "expected an event index"))?;
        return Ok(last + 1);
    }
    match query.get("from") {
        Some(v) => v.parse().map_err(|_| ApiError::field("from", "expected an event index")),
        None => Ok(0),
    }
}

struct Feed {
    handle: Arc<Handle>,
    rx: watch::Receiver<u64>,
    cursor: usize,
    last_pose: Option<Value>,
    queue: VecDeque<SseEvent>,
    done: bool,
}

impl Feed {
    fn refill(&mut self) {
        self.rx.borrow_and_update();
        let s = self.handle.lock();
        let transcript = s.transcript();
        for (i, e) in transcript.iter().enumerate().skip(self.cursor) {
            self.queue
                .push_back(SseEvent::default().event("event").id(i.to_string()).data(event_line(e)));
        }
        self.cursor = self.cursor.max(transcript.len());
        let robot = s.robot();
        let pose = json!({
            "t": s.clock(),
            "pose": robot.pose(),
            "mode": robot.mode(),
            "goal_exhibit": robot.goal_exhibit(),
            "speaking": s.is_speaking(),
        });
        if self.last_pose.as_ref() != Some(&pose) {
            self.queue.push_back(SseEvent::default().event("pose").data(pose.to_string()));
            self.last_pose = Some(pose);
        }
        self.done = s.is_closed();
    }
}

fn feed(handle: Arc<Handle>, from: usize) -> impl Stream<Item = Result<SseEvent, Infallible>> {
    let rx = handle.version.subscribe();
    let start = Feed {
        handle,
        rx,
        cursor: from,
        last_pose: None,
        queue: VecDeque::new(),
        done: false,
    };
    futures::stream::unfold(start, |mut f| async move {
        loop {
            if let Some(ev) = f.queue.pop_front() {
                return Some((Ok(ev), f));
            }
            if f.done {
                return None;
            }
            f.refill();
            if f.queue.is_empty() && !f.done && f.rx.changed().await.is_err() {
                f.done = true;
            }
        }
    })
}

async fn events(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<HashMap<String, String>>,
    headers: HeaderMap,
) -> Result<impl IntoResponse, ApiError> {
    let h = app.handle(&id)?;
    let from = resume_index(&headers, &query)?;
    Ok(Sse::new(feed(h, from)).keep_alive(KeepAlive::default()))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/map", get(get_map))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(close))
        .route("/sessions/{id}/utterance", post(utterance))
        .route("/sessions/{id}/command", post(command))
        .route("/sessions/{id}/suggestion_response", post(suggestion_response))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/snapshot", get(snapshot))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/timeline", get(timeline))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

/// Serves until Ctrl-C.
pub fn serve_blocking(cfg: ServiceConfig) -> anyhow::Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .try_init();
    let state = Arc::new(AppState::from_config(&cfg)?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(cfg.bind).await?;
        tracing::info!(addr = %listener.local_addr()?, "listening");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// A server on its own runtime thread; shuts down on drop.
pub struct BackgroundServer {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl BackgroundServer {
    pub fn start(state: AppState, bind: SocketAddr) -> std::io::Result<Self> {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
        let listener = rt.block_on(tokio::net::TcpListener::bind(bind))?;
        let addr = listener.local_addr()?;
        let (stop, stopped) = oneshot::channel::<()>();
        let app = router(Arc::new(state));
        let thread = std::thread::spawn(move || {
            rt.block_on(async move {
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await;
            });
            rt.shutdown_timeout(Duration::from_secs(1));
        });
        Ok(BackgroundServer {
            addr,
            stop: Some(stop),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }
}

impl Drop for BackgroundServer {
    fn drop(&mut self) {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
