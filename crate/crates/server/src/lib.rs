//! HTTP front end for the simulator's gateway tier.
//!
//! Every request passes the gateway's round-robin load balancer and is then
//! served by the framework-independent [`vcsim_core::gateway::serve_api`]. `GET /api/v1/events`
//! is answered with a newline-delimited JSON stream of match events.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::{Body, Bytes};
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method as HttpMethod, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use futures::stream;
use tokio::net::TcpListener;
use tokio::sync::Notify;
use vcsim_core::gateway::{ApiBody, ApiRequest, ApiResponse, Gateway, Method, MAX_SUBSCRIBER_LAG};
use vcsim_core::harness::{run_scenario_with, HarnessError, RunHooks, ScenarioConfig};
use vcsim_core::netsim::ClockMode;
use vcsim_core::store::Stores;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] HarnessError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone)]
struct AppState {
    gateway: Arc<Gateway>,
    published: Arc<Notify>,
    closing: Arc<AtomicBool>,
}

/// Builds the router and hooks match publication up to stream wake-ups.
pub fn router(gateway: Arc<Gateway>) -> Router {
    router_with(gateway).0
}

fn router_with(gateway: Arc<Gateway>) -> (Router, AppState) {
    let published = Arc::new(Notify::new());
    let n = Arc::clone(&published);
    gateway.hub.on_publish(move || n.notify_waiters());
    let st = AppState {
        gateway,
        published,
        closing: Arc::new(AtomicBool::new(false)),
    };
    (Router::new().fallback(handle).with_state(st.clone()), st)
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

async fn handle(State(st): State<AppState>, method: HttpMethod, uri: Uri, Query(query): Query<Vec<(String, String)>>, body: Bytes) -> Response {
    let req = ApiRequest {
        method: Method::parse(method.as_str()),
        path: uri.path().to_string(),
        query,
        body: body.to_vec(),
        now_ms: now_ms(),
    };
    let gw = Arc::clone(&st.gateway);
    let resp = match req.method {
        // rescans walk the whole log
        Method::Post => tokio::task::spawn_blocking(move || gw.handle(&req).1).await.unwrap_or_else(|e| ApiResponse::error(500, e)),
        _ => gw.handle(&req).1,
    };
    into_http(st, resp)
}

fn into_http(st: AppState, resp: ApiResponse) -> Response {
    let status = StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    match resp.body {
        ApiBody::Json(v) => (status, [(header::CONTENT_TYPE, "application/json")], v.to_string()).into_response(),
        ApiBody::Bytes { content_type, bytes } => (status, [(header::CONTENT_TYPE, content_type)], bytes).into_response(),
        ApiBody::EventStream { since } => {
            let mut r = Response::new(event_stream(st, since));
            r.headers_mut().insert(header::CONTENT_TYPE, HeaderValue::from_static("application/x-ndjson"));
            r.headers_mut().insert(header::CACHE_CONTROL, HeaderValue::from_static("no-cache"));
            r
        }
    }
}

/// Events written per body chunk during replay.
const REPLAY_CHUNK: usize = 1_000;

/// Replays events after `since`, then follows the hub. Once live, a reader
/// that falls more than [`MAX_SUBSCRIBER_LAG`] events behind is cut off.
fn event_stream(st: AppState, since: usize) -> Body {
    let s = stream::unfold((st, since, false), |(st, cursor, live)| async move {
        let published = Arc::clone(&st.published);
        let mut live = live;
        loop {
            let notified = published.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            let pending = st.gateway.hub.len().saturating_sub(cursor);
            if live && pending > MAX_SUBSCRIBER_LAG {
                return None;
            }
            if pending > 0 {
                let mut chunk = String::new();
                let batch: Vec<_> = st.gateway.hub.page(cursor, REPLAY_CHUNK);
                for ev in &batch {
                    chunk.push_str(&serde_json::to_string(ev).expect("event serializes"));
                    chunk.push('\n');
                }
                let next = cursor + batch.len();
                return Some((Ok::<_, std::io::Error>(chunk), (st, next, live)));
            }
            live = true;
            if st.closing.load(Ordering::Acquire) {
                return None;
            }
            notified.await;
        }
    });
    Body::from_stream(s)
}

/// Serves `gateway` on `listener` until `shutdown` resolves. Open event
/// streams are closed once they have drained.
pub async fn serve_on(listener: TcpListener, gateway: Arc<Gateway>, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    let (app, st) = router_with(gateway);
    let signal = async move {
        shutdown.await;
        st.closing.store(true, Ordering::Release);
        st.published.notify_waiters();
    };
    axum::serve(listener, app).with_graceful_shutdown(signal).await?;
    Ok(())
}

/// Binds `addr` and serves `gateway` from a background task. Returns the
/// bound address.
pub async fn spawn_server(gateway: Arc<Gateway>, addr: &str) -> Result<(SocketAddr, tokio::task::JoinHandle<Result<(), ServeError>>), ServeError> {
    let listener = TcpListener::bind(addr).await.map_err(|source| ServeError::Bind { addr: addr.into(), source })?;
    let local = listener.local_addr()?;
    let h = tokio::spawn(serve_on(listener, gateway, std::future::pending()));
    Ok((local, h))
}

/// Runs `cfg` in realtime mode on a background thread while serving the API
/// on `cfg.listen`. Returns after `shutdown` resolves; the scenario is asked
/// to stop at that point.
pub async fn serve_scenario(cfg: ScenarioConfig, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    cfg.validate()?;
    let listener = TcpListener::bind(&cfg.listen).await.map_err(|source| ServeError::Bind {
        addr: cfg.listen.clone(),
        source,
    })?;
    serve_scenario_on(listener, cfg, shutdown).await
}

/// Like [`serve_scenario`] on an already bound listener.
pub async fn serve_scenario_on(listener: TcpListener, cfg: ScenarioConfig, shutdown: impl std::future::Future<Output = ()> + Send + 'static) -> Result<(), ServeError> {
    let cfg = ScenarioConfig {
        mode: ClockMode::Realtime,
        ..cfg
    };
    cfg.validate()?;
    let gateway = Arc::new(Gateway::new(Arc::new(Stores::new()), cfg.web_workers, cfg.t_face));
    tracing::info!(addr = %listener.local_addr()?, "listening");
    let stop = Arc::new(AtomicBool::new(false));
    let hooks = RunHooks {
        gateway: Some(Arc::clone(&gateway)),
        stop: Some(Arc::clone(&stop)),
    };
    let sim = std::thread::spawn(move || match run_scenario_with(&cfg, hooks) {
        Ok(out) => tracing::info!(frames = out.report.frames_captured, "scenario finished"),
        Err(e) => tracing::error!(error = %e, "scenario failed"),
    });
    let result = serve_on(listener, gateway, shutdown).await;
    stop.store(true, Ordering::Relaxed);
    let _ = tokio::task::spawn_blocking(move || sim.join()).await;
    result
}
