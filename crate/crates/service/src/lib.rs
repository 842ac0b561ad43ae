//! HTTP front end: every `/api/*` route forwards its query string to
//! [`confusion_core::api::handle`] and returns the same JSON the CLI prints.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use clap::Parser;
use confusion_core::api::{self, canonical_key, ApiError, Endpoint, Limits, Params};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

#[derive(Parser, Debug, Clone)]
#[command(name = "confusion-service", version, about = "HTTP JSON API for confusion-matrix computations")]
pub struct Config {
    #[arg(long, env = "CONFUSION_BIND", default_value = "127.0.0.1")]
    pub bind: std::net::IpAddr,
    #[arg(long, env = "CONFUSION_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Origins allowed by CORS, comma-separated. Empty disables CORS headers.
    #[arg(
        long,
        env = "CONFUSION_CORS_ORIGINS",
        value_delimiter = ',',
        default_value = "http://localhost:5173,http://127.0.0.1:5173"
    )]
    pub cors_origins: Vec<String>,
    /// Memo cache entries; 0 disables caching.
    #[arg(long, env = "CONFUSION_CACHE_SIZE", default_value_t = 256)]
    pub cache_size: usize,
    /// Largest joint pmf grid (p+1)(n+1).
    #[arg(long, env = "CONFUSION_MAX_GRID", default_value_t = Limits::default().max_grid)]
    pub max_grid: u128,
    /// Largest total N for lattice dumps and slices.
    #[arg(long, env = "CONFUSION_MAX_TOTAL", default_value_t = Limits::default().max_total)]
    pub max_total: u64,
    /// Largest Monte Carlo draw count for /api/oracle.
    #[arg(long, env = "CONFUSION_MAX_DRAWS", default_value_t = Limits::default().max_draws)]
    pub max_draws: u64,
    /// Do not expose /api/oracle.
    #[arg(long, env = "CONFUSION_NO_ORACLE")]
    pub no_oracle: bool,
    /// Serve static files (a built web UI) from this directory at `/`.
    #[arg(long, env = "CONFUSION_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

impl Config {
    pub fn limits(&self) -> Limits {
        Limits { max_grid: self.max_grid, max_total: self.max_total, max_draws: self.max_draws, ..Limits::default() }
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::parse_from(["confusion-service"])
    }
}

#[derive(Debug, Default)]
struct Entries {
    bodies: HashMap<String, Arc<str>>,
    /// Keys in insertion order, oldest first.
    order: VecDeque<String>,
}

/// Size-bounded memo of successful responses, evicting the oldest entry.
#[derive(Debug)]
pub struct Cache {
    capacity: usize,
    inner: Mutex<Entries>,
}

impl Cache {
    pub fn new(capacity: usize) -> Self {
        Cache { capacity, inner: Mutex::new(Entries::default()) }
    }

    pub fn get(&self, key: &str) -> Option<Arc<str>> {
        self.inner.lock().ok()?.bodies.get(key).cloned()
    }

    pub fn insert(&self, key: String, body: Arc<str>) {
        let Ok(mut entries) = self.inner.lock() else { return };
        if entries.bodies.insert(key.clone(), body).is_none() {
            entries.order.push_back(key);
        }
        while entries.order.len() > self.capacity {
            if let Some(old) = entries.order.pop_front() {
                entries.bodies.remove(&old);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.inner.lock().map(|e| e.bodies.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct AppState {
    pub limits: Limits,
    pub cache: Option<Arc<Cache>>,
}

impl AppState {
    pub fn new(config: &Config) -> Self {
        let cache = (config.cache_size > 0).then(|| Arc::new(Cache::new(config.cache_size)));
        AppState { limits: config.limits(), cache }
    }
}

fn json_response(status: StatusCode, body: impl Into<String>) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body.into()).into_response()
}

fn error_response(e: &ApiError) -> Response {
    let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::BAD_REQUEST);
    json_response(status, e.body())
}

async fn serve_endpoint(
    endpoint: Endpoint,
    state: AppState,
    query: Result<Query<Params>, QueryRejection>,
) -> Response {
    let params = match query {
        Ok(Query(params)) => params,
        Err(e) => return error_response(&ApiError::usage("invalid_query", e.body_text())),
    };
    let key = canonical_key(endpoint, &params);
    if let Some(body) = state.cache.as_ref().and_then(|c| c.get(&key)) {
        return json_response(StatusCode::OK, body.to_string());
    }
    let limits = state.limits;
    let result = tokio::task::spawn_blocking(move || api::handle(endpoint, &params, &limits)).await;
    match result {
        Ok(Ok(response)) => {
            let body: Arc<str> = response.to_json_string().into();
            if let Some(cache) = &state.cache {
                cache.insert(key, body.clone());
            }
            json_response(StatusCode::OK, body.to_string())
        }
        Ok(Err(e)) => error_response(&e),
        Err(e) => {
            tracing::error!("request task failed: {e}");
            json_response(StatusCode::INTERNAL_SERVER_ERROR, r#"{"error":{"code":"internal","message":"request failed"}}"#)
        }
    }
}

async fn not_found() -> Response {
    json_response(StatusCode::NOT_FOUND, ApiError::usage("unknown_endpoint", "no such endpoint").body())
}

fn cors(origins: &[String]) -> Option<CorsLayer> {
    let origins: Vec<HeaderValue> =
        origins.iter().filter(|o| !o.trim().is_empty()).filter_map(|o| o.trim().parse().ok()).collect();
    (!origins.is_empty()).then(|| CorsLayer::new().allow_origin(AllowOrigin::list(origins)).allow_methods([Method::GET]))
}

pub fn router(config: &Config) -> Router {
    let state = AppState::new(config);
    let mut api = Router::new();
    for endpoint in Endpoint::ALL {
        if endpoint == Endpoint::Oracle && config.no_oracle {
            continue;
        }
        api = api.route(
            endpoint.path(),
            get(move |State(state): State<AppState>, query: Result<Query<Params>, QueryRejection>| {
                serve_endpoint(endpoint, state, query)
            }),
        );
    }
    let mut app = api.route("/api/{*rest}", get(not_found)).with_state(state);
    app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    };
    match cors(&config.cors_origins) {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

pub async fn serve(config: Config) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.addr()).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(&config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
