//! Read-only HTTP/JSON search service over one index snapshot.
//!
//! The listener is bound first and the index loaded in the background; until
//! it is ready `/healthz` and the API answer 503.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use mias_core::api::{ApiError, DocumentView, Health, DEFAULT_LIMIT, MAX_LIMIT};
use mias_core::index::{Index, IndexError};
use mias_core::query::{search, SearchConfig};
use serde::Deserialize;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use tower_http::cors::{AllowOrigin, CorsLayer};

/// Alternative to passing the index directory explicitly.
pub const INDEX_DIR_ENV: &str = "MIAS_INDEX_DIR";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("invalid CORS origin {0:?}")]
    InvalidCorsOrigin(String),
}

/// Shared between handlers; empty until the index has loaded.
#[derive(Clone, Default)]
pub struct AppState {
    index: Arc<OnceLock<Index>>,
}

impl AppState {
    pub fn loading() -> Self {
        AppState::default()
    }

    pub fn loaded(index: Index) -> Self {
        let state = AppState::default();
        state.set(index);
        state
    }

    /// Installs the index. Later calls are ignored: the snapshot is immutable.
    pub fn set(&self, index: Index) {
        let _ = self.index.set(index);
    }

    pub fn index(&self) -> Option<&Index> {
        self.index.get()
    }
}

fn error(status: StatusCode, message: impl Into<String>, position: Option<usize>) -> Response {
    (status, Json(ApiError { error: message.into(), position })).into_response()
}

fn not_ready() -> Response {
    error(StatusCode::SERVICE_UNAVAILABLE, "index is loading", None)
}

async fn healthz(State(state): State<AppState>) -> Response {
    match state.index() {
        Some(index) => Json(Health { status: "ok".into(), n_docs: index.n_docs() }).into_response(),
        None => (StatusCode::SERVICE_UNAVAILABLE, Json(Health { status: "loading".into(), n_docs: 0 })).into_response(),
    }
}

#[derive(Deserialize)]
struct SearchParams {
    q: Option<String>,
    limit: Option<usize>,
}

async fn api_search(State(state): State<AppState>, params: Result<Query<SearchParams>, axum::extract::rejection::QueryRejection>) -> Response {
    let Ok(Query(params)) = params else {
        return error(StatusCode::BAD_REQUEST, "limit must be a non-negative integer", None);
    };
    let Some(q) = params.q else {
        return error(StatusCode::BAD_REQUEST, "missing query parameter q", None);
    };
    let limit = params.limit.unwrap_or(DEFAULT_LIMIT).min(MAX_LIMIT);
    if state.index().is_none() {
        return not_ready();
    }
    let outcome = tokio::task::spawn_blocking(move || {
        let index = state.index().expect("checked above; never unset");
        search(index, &q, &SearchConfig::with_limit(limit))
    })
    .await;
    match outcome {
        Ok(Ok(response)) => Json(response).into_response(),
        Ok(Err(e)) => error(StatusCode::BAD_REQUEST, e.to_string(), e.position()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None),
    }
}

async fn api_doc(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let Some(index) = state.index() else {
        return not_ready();
    };
    match index.doc_num(&id).and_then(|n| index.doc(n)) {
        Some(stored) => Json(DocumentView::from_document(&stored.doc)).into_response(),
        None => error(StatusCode::NOT_FOUND, format!("unknown document {id:?}"), None),
    }
}

/// Routes, with CORS for `cors_origin` (`*` allows any origin).
pub fn router(state: AppState, cors_origin: Option<&str>) -> Result<Router, ServeError> {
    let mut app = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/search", get(api_search))
        .route("/api/doc/{id}", get(api_doc))
        .with_state(state);
    if let Some(origin) = cors_origin {
        let allow = if origin == "*" {
            AllowOrigin::any()
        } else {
            let value = HeaderValue::from_str(origin).map_err(|_| ServeError::InvalidCorsOrigin(origin.to_string()))?;
            AllowOrigin::exact(value)
        };
        app = app.layer(CorsLayer::new().allow_origin(allow).allow_methods([Method::GET]));
    }
    Ok(app)
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub index_dir: PathBuf,
    pub addr: SocketAddr,
    pub cors_origin: Option<String>,
}

/// A started service.
pub struct Service {
    pub local_addr: SocketAddr,
    pub state: AppState,
    /// Resolves with the document count once the index has loaded.
    pub loaded: JoinHandle<Result<usize, IndexError>>,
    pub server: JoinHandle<std::io::Result<()>>,
}

/// Checks the index directory, binds, then loads the index in the background.
pub async fn spawn(config: ServeConfig) -> Result<Service, ServeError> {
    Index::read_meta(&config.index_dir)?;
    let state = AppState::loading();
    let app = router(state.clone(), config.cors_origin.as_deref())?;
    let listener =
        TcpListener::bind(config.addr).await.map_err(|source| ServeError::Bind { addr: config.addr, source })?;
    let local_addr = listener.local_addr().map_err(|source| ServeError::Bind { addr: config.addr, source })?;

    let loader_state = state.clone();
    let dir = config.index_dir.clone();
    let loaded = tokio::task::spawn_blocking(move || {
        let index = Index::open(&dir)?;
        let n = index.n_docs();
        loader_state.set(index);
        tracing::info!(n_docs = n, dir = %dir.display(), "index loaded");
        Ok(n)
    });
    let server = tokio::spawn(async move { axum::serve(listener, app).await });
    tracing::info!(%local_addr, "listening");
    Ok(Service { local_addr, state, loaded, server })
}
