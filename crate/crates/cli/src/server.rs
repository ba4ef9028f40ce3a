//! HTTP endpoints used by the browser runner.

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use imaze_core::store::{ResultStore, SessionRecord, UploadOutcome};
use imaze_core::Error;
use serde_json::json;

const PLACEHOLDER_PAGE: &str = "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>imaze</title></head>\n<body><p>imaze result server. No runner page is installed; start the server with --runner DIR.</p></body></html>\n";

#[derive(Clone)]
struct AppState {
    store: Arc<ResultStore>,
    runner: Option<PathBuf>,
}

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::DuplicateUpload(_) => StatusCode::CONFLICT,
        Error::HashMismatch(_) => StatusCode::NOT_FOUND,
        Error::Schema(_) | Error::Format(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

fn error_response(e: Error) -> Response {
    let body = json!({ "error": e.kind(), "message": e.to_string() });
    (status_of(&e), Json(body)).into_response()
}

async fn blocking<T, F>(f: F) -> Result<T, Response>
where
    T: Send + 'static,
    F: FnOnce() -> imaze_core::Result<T> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(error_response),
        Err(e) => Err((StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response()),
    }
}

async fn index(State(state): State<AppState>) -> Response {
    if let Some(dir) = state.runner {
        if let Ok(page) = tokio::fs::read_to_string(dir.join("index.html")).await {
            return Html(page).into_response();
        }
    }
    Html(PLACEHOLDER_PAGE).into_response()
}

async fn materials(State(state): State<AppState>, Path(hash): Path<String>) -> Response {
    let store = state.store.clone();
    match blocking(move || store.materials_json(&hash)).await {
        Ok(text) => ([(header::CONTENT_TYPE, "application/json")], text).into_response(),
        Err(r) => r,
    }
}

async fn assignment(State(state): State<AppState>, Path(hash): Path<String>) -> Response {
    let store = state.store.clone();
    match blocking(move || store.assign(&hash)).await {
        Ok(a) => Json(a).into_response(),
        Err(r) => r,
    }
}

async fn results(State(state): State<AppState>, body: String) -> Response {
    let record: SessionRecord = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => return error_response(Error::Schema(e.to_string())),
    };
    let store = state.store.clone();
    match blocking(move || store.submit(&record)).await {
        Ok(outcome @ UploadOutcome::Stored { .. }) => (StatusCode::CREATED, Json(outcome)).into_response(),
        Ok(outcome) => (StatusCode::OK, Json(outcome)).into_response(),
        Err(r) => r,
    }
}

/// Routes: `GET /`, `GET /api/materials/{hash}`, `GET /api/assignment/{hash}`
/// and `POST /api/results`.
pub fn app(store: Arc<ResultStore>, runner: Option<PathBuf>) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/materials/{hash}", get(materials))
        .route("/api/assignment/{hash}", get(assignment))
        .route("/api/results", post(results))
        .with_state(AppState { store, runner })
}

pub async fn serve(store: Arc<ResultStore>, runner: Option<PathBuf>, addr: &str) -> imaze_core::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr, e))?;
    eprintln!("listening on http://{}", listener.local_addr().map_err(|e| Error::io(addr, e))?);
    axum::serve(listener, app(store, runner))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::io(addr, e))
}
