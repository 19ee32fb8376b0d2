//! HTTP interface.
//!
//! | route                  | body                                  | reply                         |
//! |------------------------|---------------------------------------|-------------------------------|
//! | `POST /api/tasks`      | `{type, language, config, id?}`       | 201 manifest                  |
//! | `GET /api/tasks`       |                                       | 200 manifests, oldest first   |
//! | `GET /api/tasks/{tid}` |                                       | 200 public task view          |
//! | `POST /api/execute`    | `{tid, input}`                        | 200 `{tid, status, output}`   |
//!
//! Errors are `{"error": <kind>, "message": <text>}`, plus `"path"` for
//! configuration errors.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};

use crate::config::{SchemaError, TaskConfig};
use crate::grading::{BackendStatus, Engine};
use crate::taskstore::{Manifest, StoreError};

/// Largest accepted `input` of an execute request.
pub const MAX_INPUT_BYTES: usize = 1 << 20;

/// Default cap on the `output` of an execute response.
pub const DEFAULT_OUTPUT_CAP: usize = 16_384;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExecuteRequest {
    pub tid: String,
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecuteResponse {
    pub tid: String,
    pub status: String,
    pub output: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CreateTaskRequest {
    #[serde(rename = "type")]
    pub task_type: String,
    pub language: String,
    pub config: JsonValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub output_cap: usize,
}

impl AppState {
    pub fn new(engine: Engine) -> Self {
        AppState {
            engine: Arc::new(engine),
            output_cap: DEFAULT_OUTPUT_CAP,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/tasks", post(create_task).get(list_tasks))
        .route("/api/tasks/{tid}", get(show_task))
        .route("/api/execute", post(execute))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: &'static str,
    message: String,
    path: Option<String>,
}

impl ApiError {
    fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            kind,
            message: message.into(),
            path: None,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl From<SchemaError> for ApiError {
    fn from(e: SchemaError) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            kind: "SchemaError",
            message: e.message,
            path: Some(e.path),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let (status, kind) = match &e {
            StoreError::DuplicateId(_) => (StatusCode::CONFLICT, "DuplicateId"),
            StoreError::UnsupportedType(_) => (StatusCode::BAD_REQUEST, "UnsupportedType"),
            StoreError::UnsupportedLanguage(_) => (StatusCode::BAD_REQUEST, "UnsupportedLanguage"),
            StoreError::InvalidId(_) => (StatusCode::BAD_REQUEST, "InvalidId"),
            StoreError::SolutionLoad(_) => (StatusCode::UNPROCESSABLE_ENTITY, "SolutionLoadError"),
            StoreError::NotFound(_) => (StatusCode::NOT_FOUND, "NotFound"),
            StoreError::Corrupt { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "CorruptTask"),
            StoreError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "StoreError"),
        };
        ApiError::new(status, kind, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"error": self.kind, "message": self.message});
        if let Some(p) = self.path {
            body["path"] = JsonValue::String(p);
        }
        (self.status, Json(body)).into_response()
    }
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", e.to_string()))
}

async fn create_task(State(state): State<AppState>, body: Bytes) -> Result<(StatusCode, Json<Manifest>), ApiError> {
    let req: CreateTaskRequest = parse_body(&body)?;
    let config = TaskConfig::from_json(&req.config)?;
    let engine = state.engine.clone();
    let manifest = blocking(move || engine.create_task(&req.task_type, &req.language, &config, req.id.as_deref())).await??;
    Ok((StatusCode::CREATED, Json(manifest)))
}

async fn list_tasks(State(state): State<AppState>) -> Result<Json<Vec<Manifest>>, ApiError> {
    let engine = state.engine.clone();
    Ok(Json(blocking(move || engine.store.list_tasks()).await?))
}

async fn show_task(State(state): State<AppState>, Path(tid): Path<String>) -> Result<Json<JsonValue>, ApiError> {
    let engine = state.engine.clone();
    let task = blocking(move || engine.store.load_task(&tid)).await??;
    Ok(Json(task.public_view()))
}

async fn execute(State(state): State<AppState>, body: Bytes) -> Result<Json<ExecuteResponse>, ApiError> {
    let req: ExecuteRequest = parse_body(&body)?;
    if req.tid.is_empty() {
        return Err(ApiError::bad_request("`tid` must not be empty"));
    }
    if req.input.len() > MAX_INPUT_BYTES {
        return Err(ApiError::bad_request(format!("`input` exceeds {MAX_INPUT_BYTES} bytes")));
    }
    let engine = state.engine.clone();
    let tid = req.tid.clone();
    let report = blocking(move || engine.grade(&tid, &req.input, None)).await??;
    Ok(Json(envelope(req.tid, report.backend, report.output.to_json_string(), state.output_cap)))
}

/// The outer response, with `output` capped at `cap` bytes.
pub fn envelope(tid: String, backend: BackendStatus, output: String, cap: usize) -> ExecuteResponse {
    if output.len() <= cap {
        return ExecuteResponse {
            tid,
            status: backend.to_string(),
            output,
        };
    }
    let mut end = cap;
    while !output.is_char_boundary(end) {
        end -= 1;
    }
    ExecuteResponse {
        tid,
        status: BackendStatus::Overflow.to_string(),
        output: output[..end].to_string(),
    }
}

/// Serve until interrupted.
pub async fn serve(state: AppState, addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_caps_output_on_char_boundary() {
        let r = envelope("sub".into(), BackendStatus::Success, "abc".into(), 16);
        assert_eq!((r.status.as_str(), r.output.as_str()), ("success", "abc"));
        let r = envelope("sub".into(), BackendStatus::Success, "aé".repeat(10), 4);
        assert_eq!(r.status, "overflow");
        assert_eq!(r.output, "aéa");
        let r = envelope("sub".into(), BackendStatus::Timeout, "x".repeat(16_384), DEFAULT_OUTPUT_CAP);
        assert_eq!(r.status, "timeout");
        assert_eq!(r.output.len(), 16_384);
    }

    #[test]
    fn store_errors_map_to_status_codes() {
        let code = |e: StoreError| ApiError::from(e).status;
        assert_eq!(code(StoreError::DuplicateId("x".into())), StatusCode::CONFLICT);
        assert_eq!(code(StoreError::UnsupportedType("x".into())), StatusCode::BAD_REQUEST);
        assert_eq!(code(StoreError::UnsupportedLanguage("x".into())), StatusCode::BAD_REQUEST);
        assert_eq!(code(StoreError::SolutionLoad("x".into())), StatusCode::UNPROCESSABLE_ENTITY);
        assert_eq!(code(StoreError::NotFound("x".into())), StatusCode::NOT_FOUND);
    }
}
