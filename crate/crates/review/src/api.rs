//! HTTP interface under `/api/v1`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::error::ServiceError;
use crate::service::{DecisionRequest, RetrainRequest, ReviewService};

pub const DEFAULT_THRESHOLD: f64 = 0.9;

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Validation(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotReady(_) => StatusCode::CONFLICT,
            ServiceError::Training(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Unauthorized => StatusCode::UNAUTHORIZED,
            ServiceError::Journal(_) | ServiceError::Io { .. } | ServiceError::Core(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        if status.is_server_error() {
            log::error!("{self}");
        }
        let body = json!({ "error": { "kind": self.kind(), "message": self.to_string() } });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ServiceError>;
type Shared = Arc<ReviewService>;

#[derive(Deserialize)]
struct DecisionQuery {
    paragraph_id: String,
}

#[derive(Deserialize)]
struct ThresholdQuery {
    threshold: Option<f64>,
}

async fn health(State(s): State<Shared>) -> impl IntoResponse {
    Json(s.health())
}

async fn queue(State(s): State<Shared>) -> ApiResult<crate::service::Queue> {
    s.queue().map(Json)
}

async fn predictions(
    State(s): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<crate::service::DocumentPredictions> {
    s.predictions(&id).map(Json)
}

async fn submit(
    State(s): State<Shared>,
    body: Result<Json<DecisionRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<crate::journal::Decision>), ServiceError> {
    let Json(req) = body.map_err(|e| ServiceError::Validation(e.body_text()))?;
    let d = s.submit(&req)?;
    Ok((StatusCode::CREATED, Json(d)))
}

async fn decisions(
    State(s): State<Shared>,
    q: Result<Query<DecisionQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<crate::service::DecisionHistory> {
    let Query(q) = q.map_err(|e| ServiceError::Validation(e.body_text()))?;
    s.decisions(&q.paragraph_id).map(Json)
}

async fn retrain(
    State(s): State<Shared>,
    body: Result<Json<RetrainRequest>, axum::extract::rejection::JsonRejection>,
) -> Result<(StatusCode, Json<crate::service::ModelVersion>), ServiceError> {
    let Json(req) = body.map_err(|e| ServiceError::Validation(e.body_text()))?;
    let v = tokio::task::spawn_blocking(move || s.retrain(&req))
        .await
        .map_err(|e| ServiceError::Journal(format!("retrain task failed: {e}")))??;
    Ok((StatusCode::CREATED, Json(v)))
}

async fn inconsistencies(
    State(s): State<Shared>,
    q: Result<Query<ThresholdQuery>, axum::extract::rejection::QueryRejection>,
) -> ApiResult<crate::service::Inconsistencies> {
    let Query(q) = q.map_err(|e| ServiceError::Validation(e.body_text()))?;
    s.inconsistencies(q.threshold.unwrap_or(DEFAULT_THRESHOLD)).map(Json)
}

async fn models(State(s): State<Shared>) -> impl IntoResponse {
    let versions = s.versions();
    let active = s.active().map(|m| m.info.id);
    Json(json!({ "active": active, "versions": versions }))
}

async fn authorize(State(s): State<Shared>, req: Request, next: Next) -> Response {
    if let Some(token) = &s.config().token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|v| v == token);
        if !ok {
            return ServiceError::Unauthorized.into_response();
        }
    }
    next.run(req).await
}

pub fn router(service: Arc<ReviewService>) -> Router {
    let protected = Router::new()
        .route("/queue", get(queue))
        .route("/documents/{id}/predictions", get(predictions))
        .route("/decisions", post(submit).get(decisions))
        .route("/retrain", post(retrain))
        .route("/inconsistencies", get(inconsistencies))
        .route("/models", get(models))
        .route_layer(middleware::from_fn_with_state(service.clone(), authorize));
    let api = Router::new().route("/health", get(health)).merge(protected);
    Router::new().nest("/api/v1", api).with_state(service)
}

/// Serves until Ctrl-C.
pub async fn serve(service: Arc<ReviewService>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("review service listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
