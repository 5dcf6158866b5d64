//! JSON API for the browser front end.
//!
//! `POST /api/layout` runs the pipeline on a graph and a base64 PNG sketch;
//! `GET /api/health` answers a constant body. Everything else can be served
//! from a static directory.

use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::DefaultBodyLimit;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sketchlayout_core::layout::positions_from_map;
use sketchlayout_core::pipeline::{self, OutputDoc, PipelineConfig};
use sketchlayout_core::{raster, Error, Graph, Point};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 16 * 1024 * 1024;

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    /// Directory with the built front end, served for non-API paths.
    pub static_dir: Option<PathBuf>,
    /// Allow cross-origin requests (front-end dev server).
    pub dev: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Full,
    Incremental,
}

#[derive(Debug, Clone, Deserialize)]
pub struct LayoutRequest {
    pub graph: Graph,
    /// Base64-encoded PNG (a `data:` URL prefix is tolerated).
    pub sketch: String,
    #[serde(default)]
    pub config: PipelineConfig,
    #[serde(default)]
    pub mode: Mode,
    pub selection: Option<Vec<String>>,
    pub prior: Option<IndexMap<String, Point>>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NumericFailure(_) => StatusCode::INTERNAL_SERVER_ERROR,
            Error::Image(_) | Error::Json(_) | Error::Io(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

pub fn router(cfg: &ServerConfig) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/layout", post(layout))
        .layer(DefaultBodyLimit::max(BODY_LIMIT));
    let app = match &cfg.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    if cfg.dev {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn layout(body: Bytes) -> Result<Json<OutputDoc>, ApiError> {
    let request: LayoutRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(format!("malformed request: {e}")))?;
    tokio::task::spawn_blocking(move || handle(request))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, format!("layout task failed: {e}")))?
        .map(Json)
}

/// Runs one request to completion; blocking.
pub fn handle(request: LayoutRequest) -> Result<OutputDoc, ApiError> {
    let LayoutRequest { graph, sketch, config, mode, selection, prior } = request;
    let encoded = sketch.split_once("base64,").map_or(sketch.as_str(), |(_, data)| data);
    let png = base64::engine::general_purpose::STANDARD
        .decode(encoded.trim())
        .map_err(|e| ApiError::bad_request(format!("sketch is not valid base64: {e}")))?;
    let image = raster::decode_sketch(&png).map_err(|e| ApiError::bad_request(format!("sketch is not a PNG: {e}")))?;

    let output = match mode {
        Mode::Full => pipeline::run(&graph, &image, &config)?,
        Mode::Incremental => {
            let selection = selection.ok_or_else(|| ApiError::unprocessable("incremental mode requires `selection`"))?;
            let prior = prior.ok_or_else(|| ApiError::unprocessable("incremental mode requires `prior`"))?;
            let prior = positions_from_map(&prior, &graph)?;
            let selected = selection
                .iter()
                .map(|id| graph.ix(id).ok_or_else(|| ApiError::unprocessable(format!("selected node {id:?} is not in the graph"))))
                .collect::<Result<Vec<_>, _>>()?;
            pipeline::run_incremental(&graph, &image, &selected, &prior, &config)?
        }
    };
    Ok(output.to_doc(&graph))
}
