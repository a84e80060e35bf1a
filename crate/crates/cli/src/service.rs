//! HTTP service behind the annotation UI.
//!
//! Annotations live on disk and are re-read on every GET, so a restarted
//! service answers exactly as before. Each image carries a write counter in
//! a `<id>.version` sidecar; a PUT must quote the current counter or it is
//! refused with 409. Writes to one image are serialized; different images
//! proceed in parallel.
//!
//! Documents exchanged over HTTP are annotation files whose `version` field
//! holds that counter in place of the schema version string.
//!
//! Label times come from the session events the UI posts, never from the
//! client's own `label_time_ms`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scribtext_core::annotation::{validate, ImageAnnotation, FORMAT_VERSION};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commands::cost_project;
use crate::layout::{write_atomic, ImageEntry, ProjectLayout};

#[derive(Debug)]
pub enum ApiError {
    NotFound(String),
    BadRequest(String),
    Conflict { current_version: u64 },
    Unprocessable { message: String, violations: Vec<Value> },
    Internal(String),
}

impl ApiError {
    fn unprocessable(message: impl Into<String>) -> Self {
        Self::Unprocessable {
            message: message.into(),
            violations: Vec::new(),
        }
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        Self::Internal(format!("{e:#}"))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::NotFound(m) => (StatusCode::NOT_FOUND, json!({ "error": m })),
            ApiError::BadRequest(m) => (StatusCode::BAD_REQUEST, json!({ "error": m })),
            ApiError::Conflict { current_version } => (
                StatusCode::CONFLICT,
                json!({ "error": "version conflict", "current_version": current_version }),
            ),
            ApiError::Unprocessable { message, violations } => (
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": message, "violations": violations }),
            ),
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({ "error": m })),
        };
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Start,
    Point,
    Finish,
    Discard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub image_id: String,
    pub instance_id: u64,
    pub event: EventKind,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Timing {
    open_since: Option<u64>,
    last: u64,
    label_time_ms: Option<u64>,
}

impl Timing {
    fn apply(&mut self, ev: &SessionEvent) -> Result<(), String> {
        if ev.timestamp_ms < self.last {
            return Err(format!(
                "instance {}: timestamp {} precedes {}",
                ev.instance_id, ev.timestamp_ms, self.last
            ));
        }
        match (ev.event, self.open_since) {
            (EventKind::Start, None) => self.open_since = Some(ev.timestamp_ms),
            (EventKind::Start, Some(_)) => return Err(format!("instance {}: already started", ev.instance_id)),
            (EventKind::Point, Some(_)) => {}
            (EventKind::Finish, Some(start)) => {
                self.label_time_ms = Some(ev.timestamp_ms - start);
                self.open_since = None;
            }
            (EventKind::Discard, Some(_)) => {
                self.label_time_ms = None;
                self.open_since = None;
            }
            (kind, None) => return Err(format!("instance {}: {kind:?} before start", ev.instance_id)),
        }
        self.last = ev.timestamp_ms;
        Ok(())
    }
}

pub struct AppState {
    layout: ProjectLayout,
    images: Vec<ImageEntry>,
    locks: HashMap<String, Arc<tokio::sync::Mutex<()>>>,
    timings: Mutex<HashMap<(String, u64), Timing>>,
}

impl AppState {
    /// Loads the image manifest; the list of images is fixed from then on.
    pub fn load(layout: ProjectLayout) -> anyhow::Result<Self> {
        let images = layout.read_manifest()?;
        let locks = images
            .iter()
            .map(|e| (e.id.clone(), Arc::new(tokio::sync::Mutex::new(()))))
            .collect();
        Ok(Self {
            layout,
            images,
            locks,
            timings: Mutex::new(HashMap::new()),
        })
    }

    fn entry(&self, id: &str) -> ApiResult<&ImageEntry> {
        self.images
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| ApiError::NotFound(format!("unknown image {id:?}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/images", get(list_images))
        .route("/api/images/{id}/file", get(image_file))
        .route("/api/images/{id}/annotation", get(get_annotation).put(put_annotation))
        .route("/api/images/{id}/events", post(post_events))
        .route("/api/metrics/cost", get(cost))
        .with_state(state)
}

pub async fn serve(layout: ProjectLayout, host: &str, port: u16) -> anyhow::Result<()> {
    let state = Arc::new(AppState::load(layout)?);
    let listener = tokio::net::TcpListener::bind((host, port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
}

fn read_version(layout: &ProjectLayout, id: &str) -> anyhow::Result<u64> {
    match std::fs::read_to_string(layout.version_path(id)) {
        Ok(text) => Ok(text.trim().parse()?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
        Err(e) => Err(e.into()),
    }
}

fn read_stored(layout: &ProjectLayout, id: &str) -> anyhow::Result<Option<ImageAnnotation>> {
    let path = layout.annotation_path(id);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(ImageAnnotation::read(path)?))
}

async fn list_images(State(state): State<Arc<AppState>>) -> Json<Value> {
    let list: Vec<Value> = state
        .images
        .iter()
        .map(|e| {
            json!({
                "id": e.id,
                "width": e.width,
                "height": e.height,
                "annotated": state.layout.annotation_path(&e.id).is_file(),
            })
        })
        .collect();
    Json(Value::Array(list))
}

fn content_type(path: &std::path::Path) -> &'static str {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "bmp" => "image/bmp",
        "gif" => "image/gif",
        "webp" => "image/webp",
        "tif" | "tiff" => "image/tiff",
        _ => "application/octet-stream",
    }
}

async fn image_file(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let entry = state.entry(&id)?;
    let path = state
        .layout
        .image_file(entry)
        .ok_or_else(|| ApiError::NotFound(format!("no image file for {id:?}")))?;
    let bytes = tokio::fs::read(&path)
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response())
}

fn annotation_body(ann: &ImageAnnotation, version: u64) -> ApiResult<Value> {
    let text = ann.to_json().map_err(|e| ApiError::Internal(e.to_string()))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|e| ApiError::Internal(e.to_string()))?;
    value["version"] = json!(version);
    Ok(value)
}

async fn get_annotation(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let entry = state.entry(&id)?.clone();
    let st = state.clone();
    blocking(move || {
        let stored = read_stored(&st.layout, &id)?;
        let version = read_version(&st.layout, &id)?;
        let ann = stored.unwrap_or_else(|| ImageAnnotation::new(entry.id, entry.width, entry.height));
        annotation_body(&ann, version).map(Json)
    })
    .await
}

fn parse_put(body: &[u8]) -> ApiResult<(ImageAnnotation, u64)> {
    let mut value: Value =
        serde_json::from_slice(body).map_err(|e| ApiError::unprocessable(format!("body is not JSON: {e}")))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| ApiError::unprocessable("body must be a JSON object"))?;
    let version = obj
        .remove("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| ApiError::unprocessable("missing or invalid \"version\""))?;
    obj.insert("version".into(), json!(FORMAT_VERSION));
    let ann = ImageAnnotation::from_json(&value.to_string()).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    Ok((ann, version))
}

async fn put_annotation(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let entry = state.entry(&id)?.clone();
    let (mut ann, version) = parse_put(&body)?;
    if ann.image_id != entry.id || ann.width != entry.width || ann.height != entry.height {
        return Err(ApiError::unprocessable(format!(
            "annotation describes image {:?} at {}x{}, expected {:?} at {}x{}",
            ann.image_id, ann.width, ann.height, entry.id, entry.width, entry.height
        )));
    }
    let violations = validate(&ann);
    if !violations.is_empty() {
        return Err(ApiError::Unprocessable {
            message: format!("annotation has {} violation(s)", violations.len()),
            violations: violations.iter().map(|v| json!(v)).collect(),
        });
    }

    let guard = state.locks[&id].clone().lock_owned().await;
    let st = state.clone();
    blocking(move || {
        let _guard = guard;
        let current = read_version(&st.layout, &id)?;
        if version != current {
            return Err(ApiError::Conflict {
                current_version: current,
            });
        }
        // Server-measured times win; otherwise keep what was stored before.
        let stored = read_stored(&st.layout, &id)?;
        let timings = st.timings.lock().expect("timing table poisoned");
        for inst in &mut ann.instances {
            inst.label_time_ms = timings
                .get(&(id.clone(), inst.id))
                .and_then(|t| t.label_time_ms)
                .or_else(|| {
                    stored
                        .as_ref()
                        .and_then(|s| s.instances.iter().find(|i| i.id == inst.id))
                        .and_then(|i| i.label_time_ms)
                });
        }
        drop(timings);
        let next = current + 1;
        let text = ann.to_json().map_err(|e| ApiError::Internal(e.to_string()))?;
        write_atomic(&st.layout.annotation_path(&id), text.as_bytes())?;
        write_atomic(&st.layout.version_path(&id), next.to_string().as_bytes())?;
        annotation_body(&ann, next).map(Json)
    })
    .await
}

async fn post_events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    state.entry(&id)?;
    let events: Vec<SessionEvent> =
        serde_json::from_slice(&body).map_err(|e| ApiError::BadRequest(format!("invalid event list: {e}")))?;
    if let Some(ev) = events.iter().find(|e| e.image_id != id) {
        return Err(ApiError::BadRequest(format!(
            "event for image {:?} posted to {id:?}",
            ev.image_id
        )));
    }
    let mut timings = state.timings.lock().expect("timing table poisoned");
    // Apply to a scratch copy so a bad batch changes nothing.
    let mut touched: HashMap<u64, Timing> = HashMap::new();
    for ev in &events {
        let t = touched
            .entry(ev.instance_id)
            .or_insert_with(|| timings.get(&(id.clone(), ev.instance_id)).copied().unwrap_or_default());
        t.apply(ev).map_err(ApiError::BadRequest)?;
    }
    let mut recorded: Vec<Value> = Vec::new();
    for (instance, t) in touched {
        if let Some(ms) = t.label_time_ms {
            recorded.push(json!({ "instance_id": instance, "label_time_ms": ms }));
        }
        timings.insert((id.clone(), instance), t);
    }
    recorded.sort_by_key(|v| v["instance_id"].as_u64());
    Ok(Json(json!({ "accepted": events.len(), "label_times": recorded })))
}

async fn cost(State(state): State<Arc<AppState>>) -> ApiResult<Json<Value>> {
    let st = state.clone();
    blocking(move || {
        let report = cost_project(&st.layout)?;
        Ok(Json(json!(report)))
    })
    .await
}
