//! HTTP routes. Handlers validate the payload, then hand off to the
//! blocking service on the blocking pool.

use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use futures::stream::Stream;
use lectern::plan::{PlanError, QueueEdit};
use lectern::teach::{EventEnvelope, Session, TeachError, UserEvent};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast::error::RecvError;
use tokio::sync::mpsc;

use crate::schema::Schema;
use crate::service::{LectureService, ServiceError, StreamItem};

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

fn status_of(e: &ServiceError) -> (StatusCode, &'static str) {
    use ServiceError as S;
    match e {
        S::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
        S::Conflict(_) => (StatusCode::CONFLICT, "conflict"),
        S::StaleRevision { .. } => (StatusCode::CONFLICT, "stale_revision"),
        S::Invalid(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid"),
        S::Ingest(_) => (StatusCode::UNPROCESSABLE_ENTITY, "malformed_archive"),
        S::Plan(PlanError::InvariantViolation(_)) => (StatusCode::UNPROCESSABLE_ENTITY, "invariant_violation"),
        S::Plan(PlanError::BadPosition { .. }) => (StatusCode::UNPROCESSABLE_ENTITY, "bad_position"),
        S::Plan(PlanError::Gateway(_)) | S::Pipeline(_) => (StatusCode::BAD_GATEWAY, "planning_failed"),
        S::Teach(TeachError::UnknownSession(_)) => (StatusCode::NOT_FOUND, "unknown_session"),
        S::Teach(TeachError::NotAwaitingInput(_)) => (StatusCode::CONFLICT, "not_awaiting_input"),
        S::Teach(TeachError::BadIndex { .. }) => (StatusCode::UNPROCESSABLE_ENTITY, "bad_index"),
        S::Teach(TeachError::NoQueue(_) | TeachError::UnsupportedAction(_)) => {
            (StatusCode::UNPROCESSABLE_ENTITY, "unsupported_queue")
        }
        S::Teach(TeachError::Gateway(_)) => (StatusCode::BAD_GATEWAY, "gateway"),
        S::Plan(_) => (StatusCode::UNPROCESSABLE_ENTITY, "plan"),
        S::Teach(_) | S::Store(_) | S::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal"),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = status_of(&self.0);
        if status.is_server_error() {
            tracing::error!(error = %self.0, "request failed");
        }
        (status, Json(json!({ "error": code, "message": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static) -> ApiResult<T> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(ServiceError::Internal(format!("task panicked: {e}")))),
    }
}

/// Parses `body` after checking it against `schema`.
fn payload<T: serde::de::DeserializeOwned>(schema: Schema, body: Value) -> ApiResult<T> {
    schema.validate(&body).map_err(|e| ApiError(ServiceError::Invalid(e)))?;
    serde_json::from_value(body).map_err(|e| ApiError(ServiceError::Invalid(e.to_string())))
}

#[derive(Clone)]
struct AppState {
    svc: Arc<LectureService>,
    token: Option<Arc<str>>,
}

pub fn router(svc: Arc<LectureService>, token: Option<String>) -> Router {
    let state = AppState { svc, token: token.map(Into::into) };
    Router::new()
        .route("/lectures", post(upload).get(list_lectures))
        .route("/lectures/{id}", get(get_lecture))
        .route("/lectures/{id}/plan", post(plan))
        .route("/lectures/{id}/agenda", get(agenda))
        .route("/lectures/{id}/actions", get(actions).patch(update_actions))
        .route("/lectures/{id}/publish", post(publish))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/sessions/{id}/stream", get(stream))
        .route("/sessions/{id}/history", get(history))
        .layer(middleware::from_fn_with_state(state.clone(), auth))
        .with_state(state)
}

async fn auth(State(st): State<AppState>, req: Request, next: Next) -> Response {
    if let Some(token) = &st.token {
        let given = req.headers().get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer "));
        if given != Some(token.as_ref()) {
            return (StatusCode::UNAUTHORIZED, Json(json!({ "error": "unauthorized", "message": "missing or wrong bearer token" })))
                .into_response();
        }
    }
    next.run(req).await
}

#[derive(Deserialize)]
struct UploadBody {
    title: String,
    /// Base64 of the slide archive.
    archive: String,
}

async fn upload(State(st): State<AppState>, Json(body): Json<UploadBody>) -> ApiResult<impl IntoResponse> {
    let bytes = STANDARD
        .decode(body.archive.trim())
        .map_err(|e| ApiError(ServiceError::Invalid(format!("archive is not base64: {e}"))))?;
    let rec = blocking(move || st.svc.upload(&body.title, &bytes)).await?;
    Ok((StatusCode::CREATED, Json(rec)))
}

async fn list_lectures(State(st): State<AppState>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.lectures()).await?))
}

async fn get_lecture(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.lecture(&id)).await?))
}

async fn plan(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let rec = blocking(move || st.svc.generate_plan(&id)).await?;
    Ok((StatusCode::ACCEPTED, Json(rec)))
}

async fn agenda(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.agenda(&id)).await?))
}

async fn actions(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.actions(&id)).await?))
}

#[derive(Deserialize)]
struct EditsBody {
    revision: u64,
    edits: Vec<QueueEdit>,
}

async fn update_actions(State(st): State<AppState>, Path(id): Path<String>, Json(body): Json<Value>) -> ApiResult<impl IntoResponse> {
    let body: EditsBody = payload(Schema::QueueEdits, body)?;
    Ok(Json(blocking(move || st.svc.update_actions(&id, body.revision, &body.edits)).await?))
}

async fn publish(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.publish(&id)).await?))
}

#[derive(Deserialize)]
struct NewSession {
    lecture_id: String,
    #[serde(default = "anonymous")]
    user_id: String,
}

fn anonymous() -> String {
    "anonymous".into()
}

async fn create_session(State(st): State<AppState>, Json(body): Json<NewSession>) -> ApiResult<impl IntoResponse> {
    let summary = blocking(move || st.svc.create_session(&body.lecture_id, &body.user_id)).await?;
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.summary(&id)).await?))
}

async fn post_event(State(st): State<AppState>, Path(id): Path<String>, Json(body): Json<Value>) -> ApiResult<impl IntoResponse> {
    let event: UserEvent = payload(Schema::UserEvent, body)?;
    let added = blocking(move || st.svc.post_user_event(&id, event)).await?;
    Ok((StatusCode::ACCEPTED, Json(added)))
}

async fn history(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || st.svc.history(&id)).await?))
}

#[derive(Deserialize)]
struct StreamQuery {
    /// Last seq the client has; the stream starts after it.
    from: Option<u64>,
}

fn sse_event(env: &EventEnvelope) -> Event {
    Event::default()
        .id(env.seq.to_string())
        .event("utterance")
        .data(serde_json::to_string(env).expect("envelope serializes"))
}

/// Replays everything after `from` (or the `Last-Event-ID` header), then
/// follows live events until the session completes.
async fn stream(
    State(st): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<StreamQuery>,
    headers: HeaderMap,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let last_event_id = headers.get("last-event-id").and_then(|v| v.to_str().ok()).and_then(|v| v.trim().parse().ok());
    let from = last_event_id.or(q.from).unwrap_or(0);
    // subscribe before reading the session so nothing falls in between
    let mut rx = st.svc.subscribe(&id);
    let svc = st.svc.clone();
    let sid = id.clone();
    let session = blocking(move || svc.session(&sid)).await?;

    let (tx, out) = mpsc::channel::<Event>(64);
    tokio::spawn(async move {
        let mut last = from;
        if !send_after(&tx, &session, &mut last).await || session.is_complete() {
            return;
        }
        loop {
            let caught_up = match rx.recv().await {
                Ok(StreamItem::Event(env)) if env.seq == last + 1 => {
                    last = env.seq;
                    tx.send(sse_event(&env)).await.is_ok()
                }
                Ok(StreamItem::Event(env)) if env.seq <= last => true,
                // a gap or a lagging receiver: fill in from the store
                Ok(StreamItem::Event(_)) | Err(RecvError::Lagged(_)) => reload(&st.svc, &id, &tx, &mut last).await,
                Ok(StreamItem::End) => {
                    reload(&st.svc, &id, &tx, &mut last).await;
                    return;
                }
                Err(RecvError::Closed) => return,
            };
            if !caught_up {
                return;
            }
        }
    });
    let stream = futures::stream::unfold(out, |mut out| async move { out.recv().await.map(|ev| (Ok(ev), out)) });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

/// Sends the session's envelopes after `last`. False once the client is gone.
async fn send_after(tx: &mpsc::Sender<Event>, session: &Session, last: &mut u64) -> bool {
    for env in session.envelopes_from(*last) {
        *last = env.seq;
        if tx.send(sse_event(&env)).await.is_err() {
            return false;
        }
    }
    true
}

async fn reload(svc: &Arc<LectureService>, id: &str, tx: &mpsc::Sender<Event>, last: &mut u64) -> bool {
    let svc = svc.clone();
    let sid = id.to_string();
    match tokio::task::spawn_blocking(move || svc.session(&sid)).await {
        Ok(Ok(session)) => send_after(tx, &session, last).await,
        _ => false,
    }
}
