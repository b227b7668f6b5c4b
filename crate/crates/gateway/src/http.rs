//! HTTP endpoints over a [`SessionHandle`].
//!
//! Mutations answer `202 Accepted` because they take effect at the next
//! tick; protocol violations answer `409 Conflict`.

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use clarify_core::bt::{parse_tree, render_dot, render_json};
use clarify_core::disambiguation::Answer;
use clarify_core::executor::{ExecError, RunConfig, ScriptedAnswer, Scenario, SceneEdit};
use clarify_core::world::{validate_scene, SceneObject};
use clarify_core::Vec3;
use futures::stream::{self, Stream};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::session::{SessionError, SessionHandle, Snapshot};

pub fn router(session: SessionHandle) -> Router {
    Router::new()
        .route("/state", get(state))
        .route("/events", get(events))
        .route("/run", post(start_run))
        .route("/tree", get(tree))
        .route("/dialogue/answer", post(answer))
        .route("/scene/objects", post(add_object))
        .route("/scene/objects/{id}", patch(move_object).delete(remove_object))
        .with_state(session)
}

struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::Exec(ExecError::UnknownObject(_)) => StatusCode::NOT_FOUND,
            SessionError::Exec(ExecError::World(_) | ExecError::Tree(_) | ExecError::Attach(_) | ExecError::Config(_)) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            SessionError::Stopped => StatusCode::SERVICE_UNAVAILABLE,
            _ => StatusCode::CONFLICT,
        };
        ApiError(status, e.to_string())
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

fn accepted(body: Value) -> Response {
    (StatusCode::ACCEPTED, Json(body)).into_response()
}

async fn state(State(s): State<SessionHandle>) -> Result<Response, ApiError> {
    let snap = s.snapshot();
    let doc = snap.state.as_ref().ok_or(ApiError(StatusCode::NOT_FOUND, "no run has been started".into()))?;
    Ok(Json(doc).into_response())
}

#[derive(Deserialize)]
struct TreeQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn tree(State(s): State<SessionHandle>, Query(q): Query<TreeQuery>) -> Result<Response, ApiError> {
    let snap = s.snapshot();
    let tree = snap.tree.as_ref().ok_or(ApiError(StatusCode::NOT_FOUND, "no run has been started".into()))?;
    match q.format.as_deref().unwrap_or("dot") {
        "dot" => Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], render_dot(tree)).into_response()),
        "json" => Ok(([(header::CONTENT_TYPE, "application/json")], render_json(tree)).into_response()),
        other => Err(bad_request(format!("unknown format `{other}`; use dot or json"))),
    }
}

/// JSON lines for every event of the current run, live until it finishes.
async fn events(State(s): State<SessionHandle>) -> Response {
    let rx = s.subscribe();
    let run = rx.borrow().run;
    let lines = event_lines(rx, run);
    ([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(lines)).into_response()
}

fn event_lines(
    rx: tokio::sync::watch::Receiver<Arc<Snapshot>>,
    run: u64,
) -> impl Stream<Item = Result<Bytes, Infallible>> {
    // Follows `run`, or the first run started if none was running yet.
    stream::unfold((rx, run, 0usize, false), |(mut rx, mut run, sent, done)| async move {
        if done {
            return None;
        }
        loop {
            let snap = rx.borrow_and_update().clone();
            if run == 0 {
                run = snap.run;
            }
            if snap.run != run {
                return None;
            }
            if snap.log.len() > sent {
                let mut chunk = String::new();
                for e in &snap.log[sent..] {
                    chunk.push_str(&serde_json::to_string(e).expect("events serialize"));
                    chunk.push('\n');
                }
                let finished = snap.is_finished();
                return Some((Ok(Bytes::from(chunk)), (rx, run, snap.log.len(), finished)));
            }
            if snap.is_finished() || rx.changed().await.is_err() {
                return None;
            }
        }
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunRequest {
    tree: Value,
    scene: Vec<SceneObject>,
    #[serde(default)]
    answers: Option<Vec<ScriptedAnswer>>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    max_ticks: Option<u64>,
    #[serde(default)]
    include_disambiguation: Option<bool>,
    #[serde(default)]
    real_time: Option<bool>,
}

async fn start_run(State(s): State<SessionHandle>, Json(req): Json<RunRequest>) -> Result<Response, ApiError> {
    let tree = parse_tree(&req.tree.to_string()).map_err(|e| bad_request(e.to_string()))?;
    validate_scene(&req.scene).map_err(|e| bad_request(e.to_string()))?;
    let mut run = RunConfig::default();
    if let Some(seed) = req.seed {
        run.seed = seed;
    }
    if let Some(max) = req.max_ticks {
        run.max_ticks = max;
    }
    if let Some(include) = req.include_disambiguation {
        run.include_disambiguation = include;
    }
    if req.real_time == Some(true) {
        run.time_mode = clarify_core::executor::TimeMode::Real;
    }
    let scenario = Scenario {
        tree,
        scene: req.scene,
        answers: req.answers,
    };
    s.start(scenario, run).await?;
    Ok(accepted(json!({ "run": s.snapshot().run })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerRequest {
    answer: Answer,
}

async fn answer(State(s): State<SessionHandle>, Json(req): Json<AnswerRequest>) -> Result<Response, ApiError> {
    s.answer(req.answer).await?;
    Ok(accepted(json!({ "answer": req.answer })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AddRequest {
    category: String,
    position: Vec3,
    footprint_radius: f64,
    #[serde(default)]
    id: Option<String>,
}

async fn add_object(State(s): State<SessionHandle>, Json(req): Json<AddRequest>) -> Result<Response, ApiError> {
    let object = SceneObject::new(req.id.as_deref().unwrap_or(""), &req.category, req.position, req.footprint_radius);
    let id = s.edit(SceneEdit::Add { object }).await?;
    Ok(accepted(json!({ "id": id })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    position: Vec3,
}

async fn move_object(
    State(s): State<SessionHandle>,
    Path(id): Path<String>,
    Json(req): Json<MoveRequest>,
) -> Result<Response, ApiError> {
    let id = s
        .edit(SceneEdit::Move {
            id,
            position: req.position,
        })
        .await?;
    Ok(accepted(json!({ "id": id })))
}

async fn remove_object(State(s): State<SessionHandle>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let id = s.edit(SceneEdit::Remove { id }).await?;
    Ok(accepted(json!({ "id": id })))
}
