//! JSON HTTP API over the durable per-user state.
//!
//! | route | |
//! |---|---|
//! | `POST /events` | append one wire-format event |
//! | `POST /users/{id}/suggest` | suggestion plus the knowledge used |
//! | `GET /users/{id}/entities?k=30` | most frequent entities |
//! | `GET /users/{id}/summary` | interest summary |
//! | `DELETE /users/{id}/entities/{entity}` | forget an entity |
//!
//! Errors are `{"code", "message", "detail"}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use klamp_core::retrieval::Strategy;
use klamp_core::store::{top_k_entities, EntityKnowledgeStore, MemoryStream};
use klamp_core::suggest::{summarize_user, Variant};
use klamp_core::{EntityId, Timestamp, UserId};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::io::{WirePage, WireRecord};
use crate::persist::{StateDir, UserState};
use crate::pipeline::{Pipeline, SuggestInput};

pub const DEFAULT_TOP_K: usize = 30;

pub struct AppState {
    pipeline: Pipeline,
    dir: StateDir,
    snapshot_every: usize,
    users: Mutex<HashMap<UserId, Arc<Mutex<UserState>>>>,
}

impl AppState {
    /// Opens the state directory and replays every user found in it.
    pub fn open(
        pipeline: Pipeline,
        dir: StateDir,
        snapshot_every: usize,
    ) -> crate::Result<Arc<Self>> {
        let mut users = HashMap::new();
        for user in dir.users()? {
            let state = dir.load_user(&user, &pipeline.linker)?;
            users.insert(user, Arc::new(Mutex::new(state)));
        }
        Ok(Arc::new(AppState {
            pipeline,
            dir,
            snapshot_every: snapshot_every.max(1),
            users: Mutex::new(users),
        }))
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn user(&self, user: &UserId) -> Option<Arc<Mutex<UserState>>> {
        self.users.lock().expect("user map").get(user).cloned()
    }

    fn user_or_create(&self, user: &UserId) -> crate::Result<Arc<Mutex<UserState>>> {
        let mut map = self.users.lock().expect("user map");
        if let Some(s) = map.get(user) {
            return Ok(s.clone());
        }
        let state = Arc::new(Mutex::new(self.dir.load_user(user, &self.pipeline.linker)?));
        map.insert(user.clone(), state.clone());
        Ok(state)
    }

    /// Snapshot of one user's store, if the user is known.
    pub fn store_of(&self, user: &UserId) -> Option<EntityKnowledgeStore> {
        self.user(user)
            .map(|s| s.lock().expect("user state").store.clone())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
    detail: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn unknown_user(user: &UserId) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_user",
            format!("no state for user {user}"),
        )
    }
}

impl From<klamp_core::Error> for ApiError {
    fn from(e: klamp_core::Error) -> Self {
        use klamp_core::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidEntity(_) | E::InvalidInput(_) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_input", message)
            }
            E::MissingKnowledge { variant, needed } => ApiError {
                detail: json!({ "variant": variant, "needed": needed }),
                ..Self::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "missing_knowledge",
                    message,
                )
            },
            E::EmptyStore => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_store", message),
            E::BackendUnavailable {
                attempts,
                retry_after,
                ..
            } => ApiError {
                detail: json!({ "attempts": attempts, "retry_after": retry_after }),
                ..Self::new(StatusCode::BAD_GATEWAY, "backend_unavailable", message)
            },
            E::SearchFailure(_) => Self::new(StatusCode::BAD_GATEWAY, "search_failure", message),
            E::ParseFailure { raw_output } => ApiError {
                detail: json!({ "raw_output": raw_output }),
                ..Self::new(StatusCode::FAILED_DEPENDENCY, "parse_failure", message)
            },
        }
    }
}

impl From<crate::Error> for ApiError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Core(c) => c.into(),
            other => Self::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "storage_failure",
                other.to_string(),
            ),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "code": self.code, "message": self.message, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
}

fn user_id(raw: String) -> ApiResult<UserId> {
    UserId::new(raw).map_err(|e| ApiError::bad_request(e.to_string()))
}

fn now_seconds() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as Timestamp)
}

async fn post_event(State(app): State<Arc<AppState>>, body: Bytes) -> ApiResult<Json<Value>> {
    let wire: WireRecord =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let record = wire
        .to_record()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    blocking(move || {
        let state = app.user_or_create(&record.user)?;
        let mut st = state.lock().expect("user state");
        st.record_event(record, &app.pipeline.linker)?;
        st.snapshot_if_due(app.snapshot_every)?;
        Ok(Json(json!({ "accepted": true })))
    })
    .await
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestRequest {
    pub query: String,
    #[serde(default)]
    pub page: Option<WirePage>,
    #[serde(default)]
    pub session_history: Vec<String>,
    pub variant: Variant,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
    /// Reference time for lapse checks; defaults to the wall clock.
    #[serde(default)]
    pub now: Option<Timestamp>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_strategy() -> Strategy {
    Strategy::Combined
}

async fn suggest(
    State(app): State<Arc<AppState>>,
    Path(user): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let user = user_id(user)?;
    let req: SuggestRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let page = req
        .page
        .as_ref()
        .map(WirePage::to_page)
        .transpose()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let input = SuggestInput {
        query: req.query,
        page,
        session_history: req.session_history,
        variant: req.variant,
        strategy: req.strategy,
        now: req.now.unwrap_or_else(now_seconds),
        seed: req.seed.unwrap_or(app.pipeline.retrieval.rng_seed),
    };
    blocking(move || {
        let prepared = match app.user(&user) {
            Some(state) => {
                let st = state.lock().expect("user state");
                app.pipeline.prepare(&st.stream, &st.store, &input)?
            }
            None => app.pipeline.prepare(
                &MemoryStream::new(user.clone()),
                &EntityKnowledgeStore::new(user.clone()),
                &input,
            )?,
        };
        let outcome = app.pipeline.complete(prepared)?;
        Ok(Json(
            serde_json::to_value(outcome).expect("outcome serializes"),
        ))
    })
    .await
}

#[derive(Debug, Deserialize)]
struct TopK {
    k: Option<usize>,
}

async fn entities(
    State(app): State<Arc<AppState>>,
    Path(user): Path<String>,
    Query(q): Query<TopK>,
) -> ApiResult<Json<Value>> {
    let user = user_id(user)?;
    let store = app
        .store_of(&user)
        .ok_or_else(|| ApiError::unknown_user(&user))?;
    let top: Vec<Value> = top_k_entities(&store, q.k.unwrap_or(DEFAULT_TOP_K))
        .into_iter()
        .map(|(e, count)| {
            let s = store.get(&e).expect("listed entity present");
            json!({ "entity": e, "count": count, "first_seen": s.first_seen, "last_seen": s.last_seen })
        })
        .collect();
    Ok(Json(json!({ "user": user, "entities": top })))
}

async fn summary(
    State(app): State<Arc<AppState>>,
    Path(user): Path<String>,
) -> ApiResult<Json<Value>> {
    let user = user_id(user)?;
    let store = app
        .store_of(&user)
        .ok_or_else(|| ApiError::unknown_user(&user))?;
    blocking(move || {
        let p = &app.pipeline;
        let s = summarize_user(&store, p.chat.as_ref(), &p.generation, &p.prompts.templates)?;
        Ok(Json(serde_json::to_value(s).expect("summary serializes")))
    })
    .await
}

async fn forget(
    State(app): State<Arc<AppState>>,
    Path((user, entity)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let user = user_id(user)?;
    let entity = EntityId::new(&entity).map_err(|e| ApiError::bad_request(e.to_string()))?;
    blocking(move || {
        let removed = match app.user(&user) {
            Some(state) => state.lock().expect("user state").forget(&entity)?,
            None => false,
        };
        Ok(Json(json!({ "removed": removed })))
    })
    .await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/events", post(post_event))
        .route("/users/{id}/suggest", post(suggest))
        .route("/users/{id}/entities", get(entities))
        .route("/users/{id}/summary", get(summary))
        .route("/users/{id}/entities/{entity}", delete(forget))
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, addr: &str) -> crate::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| crate::Error::Config(format!("cannot listen on {addr}: {e}")))?;
    eprintln!(
        "listening on {}",
        listener
            .local_addr()
            .map_or_else(|_| addr.to_string(), |a| a.to_string())
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| crate::Error::Config(e.to_string()))
}
