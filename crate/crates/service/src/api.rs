//! Routes and handlers. See `API.md` at the crate root for the wire format.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use alter_core::export::{JobRecord, RevisionRecord};
use alter_core::feedback::{salience, FeedbackRegistry, ModelSet, SalienceVector};
use alter_core::recommend::{lm_predict, similar_words, Recommendation};
use alter_core::{EditOp, FeedbackSnapshot, OpKind, Sentence, Source};
use alter_store::{JobEvent, JobFilter, Role, Store, Task, User};

use crate::error::ApiError;

struct Inner {
    store: Store,
    models: ModelSet,
    providers: Vec<String>,
    k: usize,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    /// `providers` is used for jobs whose task names none; `k` is the default
    /// recommendation count.
    pub fn new(store: Store, models: ModelSet, providers: Vec<String>, k: usize) -> Self {
        AppState(Arc::new(Inner {
            store,
            models,
            providers,
            k,
        }))
    }

    pub fn store(&self) -> &Store {
        &self.0.store
    }

    fn registry(&self, job: &JobRecord) -> Result<FeedbackRegistry, ApiError> {
        let task = self.0.store.task(&job.header.task_id).ok();
        let (names, target) = match &task {
            Some(t) if !t.providers.is_empty() => (&t.providers, t.target_label.as_deref()),
            Some(t) => (&self.0.providers, t.target_label.as_deref()),
            None => (&self.0.providers, None),
        };
        FeedbackRegistry::from_names(names, &self.0.models, target)
            .map_err(|e| ApiError::internal(format!("feedback providers: {e}")))
    }

    fn salience(&self, sentence: &Sentence, target: Option<&str>) -> Result<Option<SalienceVector>, ApiError> {
        match &self.0.models.classifier {
            Some(clf) if !sentence.is_empty() => Ok(Some(salience(sentence, clf, target)?)),
            _ => Ok(None),
        }
    }

    fn job_view(&self, job: &JobRecord, target: Option<&str>) -> Result<JobView, ApiError> {
        let history = job.history();
        Ok(JobView {
            id: job.header.job_id.clone(),
            task_id: job.header.task_id.clone(),
            sentence_index: job.header.sentence_index,
            assignee: job.header.assignee.clone(),
            status: job.status(),
            original_text: job.header.original_text.clone(),
            original: SentenceView::of(history.original()),
            current: SentenceView::of(history.current()),
            last_index: history.last_index(),
            revisions: history.revisions().iter().map(RevisionRecord::from).collect(),
            salience: self.salience(history.current(), target)?,
        })
    }

    fn conflict(&self, job: &JobRecord, parent: i64) -> ApiError {
        let mut err = ApiError::new(
            StatusCode::CONFLICT,
            "stale_parent",
            format!(
                "parent_revision_index {parent} is stale; the latest revision is {}",
                job.history().last_index()
            ),
        );
        err.current = self.job_view(job, None).ok().and_then(|v| serde_json::to_value(v).ok());
        err
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/jobs", get(list_jobs))
        .route("/jobs/{id}", get(get_job))
        .route("/jobs/{id}/ops", post(post_op))
        .route("/jobs/{id}/revert", post(post_revert))
        .route("/jobs/{id}/recommend", get(recommend))
        .route("/jobs/{id}/complete", post(complete))
        .route("/jobs/{id}/reopen", post(reopen))
        .route("/users", post(create_user))
        .route("/tasks", post(create_task))
        .route("/tasks/{id}/assign", post(assign))
        .with_state(state)
}

/// The authenticated user behind the request's bearer token.
pub struct Caller(pub User);

impl FromRequestParts<AppState> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let value = parts
            .headers
            .get(header::AUTHORIZATION)
            .ok_or_else(|| ApiError::unauthorized("missing bearer token"))?;
        let token = value
            .to_str()
            .ok()
            .and_then(|v| v.strip_prefix("Bearer "))
            .map(str::trim)
            .ok_or_else(|| ApiError::unauthorized("malformed Authorization header"))?;
        state
            .store()
            .user_by_token(token)
            .map(Caller)
            .ok_or_else(|| ApiError::unauthorized("unknown token"))
    }
}

impl Caller {
    fn is_admin(&self) -> bool {
        self.0.role == Role::Administrator
    }

    fn require_admin(&self) -> Result<(), ApiError> {
        if self.is_admin() {
            Ok(())
        } else {
            Err(ApiError::forbidden("administrator token required"))
        }
    }

    fn may_access(&self, job: &JobRecord) -> Result<(), ApiError> {
        if self.is_admin() || self.0.id == job.header.assignee {
            Ok(())
        } else {
            Err(ApiError::forbidden(format!(
                "job {} is not assigned to you",
                job.header.job_id
            )))
        }
    }
}

/// Runs blocking store work off the async executor.
async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenView {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SentenceView {
    pub text: String,
    pub tokens: Vec<TokenView>,
}

impl SentenceView {
    fn of(s: &Sentence) -> Self {
        SentenceView {
            text: s.text(),
            tokens: s
                .words()
                .enumerate()
                .map(|(index, w)| TokenView {
                    index,
                    text: w.to_string(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub task_id: String,
    pub sentence_index: usize,
    pub assignee: String,
    pub status: alter_core::JobStatus,
    pub original_text: String,
    pub original: SentenceView,
    pub current: SentenceView,
    pub last_index: i64,
    pub revisions: Vec<RevisionRecord>,
    pub salience: Option<SalienceVector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobSummary {
    pub id: String,
    pub task_id: String,
    pub sentence_index: usize,
    pub original_text: String,
    pub current_text: String,
    pub status: alter_core::JobStatus,
    pub revisions: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevisionResponse {
    pub revision: RevisionRecord,
    pub last_index: i64,
    pub current: SentenceView,
    pub feedback: FeedbackSnapshot,
    pub salience: Option<SalienceVector>,
}

async fn health() -> Json<Value> {
    Json(serde_json::json!({"status": "ok"}))
}

#[derive(Deserialize)]
struct ListQuery {
    user: Option<String>,
}

async fn list_jobs(
    State(state): State<AppState>,
    caller: Caller,
    query: Result<Query<ListQuery>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let Query(query) = query?;
    let user = query.user.unwrap_or_else(|| caller.0.id.clone());
    if user != caller.0.id && !caller.is_admin() {
        return Err(ApiError::forbidden("only administrators may list other users' jobs"));
    }
    let jobs = blocking(move || {
        state.store().user(&user)?;
        let summaries: Vec<JobSummary> = state
            .store()
            .jobs(&JobFilter::user(&user))?
            .iter()
            .map(|j| JobSummary {
                id: j.header.job_id.clone(),
                task_id: j.header.task_id.clone(),
                sentence_index: j.header.sentence_index,
                original_text: j.header.original_text.clone(),
                current_text: j.history().current().text(),
                status: j.status(),
                revisions: j.history().len(),
            })
            .collect();
        Ok(serde_json::json!({"user": user, "jobs": summaries}))
    })
    .await?;
    Ok(Json(jobs))
}

#[derive(Deserialize)]
struct JobQuery {
    target: Option<String>,
}

async fn get_job(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    query: Result<Query<JobQuery>, QueryRejection>,
) -> Result<Json<JobView>, ApiError> {
    let Query(query) = query?;
    let view = blocking(move || {
        let job = state.store().load_job(&id)?;
        caller.may_access(&job)?;
        state.job_view(&job, query.target.as_deref())
    })
    .await?;
    Ok(Json(view))
}

#[derive(Deserialize)]
struct OpRequest {
    op: OpKind,
    #[serde(default = "typed")]
    source: Source,
    parent_revision_index: i64,
}

fn typed() -> Source {
    Source::Typed
}

#[derive(Deserialize)]
struct RevertRequest {
    target_revision_index: i64,
    parent_revision_index: i64,
}

/// Appends `op` if `parent` is still the latest revision, scoring the result
/// while the job is locked.
async fn append_revision(
    state: AppState,
    caller: Caller,
    id: String,
    op: EditOp,
    parent: i64,
) -> Result<(StatusCode, Json<RevisionResponse>), ApiError> {
    let response = blocking(move || {
        let check = state.store().load_job(&id)?;
        caller.may_access(&check)?;
        let registry = state.registry(&check)?;
        let job = state.store().update_job(&id, |job| {
            if job.history().last_index() != parent {
                return Err(state.conflict(job, parent));
            }
            let result = job.history().preview(&op)?;
            let feedback = registry.score_all(job.history().original(), &result);
            Ok(Some(JobEvent::Revision { op, feedback }))
        })?;
        let revision = job.history().revisions().last().expect("just appended");
        Ok(RevisionResponse {
            revision: RevisionRecord::from(revision),
            last_index: job.history().last_index(),
            current: SentenceView::of(&revision.result),
            feedback: revision.feedback.clone(),
            salience: state.salience(&revision.result, None)?,
        })
    })
    .await?;
    Ok((StatusCode::CREATED, Json(response)))
}

async fn post_op(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    body: Result<Json<OpRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<RevisionResponse>), ApiError> {
    let Json(req) = body?;
    if matches!(req.op, OpKind::Revert { .. }) {
        return Err(ApiError::unprocessable("use /jobs/{id}/revert to roll back"));
    }
    if req.source == Source::System {
        return Err(ApiError::unprocessable("source \"system\" is reserved for rollbacks"));
    }
    append_revision(
        state,
        caller,
        id,
        req.op.with_source(req.source),
        req.parent_revision_index,
    )
    .await
}

async fn post_revert(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    body: Result<Json<RevertRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<RevisionResponse>), ApiError> {
    let Json(req) = body?;
    let op = EditOp::revert(req.target_revision_index);
    append_revision(state, caller, id, op, req.parent_revision_index).await
}

#[derive(Deserialize)]
struct RecommendQuery {
    position: usize,
    kind: String,
    k: Option<usize>,
}

async fn recommend(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    query: Result<Query<RecommendQuery>, QueryRejection>,
) -> Result<Json<Value>, ApiError> {
    let Query(q) = query?;
    let recs = blocking(move || {
        let job = state.store().load_job(&id)?;
        caller.may_access(&job)?;
        let current = job.history().current();
        let k = q.k.unwrap_or(state.0.k);
        let unavailable = |what: &str| {
            ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                "model_unavailable",
                format!("no {what} configured"),
            )
        };
        let recs: Vec<Recommendation> = match q.kind.as_str() {
            "similarity" => {
                let emb = state
                    .0
                    .models
                    .embeddings
                    .as_ref()
                    .ok_or_else(|| unavailable("embeddings"))?;
                let word = current.words().nth(q.position).ok_or(alter_core::EditError::Position {
                    position: q.position,
                    len: current.len(),
                })?;
                similar_words(word, k, emb)
            }
            "lm" | "language_model" => {
                let lm = state
                    .0
                    .models
                    .lm
                    .as_ref()
                    .ok_or_else(|| unavailable("language model"))?;
                lm_predict(current, q.position, k, lm)?
            }
            other => {
                return Err(ApiError::unprocessable(format!(
                    "unknown kind {other:?}; use similarity or lm"
                )))
            }
        };
        Ok(serde_json::json!({"position": q.position, "recommendations": recs}))
    })
    .await?;
    Ok(Json(recs))
}

async fn set_status(state: AppState, caller: Caller, id: String, complete: bool) -> Result<Json<Value>, ApiError> {
    let status = blocking(move || {
        let job = state.store().load_job(&id)?;
        caller.may_access(&job)?;
        let target = if complete {
            alter_core::JobStatus::Complete
        } else {
            alter_core::JobStatus::Incomplete
        };
        let job = state.store().update_job::<ApiError, _>(&id, |job| {
            Ok((job.status() != target).then_some(if complete { JobEvent::Complete } else { JobEvent::Reopen }))
        })?;
        Ok(serde_json::json!({"id": id, "status": job.status()}))
    })
    .await?;
    Ok(Json(status))
}

async fn complete(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    set_status(state, caller, id, true).await
}

async fn reopen(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
) -> Result<Json<Value>, ApiError> {
    set_status(state, caller, id, false).await
}

#[derive(Deserialize)]
struct NewUser {
    id: String,
    name: String,
    #[serde(default = "annotator")]
    role: Role,
    token: Option<String>,
}

fn annotator() -> Role {
    Role::Annotator
}

async fn create_user(
    State(state): State<AppState>,
    caller: Caller,
    body: Result<Json<NewUser>, JsonRejection>,
) -> Result<(StatusCode, Json<User>), ApiError> {
    caller.require_admin()?;
    let Json(req) = body?;
    let user = blocking(move || Ok(state.store().create_user(&req.id, &req.name, req.role, req.token)?)).await?;
    Ok((StatusCode::CREATED, Json(user)))
}

async fn create_task(
    State(state): State<AppState>,
    caller: Caller,
    body: Result<Json<Task>, JsonRejection>,
) -> Result<(StatusCode, Json<Task>), ApiError> {
    caller.require_admin()?;
    let Json(task) = body?;
    if !task.providers.is_empty() {
        FeedbackRegistry::from_names(&task.providers, &state.0.models, task.target_label.as_deref())?;
    }
    let task = blocking(move || Ok(state.store().create_task(task)?)).await?;
    Ok((StatusCode::CREATED, Json(task)))
}

#[derive(Deserialize)]
struct AssignRequest {
    users: Vec<String>,
}

async fn assign(
    State(state): State<AppState>,
    caller: Caller,
    Path(id): Path<String>,
    body: Result<Json<AssignRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<Value>), ApiError> {
    caller.require_admin()?;
    let Json(req) = body?;
    let ids = blocking(move || {
        let headers = state.store().assign(&id, &req.users)?;
        Ok(headers.into_iter().map(|h| h.job_id).collect::<Vec<_>>())
    })
    .await?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({"jobs": ids}))))
}
