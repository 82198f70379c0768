use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::state::{write_atomically, AppState, JobStatus, QueryJob, CLASSIFIER_FILE};
use crate::dsl::{parse_with, validate, ParseOptions};
use crate::graph::{self, EdgeKind, NodeKind};
use crate::matcher::{rank_with_threshold, RankedResults};
use crate::nlp::{
    self, append_record, extract_entities, load_corpus, sentence_spans, validate_corpus, CorpusRecord,
    ExtractedEntities, Hyperparams, MAX_LABELS,
};
use crate::synth::{self, AaeConfig, SynthError};

/// Largest accepted request body.
pub const BODY_LIMIT: usize = 64 << 20;
/// Most trajectories one generate call may return.
pub const MAX_GENERATE: usize = 1_000_000;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/graph/ingest", post(ingest))
        .route("/graph/neighborhood/{id}", get(neighborhood))
        .route("/documents/classify", post(classify))
        .route("/classifier/train", post(train_classifier))
        .route("/queries", post(submit_query))
        .route("/queries/{id}", get(get_query))
        .route("/synth/train", post(synth_train))
        .route("/synth/generate", post(synth_generate))
        .route("/feedback", post(feedback))
        .fallback(|| async { StatusCode::NOT_FOUND })
        .layer(middleware::from_fn_with_state(state.clone(), require_token))
        .layer(axum::extract::DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(state)
}

/// Every route, including unknown ones, answers 401 with an empty body
/// unless the bearer token matches.
async fn require_token(
    State(state): State<AppState>,
    headers: HeaderMap,
    req: axum::extract::Request,
    next: Next,
) -> Response {
    let presented =
        headers.get(header::AUTHORIZATION).and_then(|v| v.to_str().ok()).and_then(|v| v.strip_prefix("Bearer "));
    match presented {
        Some(t) if constant_time_eq(t.as_bytes(), state.config.token.as_bytes()) => next.run(req).await,
        _ => StatusCode::UNAUTHORIZED.into_response(),
    }
}

fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl std::fmt::Display) -> Self {
        ApiError { status, body: json!({ "error": error, "message": message.to_string() }) }
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        log::error!("{e}");
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn json_body<T: serde::de::DeserializeOwned>(bytes: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidBody", e))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)
}

// ---- graph ----

#[derive(Serialize)]
struct IngestResponse {
    #[serde(flatten)]
    report: graph::IngestReport,
    graph_version: u64,
}

async fn ingest(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let text =
        String::from_utf8(body.to_vec()).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "InvalidUtf8", e))?;
    blocking(move || {
        let _file = state.graph_file.lock();
        let (report, g) = state.store.update(|g| (graph::ingest_lines(g, &text), g.clone()));
        if report.records_parsed == 0 && !report.errors.is_empty() {
            return Err(ApiError {
                status: StatusCode::BAD_REQUEST,
                body: json!({ "error": "MalformedBody", "errors": report.errors }),
            });
        }
        if report.nodes_added + report.edges_added > 0 {
            let mut buf = Vec::new();
            graph::save(&g, &mut buf).map_err(ApiError::internal)?;
            write_atomically(&state.config.graph, &buf).map_err(ApiError::internal)?;
        }
        Ok(Json(IngestResponse { report, graph_version: g.version() }).into_response())
    })
    .await?
}

#[derive(Deserialize)]
struct RadiusParam {
    #[serde(default = "one")]
    radius: u32,
}

fn one() -> u32 {
    1
}

/// A node's KNOWS-radius ball plus every node directly attached to a
/// member, with the edges touching members, as graph-file records.
async fn neighborhood(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(p): Query<RadiusParam>,
) -> ApiResult<Json<Value>> {
    let g = state.store.snapshot();
    let Some(center) = g.node(&id) else {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "UnknownNode", format!("no node {id:?}")));
    };
    let mut members = BTreeSet::from([center.id.clone()]);
    if center.kind == NodeKind::Person {
        members.extend(
            g.neighbors(&id, EdgeKind::Knows, p.radius)
                .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "InvalidRadius", e))?,
        );
    }
    let mut ids = members.clone();
    for m in &members {
        ids.extend(g.outgoing(m.as_str()).map(|e| e.dst.clone()));
        ids.extend(g.incoming(m.as_str()).map(|e| e.src.clone()));
    }
    let nodes: Vec<graph::Record> = ids.iter().filter_map(|i| g.node(i.as_str())).map(graph::Record::from).collect();
    let edges: Vec<graph::Record> = g
        .edges()
        .iter()
        .filter(|e| {
            ids.contains(&e.src) && ids.contains(&e.dst) && (members.contains(&e.src) || members.contains(&e.dst))
        })
        .map(graph::Record::from)
        .collect();
    Ok(Json(json!({ "graph_version": g.version(), "center": id, "members": members, "nodes": nodes, "edges": edges })))
}

// ---- documents ----

#[derive(Deserialize)]
struct ClassifyRequest {
    text: String,
}

#[derive(Serialize)]
struct LabelScore {
    category: String,
    probability: f64,
}

#[derive(Serialize)]
struct SentenceResult {
    text: String,
    start: usize,
    end: usize,
    labels: Vec<LabelScore>,
    entities: ExtractedEntities,
}

async fn classify(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ClassifyRequest = json_body(&body)?;
    let Some(model) = state.classifier.read().clone() else {
        return Err(ApiError::new(StatusCode::CONFLICT, "NoModelLoaded", "no classifier has been trained"));
    };
    let sentences: Vec<SentenceResult> = sentence_spans(&req.text)
        .into_iter()
        .map(|(start, end)| {
            let text = &req.text[start..end];
            let labels = model
                .categories
                .iter()
                .zip(model.probabilities(text))
                .map(|(c, p)| LabelScore { category: c.clone(), probability: p })
                .collect();
            SentenceResult {
                text: text.to_string(),
                start,
                end,
                labels,
                entities: extract_entities(text, &state.gazetteer),
            }
        })
        .collect();
    Ok(Json(json!({ "sentences": sentences })))
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ClassifierTrainRequest {
    hyperparams: Option<Hyperparams>,
    seed: u64,
}

async fn train_classifier(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ClassifierTrainRequest = if body.is_empty() { Default::default() } else { json_body(&body)? };
    blocking(move || {
        let corpus = {
            let _lock = state.corpus_file.lock();
            read_corpus(&state)?
        };
        validate_corpus(&corpus, &state.taxonomy, false)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidCorpus", e))?;
        let model = nlp::train(&corpus, &state.taxonomy, req.hyperparams.unwrap_or_default(), req.seed)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "TrainFailed", e))?;
        let bytes = serde_json::to_vec(&model).map_err(ApiError::internal)?;
        write_atomically(&state.config.model_dir.join(CLASSIFIER_FILE), &bytes).map_err(ApiError::internal)?;
        let summary = json!({
            "corpus_size": corpus.len(),
            "vocabulary_size": model.vocabulary.len(),
            "categories": model.categories,
        });
        *state.classifier.write() = Some(Arc::new(model));
        Ok(Json(summary))
    })
    .await?
}

fn read_corpus(state: &AppState) -> ApiResult<Vec<nlp::LabeledSnippet>> {
    match std::fs::File::open(&state.config.corpus) {
        Ok(f) => load_corpus(std::io::BufReader::new(f))
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidCorpus", e)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(ApiError::internal(e)),
    }
}

// ---- queries ----

#[derive(Serialize)]
struct QueryResponse<'a> {
    id: &'a str,
    threshold: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<crate::dsl::Warning>,
    results: RankedResults,
}

async fn submit_query(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let text = String::from_utf8(body.to_vec()).map_err(|_| {
        let err = crate::dsl::parse_bytes(&body).expect_err("invalid UTF-8 never parses");
        ApiError { status: StatusCode::BAD_REQUEST, body: parse_error_body(&err) }
    })?;
    let options = ParseOptions { default_threshold: state.config.default_threshold };
    let q = parse_with(&text, &options)
        .map_err(|e| ApiError { status: StatusCode::BAD_REQUEST, body: parse_error_body(&e) })?;
    let warnings = validate(&q, &state.taxonomy);
    let g = state.store.snapshot();
    let id = state.new_query_id();
    let q2 = q.clone();
    let outcome =
        blocking(move || rank_with_threshold(&g, &q2, 0.0).map(|r| (r, g.version())).map_err(|e| (e, g.version())))
            .await?;
    let (job, response) = match outcome {
        Ok((full, version)) => {
            let body = serde_json::to_value(QueryResponse {
                id: &id,
                threshold: q.threshold,
                warnings,
                results: full.filtered(q.threshold),
            })
            .map_err(ApiError::internal)?;
            let job = QueryJob {
                id: id.clone(),
                dsl_text: text,
                status: JobStatus::Done,
                graph_version: version,
                full: Some(full),
                error: None,
            };
            (job, Json(body).into_response())
        }
        Err((e, version)) => {
            let err = ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "MatchFailed", &e);
            let job = QueryJob {
                id: id.clone(),
                dsl_text: text,
                status: JobStatus::Failed,
                graph_version: version,
                full: None,
                error: Some(e.to_string()),
            };
            (job, err.into_response())
        }
    };
    state.queries.write().insert(id, Arc::new(job));
    Ok(response)
}

fn parse_error_body(e: &crate::dsl::ParseError) -> Value {
    json!({
        "error": "ParseError",
        "kind": e.kind,
        "line": e.line,
        "column": e.column,
        "offset": e.offset,
        "message": e.message,
        "expected": e.expected,
    })
}

#[derive(Deserialize)]
struct ThresholdParam {
    threshold: Option<f64>,
}

async fn get_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(p): Query<ThresholdParam>,
) -> ApiResult<Response> {
    let Some(job) = state.queries.read().get(&id).cloned() else {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "UnknownQuery", format!("no query {id:?}")));
    };
    let Some(full) = &job.full else {
        return Ok(Json(job.as_ref()).into_response());
    };
    let threshold = p.threshold.unwrap_or(full.query.threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "ThresholdOutOfRange",
            format!("threshold {threshold} outside [0, 1]"),
        ));
    }
    let body = QueryResponse { id: &job.id, threshold, warnings: Vec::new(), results: full.filtered(threshold) };
    Ok(Json(body).into_response())
}

// ---- synthetic trajectories ----

async fn synth_train(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let config: AaeConfig = if body.is_empty() { AaeConfig::default() } else { json_body(&body)? };
    config.validate().map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "ConfigInvalid", e))?;
    let Some(path) = state.config.trajectories.clone().filter(|p| p.exists()) else {
        return Err(ApiError::new(StatusCode::CONFLICT, "NoTrajectories", "no trajectory dataset is configured"));
    };
    blocking(move || {
        let f = std::fs::File::open(&path).map_err(ApiError::internal)?;
        let data = synth::read_trajectories(std::io::BufReader::new(f))
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidTrajectories", e))?;
        let mapper = synth::fit_mapper(&data, &state.taxonomy).map_err(synth_error)?;
        let training = synth::train(&data, &mapper, &config).map_err(synth_error)?;
        let id = state.new_model_id();
        let bytes = serde_json::to_vec(&training.model).map_err(ApiError::internal)?;
        write_atomically(&state.model_path(&id).expect("generated ids are valid"), &bytes)
            .map_err(ApiError::internal)?;
        state.synth.lock().insert(id.clone(), Arc::new(training.model));
        Ok(Json(json!({
            "model_id": id,
            "trajectories": data.len(),
            "batches": training.curve.len(),
            "final_loss": training.curve.last(),
        })))
    })
    .await?
}

fn synth_error(e: SynthError) -> ApiError {
    let name = match &e {
        SynthError::ConfigInvalid(_) => "ConfigInvalid",
        SynthError::EmptyDataset => "EmptyDataset",
        SynthError::UnknownCategory(_) => "UnknownCategory",
        SynthError::DimensionMismatch { .. } => "DimensionMismatch",
        SynthError::NonFiniteLoss(_) => "NonFiniteLoss",
    };
    ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, name, e)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateRequest {
    model_id: String,
    n: usize,
    #[serde(default)]
    seed: u64,
}

async fn synth_generate(State(state): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let req: GenerateRequest = json_body(&body)?;
    if req.n > MAX_GENERATE {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "TooMany",
            format!("n is capped at {MAX_GENERATE}"),
        ));
    }
    let model = state.synth_model(&req.model_id).map_err(ApiError::internal)?;
    let Some(model) = model else {
        return Err(ApiError::new(StatusCode::NOT_FOUND, "UnknownModel", format!("no model {:?}", req.model_id)));
    };
    let bytes = blocking(move || {
        let mut buf = Vec::new();
        synth::write_trajectories(&mut buf, &synth::sample(&model, req.n, req.seed)).map(|_| buf)
    })
    .await?
    .map_err(ApiError::internal)?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from(bytes)).into_response())
}

// ---- feedback ----

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackRequest {
    text: String,
    #[serde(default)]
    predicted: Vec<String>,
    corrected: Vec<String>,
    #[serde(default)]
    note: Option<String>,
    #[serde(default)]
    timestamp: Option<String>,
}

async fn feedback(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: FeedbackRequest = json_body(&body)?;
    let labels: BTreeSet<&str> = req.corrected.iter().map(String::as_str).collect();
    let reject = |m: String| Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidLabels", m));
    if labels.is_empty() {
        return reject("corrected must name at least one label".into());
    }
    if labels.len() > MAX_LABELS {
        return reject(format!("{} labels given, at most {MAX_LABELS} allowed", labels.len()));
    }
    if let Some(bad) = labels.iter().find(|l| !state.taxonomy.contains(l)) {
        return reject(format!("label {bad:?} is not in the taxonomy"));
    }
    let mut provenance = BTreeMap::new();
    provenance.insert("predicted", json!(req.predicted));
    provenance.insert("note", json!(req.note));
    provenance.insert("timestamp", json!(req.timestamp.unwrap_or_else(|| chrono::Utc::now().to_rfc3339())));
    let record = CorpusRecord {
        text: req.text,
        labels: labels.iter().map(|s| s.to_string()).collect(),
        feedback: Some(json!(provenance)),
    };
    blocking(move || {
        let _lock = state.corpus_file.lock();
        append_record(&state.config.corpus, &record).map_err(ApiError::internal)?;
        let text = std::fs::read_to_string(&state.config.corpus).map_err(ApiError::internal)?;
        let size = text.lines().filter(|l| !l.trim().is_empty()).count();
        Ok(Json(json!({ "appended_corpus_size": size })))
    })
    .await?
}
