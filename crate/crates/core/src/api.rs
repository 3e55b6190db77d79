//! Read-only JSON service over a loaded corpus and edge store.
//!
//! | route | response |
//! |---|---|
//! | `GET /api/search?q=` | ranked [`SearchResult`]s |
//! | `GET /api/documents/{id}` | [`DocumentView`] |
//! | `GET /api/documents/{id}/edges?direction=&from=&to=&exclude_same_author=` | [`EnrichedEdge`]s |
//! | `GET /api/edges/{edge_id}/context?primary=&radius=` | [`ContextView`] |
//! | `GET /api/health` | [`Health`] |
//!
//! Errors are `{"error": "..."}` with a 4xx status.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::consolidate::Cluster;
use crate::corpus::{Corpus, Document};
use crate::edgestore::{DocSummary, Direction, EdgeQuery, EdgeStore, EnrichedEdge, StoreError};
use crate::metasearch::{MetaIndex, SearchParams, SearchResult};
use crate::offsetmap::Region;

pub const DEFAULT_RADIUS: usize = 600;
/// Upper bound on `radius`, to keep responses bounded.
pub const MAX_RADIUS: usize = 100_000;

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    /// Allowed CORS origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    /// Link template for documents, with `{doc_id}` substituted.
    pub external_url_template: Option<String>,
    /// Directory of static assets served under `/`.
    pub static_dir: Option<PathBuf>,
}

/// Immutable state shared by all requests.
#[derive(Debug)]
pub struct AppState {
    pub corpus: Corpus,
    pub store: EdgeStore,
    pub clusters: Vec<Cluster>,
    pub config: ServerConfig,
    index: MetaIndex,
}

impl AppState {
    pub fn new(corpus: Corpus, store: EdgeStore, clusters: Vec<Cluster>, config: ServerConfig) -> Self {
        let index = MetaIndex::new(&corpus);
        Self {
            corpus,
            store,
            clusters,
            config,
            index,
        }
    }

    pub fn search(&self, q: &str) -> Vec<SearchResult> {
        self.index.search(&self.corpus, q, &SearchParams::default())
    }

    fn external_url(&self, doc_id: &str) -> Option<String> {
        self.config
            .external_url_template
            .as_deref()
            .filter(|t| !t.is_empty())
            .map(|t| t.replace("{doc_id}", doc_id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentView {
    pub doc_id: String,
    pub year: i32,
    pub author: String,
    pub title: String,
    pub collection: String,
    pub in_count: usize,
    pub out_count: usize,
    pub text_length: usize,
    pub has_page_map: bool,
    pub external_url: Option<String>,
}

/// One side of an edge as shown in the page viewer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSide {
    pub doc: DocSummary,
    pub page: u32,
    pub excerpt: String,
    /// Raw offsets of the excerpt in the document.
    pub excerpt_start: usize,
    pub excerpt_end: usize,
    /// Reused span relative to the excerpt, clipped to it.
    pub highlight_start: usize,
    pub highlight_end: usize,
    /// Reused span in raw document offsets.
    pub span_start: usize,
    pub span_end: usize,
    /// Span in annotated offsets, when the document has an annotation table.
    pub annotated_start: Option<usize>,
    pub annotated_end: Option<usize>,
    /// Token boxes of the highlighted tokens on the excerpt's page.
    pub boxes: Option<Vec<Region>>,
    pub external_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextView {
    pub edge_id: u32,
    pub primary: ContextSide,
    pub other: ContextSide,
    pub align_length: u32,
    pub positives_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub corpus_size: usize,
    pub edge_count: usize,
    pub cluster_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => Self::not_found(e.to_string()),
            _ => Self::bad_request(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(ErrorBody { error: self.message })).into_response()
    }
}

type Params = Query<HashMap<String, String>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_param<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> Result<Option<T>, ApiError> {
    match params.get(name).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| ApiError::bad_request(format!("malformed `{name}`: `{v}`"))),
    }
}

fn lookup<'a>(state: &'a AppState, id: &str) -> Result<&'a Document, ApiError> {
    state
        .corpus
        .get(id)
        .map_err(|_| ApiError::not_found(format!("unknown document `{id}`")))
}

async fn search(State(state): State<Arc<AppState>>, Query(params): Params) -> ApiResult<Vec<SearchResult>> {
    let q = params
        .get("q")
        .ok_or_else(|| ApiError::bad_request("missing query parameter `q`"))?;
    Ok(Json(state.search(q)))
}

pub fn document_view(state: &AppState, id: &str) -> Result<DocumentView, ApiError> {
    let doc = lookup(state, id)?;
    let (in_count, out_count) = state.store.counts(id, &state.corpus)?;
    let m = &doc.meta;
    Ok(DocumentView {
        doc_id: m.doc_id.clone(),
        year: m.year,
        author: m.author.clone(),
        title: m.title.clone(),
        collection: m.collection.clone(),
        in_count,
        out_count,
        text_length: doc.char_len(),
        has_page_map: doc.page_map.as_ref().is_some_and(|p| !p.is_empty()),
        external_url: state.external_url(id),
    })
}

async fn document(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<DocumentView> {
    document_view(&state, &id).map(Json)
}

/// Builds the store query for the edges endpoint from its query string.
pub fn edge_query(id: &str, params: &HashMap<String, String>) -> Result<EdgeQuery, ApiError> {
    let direction: Direction = parse_param(params, "direction")?.unwrap_or_default();
    let from: Option<i32> = parse_param(params, "from")?;
    let to: Option<i32> = parse_param(params, "to")?;
    let exclude: bool = parse_param(params, "exclude_same_author")?.unwrap_or(true);
    Ok(EdgeQuery::new(id, direction).years(from, to).exclude_same_author(exclude))
}

async fn document_edges(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Params,
) -> ApiResult<Vec<EnrichedEdge>> {
    lookup(&state, &id)?;
    let q = edge_query(&id, &params)?;
    Ok(Json(state.store.query(&q, &state.corpus)?))
}

fn side(state: &AppState, doc: &Document, span: (usize, usize), radius: usize) -> ContextSide {
    let (start, end) = span;
    let page = doc.page_of(start);
    let page_span = doc.page_map.as_ref().and_then(|m| m.page_span(page));
    let (ex_start, ex_end) = match page_span {
        Some(p) => p,
        None => (start.saturating_sub(radius), end.saturating_add(radius).min(doc.char_len())),
    };
    let h_start = start.clamp(ex_start, ex_end);
    let h_end = end.clamp(h_start, ex_end);
    let boxes = doc.page_map.as_ref().map(|m| {
        m.highlight_regions(h_start, h_end)
            .into_iter()
            .filter(|r| r.page == page)
            .collect()
    });
    let annotated = doc
        .shift_table
        .as_ref()
        .and_then(|t| Some((t.raw_to_annotated(start).ok()?, t.raw_to_annotated(end).ok()?)));
    ContextSide {
        doc: DocSummary::from(&doc.meta),
        page,
        excerpt: doc.slice_chars(ex_start, ex_end).to_string(),
        excerpt_start: ex_start,
        excerpt_end: ex_end,
        highlight_start: h_start - ex_start,
        highlight_end: h_end - ex_start,
        span_start: start,
        span_end: end,
        annotated_start: annotated.map(|a| a.0),
        annotated_end: annotated.map(|a| a.1),
        boxes,
        external_url: state.external_url(doc.id()),
    }
}

/// Context of one edge, oriented so that `primary` is the first side.
pub fn context_view(state: &AppState, edge_id: u32, primary: &str, radius: usize) -> Result<ContextView, ApiError> {
    let e = state
        .store
        .get(edge_id)
        .ok_or_else(|| ApiError::not_found(format!("unknown edge {edge_id}")))?;
    let s1 = (&e.t1_id, (e.t1_start, e.t1_end));
    let s2 = (&e.t2_id, (e.t2_start, e.t2_end));
    let (p, o) = if *e.t1_id == *primary {
        (s1, s2)
    } else if *e.t2_id == *primary {
        (s2, s1)
    } else {
        return Err(ApiError::bad_request(format!(
            "`{primary}` is not a document of edge {edge_id}"
        )));
    };
    let pd = lookup(state, p.0)?;
    let od = lookup(state, o.0)?;
    Ok(ContextView {
        edge_id,
        primary: side(state, pd, p.1, radius),
        other: side(state, od, o.1, radius),
        align_length: e.align_length,
        positives_percent: e.positives_percent,
    })
}

async fn edge_context(
    State(state): State<Arc<AppState>>,
    Path(edge_id): Path<String>,
    Query(params): Params,
) -> ApiResult<ContextView> {
    let edge_id: u32 = edge_id
        .parse()
        .map_err(|_| ApiError::not_found(format!("unknown edge `{edge_id}`")))?;
    let primary = params
        .get("primary")
        .ok_or_else(|| ApiError::bad_request("missing query parameter `primary`"))?;
    let radius: usize = parse_param(&params, "radius")?.unwrap_or(DEFAULT_RADIUS);
    if radius > MAX_RADIUS {
        return Err(ApiError::bad_request(format!("radius above {MAX_RADIUS}")));
    }
    context_view(&state, edge_id, primary, radius).map(Json)
}

pub fn health_of(state: &AppState) -> Health {
    Health {
        status: "ok".into(),
        corpus_size: state.corpus.len(),
        edge_count: state.store.len(),
        cluster_count: state.clusters.len(),
    }
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(health_of(&state))
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

fn cors(origins: &[String]) -> CorsLayer {
    if origins.is_empty() {
        return CorsLayer::permissive();
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(list))
        .allow_methods([Method::GET])
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/search", get(search))
        .route("/documents/:id", get(document))
        .route("/documents/:id/edges", get(document_edges))
        .route("/edges/:edge_id/context", get(edge_context))
        .route("/health", get(health))
        .fallback(api_not_found);
    let mut app = Router::new().nest("/api", api);
    if let Some(dir) = &state.config.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(cors(&state.config.cors_origins)).with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
