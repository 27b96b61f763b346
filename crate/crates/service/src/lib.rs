//! JSON over HTTP for translation, dish browsing, diet flags and the waiter
//! dialog.
//!
//! | method | path | body / query |
//! |---|---|---|
//! | POST | `/translate` | `{text, k?}` |
//! | GET | `/dishes/{name}` | |
//! | GET | `/ingredients/{name}` | |
//! | POST | `/profiles` | `{conditions, ingredients}` |
//! | GET | `/dishes/{name}/flags` | `?profile=id` |
//! | GET | `/dishes/{name}/dialog` | `?profile=id` |
//! | GET | `/images/{id}` | |
//! | GET | `/health` | |

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{AllowOrigin, CorsLayer};

use menusmt::decoder::detokenize_consolidated;
use menusmt::menudb::{
    default_templates, dialog_templates, flag_dish, get_profile, load_templates, lookup_dish, lookup_ingredient,
    set_profile, DialogTemplate, JsonFileBackend, LanguagePair, Store, StoreBackend,
};
use menusmt::pipeline::{verify_bundle, Artifacts, LoadMode};
use menusmt::Error as CoreError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    /// Artifact bundle directory; without one `/translate` answers 503.
    pub bundle: Option<PathBuf>,
    pub load_mode: LoadMode,
    /// JSON store file; created on the first profile write.
    pub store: Option<PathBuf>,
    pub default_k: usize,
    /// Allowed browser origins; empty means no CORS headers.
    pub cors_allowlist: Vec<String>,
    pub templates: Option<PathBuf>,
    pub languages: LanguagePair,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            bundle: None,
            load_mode: LoadMode::OnDemand,
            store: None,
            default_k: menusmt::decoder::DEFAULT_K,
            cors_allowlist: Vec::new(),
            templates: None,
            languages: LanguagePair::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("artifact bundle: {0}")]
    Bundle(CoreError),
    #[error("store: {0}")]
    Store(CoreError),
    #[error("dialog templates: {0}")]
    Templates(CoreError),
    #[error("invalid CORS origin '{0}'")]
    Cors(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shared state. Artifacts are immutable; the store has one writer at a time.
#[derive(Clone)]
pub struct AppState {
    pub artifacts: Option<Arc<Artifacts>>,
    pub store: Arc<RwLock<Store>>,
    pub backend: Option<Arc<JsonFileBackend>>,
    pub default_k: usize,
    pub templates: Arc<Vec<DialogTemplate>>,
    pub languages: LanguagePair,
}

impl AppState {
    pub fn new(artifacts: Option<Artifacts>, store: Store) -> Self {
        AppState {
            artifacts: artifacts.map(Arc::new),
            store: Arc::new(RwLock::new(store)),
            backend: None,
            default_k: menusmt::decoder::DEFAULT_K,
            templates: Arc::new(default_templates()),
            languages: LanguagePair::default(),
        }
    }

    /// Verifies bundle checksums, then loads the bundle and the store.
    pub fn from_config(config: &ServiceConfig) -> Result<Self, StartupError> {
        let artifacts = match &config.bundle {
            Some(dir) => {
                verify_bundle(dir).map_err(StartupError::Bundle)?;
                Some(Artifacts::load(dir, config.load_mode).map_err(StartupError::Bundle)?)
            }
            None => None,
        };
        let backend = config.store.as_ref().map(JsonFileBackend::new);
        let store = match &backend {
            Some(b) => b.load().map_err(StartupError::Store)?,
            None => Store::default(),
        };
        let templates = match &config.templates {
            Some(path) => load_templates(path).map_err(StartupError::Templates)?,
            None => default_templates(),
        };
        let mut state = AppState::new(artifacts, store);
        state.backend = backend.map(Arc::new);
        state.default_k = config.default_k;
        state.templates = Arc::new(templates);
        state.languages = config.languages.clone();
        Ok(state)
    }
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
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let status = match &e {
            CoreError::NotFound(_) => StatusCode::NOT_FOUND,
            CoreError::InvalidArgument(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/translate", post(translate))
        .route("/dishes/{name}", get(dish))
        .route("/dishes/{name}/flags", get(flags))
        .route("/dishes/{name}/dialog", get(dialog))
        .route("/ingredients/{name}", get(ingredient))
        .route("/profiles", post(create_profile))
        .route("/images/{id}", get(image))
        .with_state(state)
}

pub fn cors_layer(allowlist: &[String]) -> Result<CorsLayer, StartupError> {
    let origins = allowlist
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|_| StartupError::Cors(o.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]))
}

/// Router with the configured CORS policy applied.
pub fn app(state: AppState, config: &ServiceConfig) -> Result<Router, StartupError> {
    let router = router(state);
    if config.cors_allowlist.is_empty() {
        return Ok(router);
    }
    Ok(router.layer(cors_layer(&config.cors_allowlist)?))
}

pub async fn serve(config: ServiceConfig) -> Result<(), StartupError> {
    let state = AppState::from_config(&config)?;
    let app = app(state, &config)?;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let store = state.store.read().expect("store lock");
    Json(json!({
        "artifacts_loaded": state.artifacts.is_some(),
        "dishes": store.dishes.len(),
        "ingredients": store.ingredients.len(),
    }))
}

#[derive(Debug, Deserialize)]
pub struct TranslateRequest {
    pub text: String,
    pub k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct KBestItem {
    pub rank: usize,
    pub text: String,
    pub cost: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TranslateResponse {
    pub kbest: Vec<KBestItem>,
    /// Input tokens the best output copies through untranslated.
    pub oov: Vec<String>,
}

async fn translate(State(state): State<AppState>, Json(req): Json<TranslateRequest>) -> ApiResult<Json<TranslateResponse>> {
    if req.text.trim().is_empty() {
        return Err(ApiError::bad_request("text must not be empty"));
    }
    let artifacts = state
        .artifacts
        .as_ref()
        .ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "translation artifacts are not loaded"))?;
    let k = req.k.unwrap_or(state.default_k);
    let list = artifacts.translate(&req.text, Some(k))?;
    let oov = list
        .best()
        .map(|best| best.oov_tokens(&list.input).iter().map(|t| detokenize_consolidated(&[t.as_str()])).collect())
        .unwrap_or_default();
    let kbest = list.items.iter().map(|h| KBestItem { rank: h.rank, text: h.text.clone(), cost: h.cost }).collect();
    Ok(Json(TranslateResponse { kbest, oov }))
}

async fn dish(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult<Response> {
    let store = state.store.read().expect("store lock");
    Ok(Json(lookup_dish(&store, &name)?).into_response())
}

async fn ingredient(State(state): State<AppState>, Path(name): Path<String>) -> ApiResult<Response> {
    let store = state.store.read().expect("store lock");
    Ok(Json(lookup_ingredient(&store, &name)?).into_response())
}

#[derive(Debug, Default, Deserialize)]
#[serde(default)]
pub struct ProfileRequest {
    pub conditions: Vec<String>,
    pub ingredients: Vec<String>,
}

async fn create_profile(State(state): State<AppState>, Json(req): Json<ProfileRequest>) -> ApiResult<Response> {
    let mut store = state.store.write().expect("store lock");
    let mut draft = store.clone();
    let conditions: Vec<&str> = req.conditions.iter().map(String::as_str).collect();
    let ingredients: Vec<&str> = req.ingredients.iter().map(String::as_str).collect();
    let profile = set_profile(&mut draft, &conditions, &ingredients).map_err(|e| match e {
        CoreError::NotFound(what) => ApiError::bad_request(format!("invalid profile: unknown {what}")),
        other => other.into(),
    })?;
    if let Some(backend) = &state.backend {
        backend.save(&draft)?;
    }
    *store = draft;
    Ok((StatusCode::CREATED, Json(profile)).into_response())
}

#[derive(Debug, Deserialize)]
pub struct ProfileQuery {
    pub profile: Option<String>,
}

fn profile_from(store: &Store, query: &ProfileQuery) -> ApiResult<menusmt::menudb::DietProfile> {
    let raw = query.profile.as_deref().ok_or_else(|| ApiError::bad_request("missing profile parameter"))?;
    let id: u32 = raw.parse().map_err(|_| ApiError::bad_request(format!("invalid profile id '{raw}'")))?;
    get_profile(store, id).map_err(|_| ApiError::bad_request(format!("unknown profile {id}")))
}

async fn flags(
    State(state): State<AppState>,
    Path(name): Path<String>,
    Query(query): Query<ProfileQuery>,
) -> ApiResult<Response> {
    let store = state.store.read().expect("store lock");
    let dish = lookup_dish(&store, &name)?;
    let profile = profile_from(&store, &query)?;
    let flags = flag_dish(&store, &dish.name, &profile)?;
    Ok(Json(json!({ "dish": dish.name, "profile": profile.id, "flags": flags })).into_response())
}

async fn dialog(
    State(state): State<AppState>,
    Path(name): Path<String>,
    Query(query): Query<ProfileQuery>,
) -> ApiResult<Response> {
    let store = state.store.read().expect("store lock");
    let dish = lookup_dish(&store, &name)?;
    let profile = profile_from(&store, &query)?;
    let flags = flag_dish(&store, &dish.name, &profile)?;
    let questions = dialog_templates(&dish.name, &flags, &state.languages, &state.templates);
    Ok(Json(json!({ "dish": dish.name, "profile": profile.id, "questions": questions })).into_response())
}

fn content_type(bytes: &[u8]) -> &'static str {
    match bytes {
        [0x89, b'P', b'N', b'G', ..] => "image/png",
        [0xff, 0xd8, 0xff, ..] => "image/jpeg",
        [b'G', b'I', b'F', b'8', ..] => "image/gif",
        _ => "application/octet-stream",
    }
}

async fn image(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let id: u32 = id.parse().map_err(|_| ApiError::bad_request(format!("invalid image id '{id}'")))?;
    let store = state.store.read().expect("store lock");
    let (_, bytes) = store.image_bytes(id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("image {id}")))?;
    let headers = [
        (header::CONTENT_TYPE, content_type(bytes)),
        (header::CACHE_CONTROL, "public, max-age=86400, immutable"),
    ];
    Ok((headers, bytes.to_vec()).into_response())
}
