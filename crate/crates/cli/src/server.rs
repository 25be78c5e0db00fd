//! HTTP JSON service.
//!
//! Request bodies are parsed by hand from raw bytes so that every validation
//! failure can name the offending field. Errors share one shape:
//! `{"error": kind, "detail": text, "field"?: name}`.

use std::collections::BTreeSet;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde_json::{Map, Value};
use tokio::sync::OnceCell;

use cfexplain::cf::{generate, CfError, CfQuery, DistanceMode, Optimizer, SchemaModel};
use cfexplain::importance::{
    global_importance, local_importance, ImportanceConfig, ImportanceError, ImportanceReport,
};
use cfexplain::models::{predicted_class, TrainedModel};
use cfexplain::tabular::{Dataset, Encoder, FeatureSchema, Instance, TabularError};

use crate::cli::ServeArgs;
use crate::files::{load_dataset, load_model, load_schema};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub error: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, detail: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.into(),
                detail: detail.into(),
                field: None,
            },
        }
    }

    fn field(field: &str, detail: impl Into<String>) -> Self {
        let mut e = Self::new(StatusCode::BAD_REQUEST, "ValidationError", detail);
        e.body.field = Some(field.into());
        e
    }

    fn internal(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", detail)
    }
}

impl From<CfError> for ApiError {
    fn from(e: CfError) -> Self {
        let detail = e.to_string();
        match &e {
            CfError::NoCounterfactualFound { .. } | CfError::TargetEqualsPrediction { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, e.kind(), detail)
            }
            CfError::UnsupportedOptimizer(_) => {
                let mut a = Self::new(StatusCode::BAD_REQUEST, e.kind(), detail);
                a.body.field = Some("optimizer".into());
                a
            }
            CfError::InvalidInstance(t) => tabular_error(t),
            CfError::InvalidQuery(_) | CfError::ModeMismatch { .. } => {
                Self::new(StatusCode::BAD_REQUEST, e.kind(), detail)
            }
        }
    }
}

impl From<ImportanceError> for ApiError {
    fn from(e: ImportanceError) -> Self {
        match e {
            ImportanceError::GenerationFailed(c) => c.into(),
            ImportanceError::AllGenerationsFailed { .. } => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "AllGenerationsFailed", e.to_string())
            }
            ImportanceError::Io(m) => Self::internal(m),
        }
    }
}

fn tabular_error(e: &TabularError) -> ApiError {
    match e {
        TabularError::OutOfRangeValue { feature, .. }
        | TabularError::NonIntegerOrdinal { feature, .. } => {
            let detail = match e {
                TabularError::OutOfRangeValue { value, .. } => {
                    format!("value {value} for `{feature}` is out of range")
                }
                _ => e.to_string(),
            };
            ApiError::field(feature, detail)
        }
        TabularError::WidthMismatch { .. } => ApiError::field("values", e.to_string()),
        other => ApiError::new(StatusCode::BAD_REQUEST, "ValidationError", other.to_string()),
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &self.body)
    }
}

fn json_response<T: Serialize>(status: StatusCode, value: &T) -> Response {
    match serde_json::to_vec(value) {
        Ok(bytes) => (
            status,
            [(axum::http::header::CONTENT_TYPE, "application/json")],
            bytes,
        )
            .into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

/// Everything the service needs; immutable after startup apart from the
/// lazily filled global importance cache.
pub struct AppState {
    pub model: TrainedModel,
    pub schema: FeatureSchema,
    pub mads: Vec<f64>,
    pub data: Option<Dataset>,
    pub importance: ImportanceConfig,
    pub global_seed: u64,
    global: OnceCell<Result<ImportanceReport, ApiError>>,
}

impl AppState {
    pub fn new(
        model: TrainedModel,
        schema: FeatureSchema,
        mads: Vec<f64>,
        data: Option<Dataset>,
        importance: ImportanceConfig,
        global_seed: u64,
    ) -> Result<Self, String> {
        if SchemaModel::new(&model, &schema).is_none() {
            return Err("model width does not match schema".into());
        }
        if mads.len() != schema.len() {
            return Err(format!("{} MADs for {} features", mads.len(), schema.len()));
        }
        Ok(Self {
            model,
            schema,
            mads,
            data,
            importance,
            global_seed,
            global: OnceCell::new(),
        })
    }

    fn classifier(&self) -> SchemaModel<'_> {
        SchemaModel::new(&self.model, &self.schema).expect("checked at construction")
    }

    fn compute_global(&self) -> Result<ImportanceReport, ApiError> {
        let data = self.data.as_ref().ok_or_else(|| {
            ApiError::new(
                StatusCode::NOT_FOUND,
                "GlobalImportanceUnavailable",
                "the service was started without a dataset",
            )
        })?;
        let g = global_importance(data, &self.classifier(), &self.mads, &self.importance, self.global_seed)?;
        log::info!(
            "global importance: {} covered, {} failed",
            g.report.instances_covered,
            g.report.failures
        );
        Ok(g.report)
    }

    /// Fills the global importance cache if it is still empty.
    pub async fn global_report(self: &Arc<Self>) -> Result<ImportanceReport, ApiError> {
        let state = Arc::clone(self);
        self.global
            .get_or_init(|| async move {
                tokio::task::spawn_blocking(move || state.compute_global())
                    .await
                    .unwrap_or_else(|e| Err(ApiError::internal(e.to_string())))
            })
            .await
            .clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/schema", get(schema))
        .route("/predict", post(predict))
        .route("/counterfactuals", post(counterfactuals))
        .route("/importance/local", post(importance_local))
        .route("/importance/global", get(importance_global))
        .fallback(not_found)
        .with_state(state)
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "NotFound", "unknown route")
}

async fn health() -> Response {
    json_response(StatusCode::OK, &serde_json::json!({ "status": "ok" }))
}

async fn schema(State(state): State<Arc<AppState>>) -> Response {
    json_response(StatusCode::OK, &state.schema)
}

/// A parsed JSON object with typed, field-naming accessors.
struct Body(Map<String, Value>);

impl Body {
    fn parse(bytes: &[u8]) -> Result<Self, ApiError> {
        match serde_json::from_slice::<Value>(bytes) {
            Ok(Value::Object(map)) => Ok(Body(map)),
            Ok(_) => Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "ValidationError",
                "request body must be a JSON object",
            )),
            Err(e) => Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "MalformedJson",
                e.to_string(),
            )),
        }
    }

    fn get(&self, name: &str) -> Option<&Value> {
        self.0.get(name).filter(|v| !v.is_null())
    }

    fn values(&self, schema: &FeatureSchema) -> Result<Instance, ApiError> {
        let raw = self
            .get("values")
            .ok_or_else(|| ApiError::field("values", "missing field `values`"))?;
        let items = raw
            .as_array()
            .ok_or_else(|| ApiError::field("values", "`values` must be an array of numbers"))?;
        if items.len() != schema.len() {
            return Err(ApiError::field(
                "values",
                format!("expected {} values, got {}", schema.len(), items.len()),
            ));
        }
        let mut values = Vec::with_capacity(items.len());
        for (item, spec) in items.iter().zip(&schema.features) {
            let v = item
                .as_f64()
                .ok_or_else(|| ApiError::field(&spec.name, format!("`{}` must be a number", spec.name)))?;
            values.push(v);
        }
        let instance = Instance(values);
        instance.validate(schema, 0).map_err(|e| tabular_error(&e))?;
        Ok(instance)
    }

    fn u64_or(&self, name: &str, default: u64) -> Result<u64, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .ok_or_else(|| ApiError::field(name, format!("`{name}` must be a non-negative integer"))),
        }
    }

    fn usize_or(&self, name: &str, default: usize) -> Result<usize, ApiError> {
        let v = self.u64_or(name, default as u64)?;
        usize::try_from(v).map_err(|_| ApiError::field(name, format!("`{name}` is too large")))
    }

    fn f64_or(&self, name: &str, default: f64) -> Result<f64, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| ApiError::field(name, format!("`{name}` must be a number"))),
        }
    }

    fn immutable(&self, schema: &FeatureSchema) -> Result<BTreeSet<String>, ApiError> {
        let Some(raw) = self.get("immutable") else {
            return Ok(BTreeSet::new());
        };
        let items = raw
            .as_array()
            .ok_or_else(|| ApiError::field("immutable", "`immutable` must be an array of feature names"))?;
        items
            .iter()
            .map(|v| {
                let name = v
                    .as_str()
                    .ok_or_else(|| ApiError::field("immutable", "feature names must be strings"))?;
                if schema.index_of(name).is_none() {
                    return Err(ApiError::field("immutable", format!("unknown feature `{name}`")));
                }
                Ok(name.to_string())
            })
            .collect()
    }

    fn target(&self, default: u8) -> Result<u8, ApiError> {
        match self.get("target_class") {
            None => Ok(default),
            Some(v) => match v.as_u64() {
                Some(t @ (0 | 1)) => Ok(t as u8),
                _ => Err(ApiError::field("target_class", "`target_class` must be 0 or 1")),
            },
        }
    }

    fn optimizer(&self) -> Result<Option<Optimizer>, ApiError> {
        match self.get("optimizer").map(|v| v.as_str()) {
            None => Ok(None),
            Some(Some("gradient")) => Ok(Some(Optimizer::Gradient)),
            Some(Some("evolutionary")) => Ok(Some(Optimizer::Evolutionary)),
            Some(_) => Err(ApiError::field(
                "optimizer",
                "`optimizer` must be \"gradient\" or \"evolutionary\"",
            )),
        }
    }

    fn distance_mode(&self) -> Result<DistanceMode, ApiError> {
        match self.get("distance_mode") {
            None => Ok(DistanceMode::default()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|_| {
                ApiError::field(
                    "distance_mode",
                    "`distance_mode` must be \"ordinal_as_categorical\" or \"ordinal_as_continuous\"",
                )
            }),
        }
    }
}

fn current_class(state: &AppState, origin: &Instance) -> Result<(u8, f64), ApiError> {
    let p = state
        .model
        .predict_proba(&Encoder::new(&state.schema).encode(origin))
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok((predicted_class(p), p))
}

async fn predict(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let body = Body::parse(&body)?;
    let origin = body.values(&state.schema)?;
    let (class, probability) = current_class(&state, &origin)?;
    Ok(json_response(
        StatusCode::OK,
        &serde_json::json!({ "class": class, "probability": probability }),
    ))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn counterfactuals(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body = Body::parse(&body)?;
    let origin = body.values(&state.schema)?;
    let (class, _) = current_class(&state, &origin)?;
    let query = CfQuery {
        target_class: body.target(1 - class)?,
        k: body.usize_or("k", 1)?,
        immutable: body.immutable(&state.schema)?,
        lambda1: body.f64_or("lambda1", cfexplain::cf::DEFAULT_LAMBDA1)?,
        lambda2: body.f64_or("lambda2", cfexplain::cf::DEFAULT_LAMBDA2)?,
        optimizer: body.optimizer()?,
        seed: body.u64_or("seed", 0)?,
        budget: body.usize_or("budget", cfexplain::cf::DEFAULT_BUDGET)?,
        distance_mode: body.distance_mode()?,
        origin,
    };
    let set = blocking(move || Ok(generate(&query, &state.model, &state.schema, &state.mads)?)).await?;
    Ok(json_response(StatusCode::OK, &set))
}

async fn importance_local(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let body = Body::parse(&body)?;
    let origin = body.values(&state.schema)?;
    let immutable = body.immutable(&state.schema)?;
    let seed = body.u64_or("seed", 0)?;
    let config = ImportanceConfig {
        k: body.usize_or("k", state.importance.k)?,
        lambda1: body.f64_or("lambda1", state.importance.lambda1)?,
        lambda2: body.f64_or("lambda2", state.importance.lambda2)?,
        distance_mode: body.distance_mode()?,
        ..state.importance.clone()
    };
    let report = blocking(move || {
        Ok(local_importance(
            &origin,
            &state.classifier(),
            &state.schema,
            &state.mads,
            &immutable,
            &config,
            seed,
        )?)
    })
    .await?;
    Ok(json_response(StatusCode::OK, &report))
}

async fn importance_global(State(state): State<Arc<AppState>>) -> Result<Response, ApiError> {
    let report = state.global_report().await?;
    Ok(json_response(StatusCode::OK, &report))
}

/// Loads the artifacts named by `args` and runs the service until Ctrl-C.
pub fn serve_blocking(args: ServeArgs) -> Result<(), CliError> {
    log::info!("serve seed {}", args.seed);
    let schema = load_schema(args.schema.as_deref())?;
    let doc = load_model(&args.model, &schema)?;
    let data = match &args.data {
        Some(p) => {
            let mut d = load_dataset(p, &schema)?;
            if let Some(n) = args.global_limit {
                d = d.subset(&(0..n.min(d.len())).collect::<Vec<_>>());
            }
            Some(d)
        }
        None => None,
    };
    let state = AppState::new(
        doc.model,
        schema,
        doc.feature_mads,
        data,
        ImportanceConfig::default(),
        args.seed,
    )
    .map(Arc::new)
    .map_err(|e| CliError::new("serve", e))?;

    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::new("serve", e))?;
    runtime.block_on(async move {
        if args.precompute {
            log::info!("precomputing global importance");
            if let Err(e) = state.global_report().await {
                log::warn!("global importance unavailable: {}", e.body.detail);
            }
        }
        let listener = tokio::net::TcpListener::bind(&args.bind)
            .await
            .map_err(|e| CliError::new("bind", format!("{}: {e}", args.bind)))?;
        log::info!("listening on {}", args.bind);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::new("serve", e))
    })
}
