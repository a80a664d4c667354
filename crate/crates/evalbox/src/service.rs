//! Single-server HTTP service exposing the pipeline.
//!
//! Endpoints (all under `/v1`):
//!
//! - `GET  /v1/health` — liveness probe
//! - `GET  /v1/problems?dataset=NAME` — problem summaries
//! - `POST /v1/run_code` — execute a snippet or file map
//! - `POST /v1/judge` — judge a completion against a problem
//!
//! User-code failures (nonzero exits, limit hits, wrong answers) are 200
//! responses carrying the structured result; 4xx is reserved for invalid
//! requests and 5xx is never used for user-code failures.

use std::collections::{BTreeMap, HashMap};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{Executor, Limits, RunResult, RunSpec, MAX_PROGRAM_BYTES};
use crate::extract::ExtractionResult;
use crate::judge::Judgment;
use crate::lang::Language;
use crate::pipeline::Pipeline;
use crate::problem::{Dataset, Labels, Problem, TestSpec};
use crate::runner::Registry;
use crate::synthesis::{synthesize_oj, TestProgram};

/// Resolved service configuration.
///
/// Precedence when assembling one: values in a config file override
/// command-line flags, which override environment variables, which
/// override the built-in defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ServiceConfig {
    pub listen: String,
    pub workers: usize,
    pub limits: Limits,
    /// Dataset name → problem file path.
    pub datasets: BTreeMap<String, PathBuf>,
    pub scratch_root: Option<PathBuf>,
    /// Optional runner-profile TOML merged over the built-ins.
    pub runners: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen: "127.0.0.1:8572".to_string(),
            workers: 0, // 0 = executor default
            limits: Limits::default(),
            datasets: BTreeMap::new(),
            scratch_root: None,
            runners: None,
        }
    }
}

/// Partial configuration layer; `None` fields defer to lower layers.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ConfigLayer {
    pub listen: Option<String>,
    pub workers: Option<usize>,
    pub limits: Option<Limits>,
    pub datasets: Option<BTreeMap<String, PathBuf>>,
    pub scratch_root: Option<PathBuf>,
    pub runners: Option<PathBuf>,
}

impl ConfigLayer {
    fn from_env() -> ConfigLayer {
        ConfigLayer {
            workers: std::env::var("SANDBOX_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok()),
            scratch_root: std::env::var_os("SANDBOX_TMPDIR").map(PathBuf::from),
            ..ConfigLayer::default()
        }
    }

    fn apply(self, config: &mut ServiceConfig) {
        if let Some(listen) = self.listen {
            config.listen = listen;
        }
        if let Some(workers) = self.workers {
            config.workers = workers;
        }
        if let Some(limits) = self.limits {
            config.limits = limits;
        }
        if let Some(datasets) = self.datasets {
            config.datasets.extend(datasets);
        }
        if let Some(root) = self.scratch_root {
            config.scratch_root = Some(root);
        }
        if let Some(runners) = self.runners {
            config.runners = Some(runners);
        }
    }
}

impl ServiceConfig {
    /// Layer defaults < environment < flags < config file.
    pub fn resolve(
        flags: ConfigLayer,
        config_file: Option<&std::path::Path>,
    ) -> Result<ServiceConfig> {
        let mut config = ServiceConfig::default();
        ConfigLayer::from_env().apply(&mut config);
        flags.apply(&mut config);
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let layer: ConfigLayer = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config file {}: {e}", path.display())))?;
            layer.apply(&mut config);
        }
        Ok(config)
    }
}

/// Shared service state.
#[derive(Clone)]
pub struct AppState {
    pub pipeline: Pipeline,
    pub datasets: Arc<HashMap<String, Dataset>>,
    pub default_limits: Limits,
}

impl AppState {
    pub fn build(config: &ServiceConfig) -> Result<AppState> {
        let mut registry = Registry::builtin();
        if let Some(runners) = &config.runners {
            registry.merge_toml_file(runners)?;
        }
        let scratch = config
            .scratch_root
            .clone()
            .unwrap_or_else(crate::executor::default_scratch_root);
        let workers = if config.workers > 0 {
            config.workers
        } else {
            crate::executor::default_worker_count()
        };
        let executor = Executor::with_options(registry, scratch, workers);
        let mut datasets = HashMap::new();
        for (name, path) in &config.datasets {
            datasets.insert(name.clone(), Dataset::load(path)?);
        }
        Ok(AppState {
            pipeline: Pipeline::new(executor).with_limits(config.limits),
            datasets: Arc::new(datasets),
            default_limits: config.limits,
        })
    }
}

#[derive(Debug, Serialize)]
struct ApiError {
    error: ApiErrorBody,
}

#[derive(Debug, Serialize)]
struct ApiErrorBody {
    code: &'static str,
    message: String,
}

fn bad_request(code: &'static str, message: impl Into<String>) -> Response {
    (
        StatusCode::BAD_REQUEST,
        Json(ApiError {
            error: ApiErrorBody {
                code,
                message: message.into(),
            },
        }),
    )
        .into_response()
}

fn not_found(code: &'static str, message: impl Into<String>) -> Response {
    (
        StatusCode::NOT_FOUND,
        Json(ApiError {
            error: ApiErrorBody {
                code,
                message: message.into(),
            },
        }),
    )
        .into_response()
}

#[derive(Debug, Deserialize)]
struct RunCodeRequest {
    language: String,
    #[serde(default)]
    code: Option<String>,
    #[serde(default)]
    files: Option<BTreeMap<String, String>>,
    #[serde(default)]
    stdin: Option<String>,
    #[serde(default)]
    limits: Option<Limits>,
    #[serde(default)]
    network_enabled: bool,
    #[serde(default)]
    entry_hint: Option<String>,
}

async fn run_code_handler(
    State(state): State<AppState>,
    Json(request): Json<RunCodeRequest>,
) -> Response {
    let language = Language::from_name(&request.language);
    let profile = match state.pipeline.executor().registry().get(&language) {
        Some(profile) => profile.clone(),
        None => {
            return bad_request(
                "unsupported_language",
                format!("no runner profile for language {:?}", request.language),
            )
        }
    };

    let program: TestProgram = match (&request.code, &request.files) {
        (Some(code), None) => match synthesize_oj(code, &language) {
            Ok(program) => program,
            Err(err) => return bad_request("invalid_program", err.to_string()),
        },
        (None, Some(files)) => {
            let mut program = TestProgram {
                files: files.clone(),
                language: language.clone(),
                needs_compile: profile.needs_compile(),
                run_stdin: None,
                entry_hint: request.entry_hint.clone(),
            };
            if let Err(err) = program.validate() {
                return bad_request("invalid_program", err.to_string());
            }
            program.run_stdin = None;
            program
        }
        (Some(_), Some(_)) => {
            return bad_request("invalid_request", "provide either code or files, not both")
        }
        (None, None) => return bad_request("invalid_request", "provide code or files"),
    };

    if program.total_bytes() > MAX_PROGRAM_BYTES {
        return bad_request(
            "payload_too_large",
            format!("program exceeds {MAX_PROGRAM_BYTES} bytes"),
        );
    }

    let spec = RunSpec {
        program,
        stdin: request.stdin,
        limits: request.limits.unwrap_or(state.default_limits),
        network_enabled: request.network_enabled,
    };
    let pipeline = state.pipeline.clone();
    let result = tokio::task::spawn_blocking(move || pipeline.executor().run_code(&spec)).await;
    match result {
        Ok(run_result) => (StatusCode::OK, Json(run_result)).into_response(),
        Err(e) => bad_request("execution_panic", e.to_string()),
    }
}

#[derive(Debug, Deserialize)]
struct JudgeRequest {
    #[serde(default)]
    problem_id: Option<String>,
    #[serde(default)]
    dataset: Option<String>,
    #[serde(default)]
    problem: Option<InlineProblem>,
    completion: String,
}

/// Inline problem payload mirroring the problem-file record schema.
#[derive(Debug, Deserialize)]
struct InlineProblem {
    id: String,
    question: String,
    language: Language,
    test_kind: String,
    #[serde(default)]
    test_code: Option<String>,
    #[serde(default)]
    cases: Option<Vec<crate::problem::IOCase>>,
    #[serde(default)]
    canonical_solution: Option<String>,
    #[serde(default)]
    labels: Option<Labels>,
    #[serde(default)]
    entry_class: Option<String>,
}

impl InlineProblem {
    fn into_problem(self) -> Result<Problem> {
        let test_spec = match self.test_kind.as_str() {
            "autoeval" => TestSpec::AutoEval {
                test_code: self
                    .test_code
                    .ok_or_else(|| Error::Config("autoeval problem requires test_code".into()))?,
            },
            "oj" => TestSpec::CommonOj {
                cases: self
                    .cases
                    .ok_or_else(|| Error::Config("oj problem requires cases".into()))?,
            },
            other => return Err(Error::Config(format!("unknown test_kind {other:?}"))),
        };
        Ok(Problem {
            id: self.id,
            question: self.question,
            programming_language: self.language,
            test_spec,
            reference_solution: self.canonical_solution.unwrap_or_default(),
            labels: self.labels.unwrap_or(Labels {
                domain: crate::problem::Domain::Others,
                difficulty: crate::problem::Difficulty::Medium,
                natural_language: crate::problem::NaturalLanguage::En,
            }),
            entry_class: self.entry_class,
            few_shot_exemplars: Vec::new(),
        })
    }
}

#[derive(Debug, Serialize)]
struct JudgeResponse {
    extraction: ExtractionResult,
    run_results: Vec<RunResult>,
    judgment: Judgment,
}

async fn judge_handler(
    State(state): State<AppState>,
    Json(request): Json<JudgeRequest>,
) -> Response {
    let problem: Problem = if let Some(inline) = request.problem {
        match inline.into_problem() {
            Ok(problem) => problem,
            Err(err) => return bad_request("invalid_problem", err.to_string()),
        }
    } else if let Some(id) = &request.problem_id {
        let mut found = None;
        match &request.dataset {
            Some(name) => {
                found = state.datasets.get(name).and_then(|ds| ds.get(id)).cloned();
            }
            None => {
                for dataset in state.datasets.values() {
                    if let Some(problem) = dataset.get(id) {
                        found = Some(problem.clone());
                        break;
                    }
                }
            }
        }
        match found {
            Some(problem) => problem,
            None => return not_found("unknown_problem", format!("no problem with id {id:?}")),
        }
    } else {
        return bad_request("invalid_request", "provide problem_id or an inline problem");
    };

    let pipeline = state.pipeline.clone();
    let completion = request.completion;
    let outcome =
        tokio::task::spawn_blocking(move || pipeline.judge_completion(&problem, &completion)).await;
    match outcome {
        Ok(outcome) => (
            StatusCode::OK,
            Json(JudgeResponse {
                extraction: outcome.extraction,
                run_results: outcome.run_results,
                judgment: outcome.judgment,
            }),
        )
            .into_response(),
        Err(e) => bad_request("execution_panic", e.to_string()),
    }
}

#[derive(Debug, Deserialize)]
struct ProblemsQuery {
    dataset: String,
}

#[derive(Debug, Serialize)]
struct ProblemSummary {
    id: String,
    language: String,
    test_kind: &'static str,
    labels: Labels,
}

async fn problems_handler(
    State(state): State<AppState>,
    Query(query): Query<ProblemsQuery>,
) -> Response {
    match state.datasets.get(&query.dataset) {
        Some(dataset) => {
            let summaries: Vec<ProblemSummary> = dataset
                .problems()
                .iter()
                .map(|p| ProblemSummary {
                    id: p.id.clone(),
                    language: p.programming_language.name().to_string(),
                    test_kind: match p.test_spec {
                        TestSpec::AutoEval { .. } => "autoeval",
                        TestSpec::CommonOj { .. } => "oj",
                    },
                    labels: p.labels,
                })
                .collect();
            (StatusCode::OK, Json(summaries)).into_response()
        }
        None => not_found(
            "unknown_dataset",
            format!("no dataset named {:?}", query.dataset),
        ),
    }
}

async fn health_handler() -> Response {
    (StatusCode::OK, Json(serde_json::json!({"status": "ok"}))).into_response()
}

/// Build the `/v1` router over the shared state.
pub fn router(state: AppState) -> Router {
    // body limit sits above MAX_PROGRAM_BYTES so the program-size check
    // is what callers observe
    Router::new()
        .route("/v1/health", get(health_handler))
        .route("/v1/run_code", post(run_code_handler))
        .route("/v1/judge", post(judge_handler))
        .route("/v1/problems", get(problems_handler))
        .layer(axum::extract::DefaultBodyLimit::max(2 * MAX_PROGRAM_BYTES))
        .with_state(state)
}

/// Serve until the process is interrupted.
pub async fn serve(config: ServiceConfig) -> Result<()> {
    let state = AppState::build(&config)?;
    let addr: SocketAddr = config
        .listen
        .parse()
        .map_err(|e| Error::Config(format!("bad listen address {:?}: {e}", config.listen)))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::Config(format!("cannot bind {addr}: {e}")))?;
    tracing::info!(%addr, "service listening");
    axum::serve(listener, router(state))
        .await
        .map_err(|e| Error::Config(format!("server error: {e}")))?;
    Ok(())
}
