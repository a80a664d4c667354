//! evalbox — a sandboxed code-evaluation harness.
//!
//! The pipeline turns natural-language coding problems plus model
//! completions into verdicts and metrics:
//!
//! 1. **Problems** load from line-delimited files in two modes: script
//!    judging (code + test script, zero exit = pass) and OJ judging
//!    (standalone program, stdout compared per stdin case).
//! 2. **Prompts** are generated zero-shot (the question verbatim) or
//!    few-shot (exemplar pairs prepended).
//! 3. **Extraction** pulls candidate code out of free-form responses:
//!    fenced blocks first, a per-language heuristic as fallback.
//! 4. **Synthesis** combines code with tests into runnable file maps,
//!    handling per-language layout (single translation units, java class
//!    splitting, header merging).
//! 5. **Execution** runs programs in isolated scratch directories under
//!    wall/CPU/memory/output/process limits with scrubbed environments.
//! 6. **Judgment** maps outcomes onto a closed failure taxonomy.
//! 7. **Metrics** aggregate pass rates by domain, language, difficulty,
//!    and prompt language, plus compile pass rates and pass@k.
//!
//! Completions come from pluggable providers (remote chat endpoints,
//! recorded replays, scripted behaviors) driven single-pass, best-of-N,
//! or with execution-feedback reflection.
//!
//! See the `examples/` directory for one runnable example per
//! capability, and the `evalbox` binary for the operator CLI
//! (`serve`, `verify`, `eval`, `metrics`, `extract`).

pub mod cli;
pub mod error;
pub mod executor;
pub mod extract;
pub mod judge;
pub mod lang;
pub mod metrics;
pub mod pipeline;
pub mod problem;
pub mod provider;
pub mod runner;
pub mod service;
pub mod session;
pub mod synthesis;

pub use error::{Error, Result};
pub use executor::{CompilePhase, Executor, Limits, RunResult, RunSpec, RunStatus};
pub use extract::{extract_code, ExtractionMethod, ExtractionResult};
pub use judge::{
    classify_failure, judge_auto_eval, judge_oj, normalize_output, FailureKind, Judgment,
};
pub use lang::{normalize_language_tag, Language};
pub use metrics::{
    aggregate, compile_pass_rate, pass_at_1, pass_at_k, vote_difficulty, AttemptRecord, GroupBy,
    MetricsReport, MetricsRow,
};
pub use pipeline::{
    build_feedback_prompt, eval_batch, eval_problem, AttemptOutcome, Pipeline, ProblemResult,
    Strategy, TranscriptEntry,
};
pub use problem::{
    generate_prompt, load_problems, save_problems, Dataset, Difficulty, Domain, Exemplar, IOCase,
    Labels, NaturalLanguage, Paradigm, Problem, Prompt, TestSpec,
};
pub use provider::{Provider, ProviderConfig, ProviderKind, SamplingParams};
pub use runner::{Registry, RunnerProfile, SessionKind};
pub use service::{AppState, ServiceConfig};
pub use session::run_cells;
pub use synthesis::{split_top_level_units, synthesize_auto_eval, synthesize_oj, TestProgram};
