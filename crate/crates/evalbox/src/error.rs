//! Crate-wide error type.

use std::path::PathBuf;

/// All failure modes surfaced by the library.
///
/// User-code failures (nonzero exits, wrong answers, limit hits) are *not*
/// errors: they are encoded in [`crate::executor::RunResult`] and
/// [`crate::judge::Judgment`]. `Error` is reserved for misuse of the API,
/// malformed inputs, and infrastructure faults.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed problem record at line {line}: {message}")]
    DatasetFormat { line: usize, message: String },

    #[error("duplicate problem id {id:?} at line {line}")]
    DuplicateProblemId { id: String, line: usize },

    #[error("insufficient exemplars: requested {requested}, problem has {available}")]
    InsufficientExemplars { requested: usize, available: usize },

    #[error("unsupported language {0:?}")]
    UnsupportedLanguage(String),

    #[error("empty program")]
    EmptyProgram,

    #[error("no top-level unit found")]
    NoTopLevelUnit,

    #[error("unmergeable headers: {0}")]
    HeaderConflict(String),

    #[error("invalid test program: {0}")]
    InvalidProgram(String),

    #[error("language {0:?} does not support session mode")]
    SessionUnsupported(String),

    #[error("case count mismatch: {results} results for {cases} cases")]
    CaseCountMismatch { results: usize, cases: usize },

    #[error("invalid metric arguments: {0}")]
    InvalidMetricArgs(String),

    #[error("{0:?} is not a compiled language")]
    NotCompiledLanguage(String),

    #[error("difficulty vote requires exactly {expected} flags, got {actual}")]
    VoteArity { expected: usize, actual: usize },

    #[error("no labels found for problem id {0:?}")]
    UnresolvableProblem(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("provider error: {0}")]
    Provider(String),

    #[error("credential environment variable {0} is not set")]
    CredentialMissing(String),

    #[error("replay fixture has no entry for prompt digest {0}")]
    FixtureMiss(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
