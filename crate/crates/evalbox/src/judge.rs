//! Turning run results into verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{RunResult, RunStatus};
use crate::extract::ExtractionResult;
use crate::problem::IOCase;

/// Why an attempt failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FailureKind {
    ExtractionFailed,
    CompileError,
    RuntimeError,
    WrongAnswer,
    TimeLimit,
    MemoryLimit,
    OutputLimit,
    SetupError,
}

impl FailureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FailureKind::ExtractionFailed => "ExtractionFailed",
            FailureKind::CompileError => "CompileError",
            FailureKind::RuntimeError => "RuntimeError",
            FailureKind::WrongAnswer => "WrongAnswer",
            FailureKind::TimeLimit => "TimeLimit",
            FailureKind::MemoryLimit => "MemoryLimit",
            FailureKind::OutputLimit => "OutputLimit",
            FailureKind::SetupError => "SetupError",
        }
    }
}

/// Per-problem verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub problem_id: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<FailureKind>,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_case: Option<Vec<bool>>,
}

impl Judgment {
    pub fn passed(problem_id: impl Into<String>) -> Judgment {
        Judgment {
            problem_id: problem_id.into(),
            passed: true,
            failure_kind: None,
            attempts: 1,
            per_case: None,
        }
    }

    pub fn failed(problem_id: impl Into<String>, kind: FailureKind) -> Judgment {
        Judgment {
            problem_id: problem_id.into(),
            passed: false,
            failure_kind: Some(kind),
            attempts: 1,
            per_case: None,
        }
    }
}

/// Map an extraction outcome plus an optional run result onto the failure
/// taxonomy. `output_mismatched` marks the OJ case where the program ran
/// cleanly but printed the wrong thing.
pub fn classify_failure(
    extraction: &ExtractionResult,
    result: Option<&RunResult>,
    output_mismatched: bool,
) -> FailureKind {
    if extraction.failed() {
        return FailureKind::ExtractionFailed;
    }
    match result {
        Some(result) => classify_run_failure(result, output_mismatched),
        None => FailureKind::SetupError,
    }
}

fn classify_run_failure(result: &RunResult, output_mismatched: bool) -> FailureKind {
    if let Some(compile) = &result.compile {
        if compile.exit_code != 0 {
            return FailureKind::CompileError;
        }
    }
    match result.status {
        RunStatus::TimeLimit => FailureKind::TimeLimit,
        RunStatus::MemoryLimit => FailureKind::MemoryLimit,
        RunStatus::OutputLimit => FailureKind::OutputLimit,
        RunStatus::SetupError => FailureKind::SetupError,
        RunStatus::Finished => {
            if result.exit_code != Some(0) {
                FailureKind::RuntimeError
            } else if output_mismatched {
                FailureKind::WrongAnswer
            } else {
                // a zero-exit finish with matching output is not a failure;
                // callers only reach here with one of the above set
                FailureKind::RuntimeError
            }
        }
    }
}

/// Judge an AutoEval run: pass iff the program finished, compiled cleanly
/// (when a compile phase exists), and exited zero.
pub fn judge_auto_eval(problem_id: &str, result: &RunResult) -> Judgment {
    if result.success() {
        Judgment::passed(problem_id)
    } else {
        Judgment::failed(problem_id, classify_run_failure(result, false))
    }
}

/// Canonical output form for OJ comparison: CRLF becomes LF, trailing
/// whitespace is stripped per line, and surrounding blank space is
/// trimmed. Callers compare the results byte-exact.
pub fn normalize_output(text: &str) -> String {
    let unified = text.replace("\r\n", "\n");
    let stripped: Vec<&str> = unified.lines().map(str::trim_end).collect();
    stripped.join("\n").trim().to_string()
}

/// Judge an OJ attempt: one run result per case, compared against the
/// expected stdout under [`normalize_output`].
pub fn judge_oj(problem_id: &str, results: &[RunResult], cases: &[IOCase]) -> Result<Judgment> {
    if results.len() != cases.len() {
        return Err(Error::CaseCountMismatch {
            results: results.len(),
            cases: cases.len(),
        });
    }
    if cases.is_empty() {
        return Err(Error::EmptyInput("judge_oj requires at least one case"));
    }
    let mut per_case = Vec::with_capacity(cases.len());
    let mut first_failure: Option<FailureKind> = None;
    for (result, case) in results.iter().zip(cases) {
        let clean_exit = result.success();
        let matched = clean_exit
            && normalize_output(&result.stdout) == normalize_output(&case.expected_stdout);
        per_case.push(matched);
        if !matched && first_failure.is_none() {
            first_failure = Some(classify_run_failure(result, clean_exit));
        }
    }
    let passed = per_case.iter().all(|&ok| ok);
    Ok(Judgment {
        problem_id: problem_id.to_string(),
        passed,
        failure_kind: if passed { None } else { first_failure },
        attempts: 1,
        per_case: Some(per_case),
    })
}
