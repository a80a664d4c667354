//! End-to-end evaluation: prompt → completion → extraction → synthesis →
//! execution → judgment, plus the single-pass, best-of-N, and reflection
//! strategies.

use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::executor::{Executor, Limits, RunResult, RunSpec};
use crate::extract::{extract_code, ExtractionResult};
use crate::judge::{judge_auto_eval, judge_oj, FailureKind, Judgment};
use crate::metrics::AttemptRecord;
use crate::problem::{generate_prompt, Dataset, Paradigm, Problem, Prompt, TestSpec};
use crate::provider::{Provider, SamplingParams, FEEDBACK_MARKER};
use crate::synthesis::{synthesize_auto_eval, synthesize_oj};

/// Evaluation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Single,
    Bon(u32),
    Reflect(u32),
}

impl Strategy {
    /// Parse `single`, `bon:N`, or `reflect:N`.
    pub fn parse(text: &str) -> Result<Strategy> {
        if text == "single" {
            return Ok(Strategy::Single);
        }
        if let Some(n) = text.strip_prefix("bon:") {
            let n: u32 = n
                .parse()
                .map_err(|_| Error::Config(format!("bad BoN count in {text:?}")))?;
            if n < 1 {
                return Err(Error::Config("BoN count must be at least 1".into()));
            }
            return Ok(Strategy::Bon(n));
        }
        if let Some(n) = text.strip_prefix("reflect:") {
            let n: u32 = n
                .parse()
                .map_err(|_| Error::Config(format!("bad reflection count in {text:?}")))?;
            if n < 1 {
                return Err(Error::Config("reflection count must be at least 1".into()));
            }
            return Ok(Strategy::Reflect(n));
        }
        Err(Error::Config(format!(
            "unknown strategy {text:?} (expected single, bon:N, or reflect:N)"
        )))
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Single => write!(f, "single"),
            Strategy::Bon(n) => write!(f, "bon:{n}"),
            Strategy::Reflect(n) => write!(f, "reflect:{n}"),
        }
    }
}

/// One prompt/response exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub round: u32,
    pub prompt: Prompt,
    pub response: String,
    pub verdict: Option<FailureKind>,
    pub passed: bool,
}

/// Outcome of evaluating one problem under a strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemResult {
    pub problem_id: String,
    pub judgment: Judgment,
    pub transcript: Vec<TranscriptEntry>,
    pub strategy: Strategy,
    /// Set when a BoN loop stopped before issuing all N completions.
    pub early_exit: bool,
}

/// Everything the pipeline learned about a single completion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttemptOutcome {
    pub extraction: ExtractionResult,
    pub run_results: Vec<RunResult>,
    pub judgment: Judgment,
}

impl AttemptOutcome {
    /// Compile success for this attempt, when a compiler was reached.
    pub fn compile_ok(&self) -> Option<bool> {
        self.run_results
            .first()
            .and_then(|r| r.compile.as_ref())
            .map(|c| c.exit_code == 0)
    }
}

/// Version tag of the feedback template; bump when the wording changes so
/// experiment logs stay comparable.
pub const FEEDBACK_TEMPLATE_VERSION: &str = "v1";

/// Byte cap applied to each stream excerpt embedded in feedback prompts.
pub const FEEDBACK_STREAM_CAP: usize = 2000;

/// The evaluation pipeline: an executor plus default limits.
#[derive(Clone)]
pub struct Pipeline {
    executor: Executor,
    limits: Limits,
}

impl Pipeline {
    pub fn new(executor: Executor) -> Pipeline {
        Pipeline {
            executor,
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Pipeline {
        self.limits = limits;
        self
    }

    pub fn executor(&self) -> &Executor {
        &self.executor
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    /// Judge bare code (no extraction step): synthesis → execution →
    /// judgment.
    pub fn judge_code(&self, problem: &Problem, code: &str) -> AttemptOutcome {
        let extraction = ExtractionResult {
            code: code.to_string(),
            method: crate::extract::ExtractionMethod::Fenced,
            block_tag: None,
        };
        self.judge_extracted(problem, extraction)
    }

    /// Judge a raw model response: extraction → synthesis → execution →
    /// judgment.
    pub fn judge_completion(&self, problem: &Problem, response: &str) -> AttemptOutcome {
        let extraction = extract_code(response, &problem.programming_language);
        self.judge_extracted(problem, extraction)
    }

    fn judge_extracted(&self, problem: &Problem, extraction: ExtractionResult) -> AttemptOutcome {
        if extraction.failed() {
            return AttemptOutcome {
                judgment: Judgment::failed(&problem.id, FailureKind::ExtractionFailed),
                run_results: Vec::new(),
                extraction,
            };
        }
        match &problem.test_spec {
            TestSpec::AutoEval { .. } => {
                let program = match synthesize_auto_eval(&extraction.code, problem) {
                    Ok(program) => program,
                    Err(err) => return self.synthesis_failed(problem, extraction, err),
                };
                let mut spec = RunSpec::new(program);
                spec.limits = self.limits;
                let result = self.executor.run_code(&spec);
                let judgment = judge_auto_eval(&problem.id, &result);
                AttemptOutcome {
                    extraction,
                    run_results: vec![result],
                    judgment,
                }
            }
            TestSpec::CommonOj { cases } => {
                let program = match synthesize_oj(&extraction.code, &problem.programming_language) {
                    Ok(program) => program,
                    Err(err) => return self.synthesis_failed(problem, extraction, err),
                };
                let mut results = Vec::with_capacity(cases.len());
                for case in cases {
                    let mut spec = RunSpec::new(program.clone());
                    spec.stdin = Some(case.stdin.clone());
                    spec.limits = self.limits;
                    results.push(self.executor.run_code(&spec));
                }
                let judgment = judge_oj(&problem.id, &results, cases)
                    .unwrap_or_else(|_| Judgment::failed(&problem.id, FailureKind::SetupError));
                AttemptOutcome {
                    extraction,
                    run_results: results,
                    judgment,
                }
            }
        }
    }

    fn synthesis_failed(
        &self,
        problem: &Problem,
        extraction: ExtractionResult,
        err: Error,
    ) -> AttemptOutcome {
        tracing::debug!(problem = %problem.id, error = %err, "synthesis failed");
        AttemptOutcome {
            judgment: Judgment::failed(&problem.id, FailureKind::SetupError),
            run_results: Vec::new(),
            extraction,
        }
    }

    /// Run the problem's own reference solution through synthesis,
    /// execution, and judgment, exactly as a completion would be judged.
    pub fn verify_reference(&self, problem: &Problem) -> Judgment {
        self.judge_code(problem, &problem.reference_solution)
            .judgment
    }

    /// Single-pass evaluation: one prompt, one completion, one judgment.
    pub fn eval_single(
        &self,
        problem: &Problem,
        provider: &dyn Provider,
        params: &SamplingParams,
    ) -> ProblemResult {
        let round = self.run_round(problem, provider, params, None, 1);
        ProblemResult {
            problem_id: problem.id.clone(),
            judgment: round.judgment,
            transcript: round.transcript,
            strategy: Strategy::Single,
            early_exit: false,
        }
    }

    /// Best-of-N: n independent completions; the problem counts as solved
    /// when any attempt passes. Stops early on the first pass.
    pub fn eval_bon(
        &self,
        problem: &Problem,
        provider: &dyn Provider,
        params: &SamplingParams,
        n: u32,
    ) -> ProblemResult {
        if params.temperature == 0.0 && n > 1 {
            tracing::warn!(
                problem = %problem.id,
                "BoN with temperature 0 repeats identical attempts against a deterministic provider"
            );
        }
        let mut transcript = Vec::new();
        let mut final_judgment: Option<Judgment> = None;
        let mut early_exit = false;
        let mut rounds = 0;
        for round in 1..=n.max(1) {
            let round_result = self.run_round(problem, provider, params, None, round);
            rounds = round;
            transcript.extend(round_result.transcript);
            let passed = round_result.judgment.passed;
            final_judgment = Some(round_result.judgment);
            if passed {
                early_exit = round < n;
                break;
            }
        }
        let mut judgment = final_judgment.expect("at least one round runs");
        judgment.attempts = rounds;
        ProblemResult {
            problem_id: problem.id.clone(),
            judgment,
            transcript,
            strategy: Strategy::Bon(n),
            early_exit,
        }
    }

    /// Reflection: round one is a plain attempt; each later round embeds
    /// the previous round's execution feedback in the prompt. Stops at the
    /// first pass or after n rounds.
    pub fn eval_reflection(
        &self,
        problem: &Problem,
        provider: &dyn Provider,
        params: &SamplingParams,
        n: u32,
    ) -> ProblemResult {
        let mut transcript = Vec::new();
        let mut feedback: Option<String> = None;
        let mut final_judgment: Option<Judgment> = None;
        let mut rounds = 0;
        for round in 1..=n.max(1) {
            let round_result = self.run_round(problem, provider, params, feedback.take(), round);
            rounds = round;
            let passed = round_result.judgment.passed;
            let outcome = round_result.outcome;
            transcript.extend(round_result.transcript);
            final_judgment = Some(round_result.judgment);
            if passed {
                break;
            }
            if round < n {
                feedback = Some(build_feedback_prompt(problem, outcome.as_ref()));
            }
        }
        let mut judgment = final_judgment.expect("at least one round runs");
        judgment.attempts = rounds;
        ProblemResult {
            problem_id: problem.id.clone(),
            judgment,
            transcript,
            strategy: Strategy::Reflect(n),
            early_exit: false,
        }
    }
}

struct RoundResult {
    judgment: Judgment,
    transcript: Vec<TranscriptEntry>,
    outcome: Option<AttemptOutcome>,
}

impl Pipeline {
    fn run_round(
        &self,
        problem: &Problem,
        provider: &dyn Provider,
        params: &SamplingParams,
        feedback_user_text: Option<String>,
        round: u32,
    ) -> RoundResult {
        let prompt = match feedback_user_text {
            Some(user_text) => Prompt {
                system_text: None,
                user_text,
                paradigm: Paradigm::ZeroShot,
            },
            None => generate_prompt(problem, Paradigm::ZeroShot, None)
                .expect("zero-shot prompt generation is total"),
        };

        let response = match provider.complete(&prompt, params) {
            Ok(response) => response,
            Err(err) => {
                tracing::warn!(problem = %problem.id, error = %err, "completion failed");
                return RoundResult {
                    judgment: Judgment::failed(&problem.id, FailureKind::SetupError),
                    transcript: vec![TranscriptEntry {
                        round,
                        prompt,
                        response: String::new(),
                        verdict: Some(FailureKind::SetupError),
                        passed: false,
                    }],
                    outcome: None,
                };
            }
        };

        let outcome = self.judge_completion(problem, &response);
        let entry = TranscriptEntry {
            round,
            prompt,
            response,
            verdict: outcome.judgment.failure_kind,
            passed: outcome.judgment.passed,
        };
        RoundResult {
            judgment: outcome.judgment.clone(),
            transcript: vec![entry],
            outcome: Some(outcome),
        }
    }
}

fn cap_excerpt(text: &str, cap: usize) -> &str {
    if text.len() <= cap {
        return text;
    }
    let mut cut = cap;
    while cut > 0 && !text.is_char_boundary(cut) {
        cut -= 1;
    }
    &text[..cut]
}

/// Build the repair prompt from the previous round: the original question,
/// the previous code fenced, the verdict name, and capped excerpts of the
/// compiler and runtime output.
pub fn build_feedback_prompt(problem: &Problem, outcome: Option<&AttemptOutcome>) -> String {
    let lang = problem.programming_language.name();
    let mut text = String::new();
    text.push_str(FEEDBACK_MARKER);
    text.push_str("\n\nProblem:\n");
    text.push_str(&problem.question);
    text.push_str("\n\nPrevious code:\n");
    let previous_code = outcome.map(|o| o.extraction.code.as_str()).unwrap_or("");
    text.push_str(&format!("```{lang}\n{previous_code}\n```\n"));
    let verdict = outcome
        .and_then(|o| o.judgment.failure_kind)
        .map(|k| k.name())
        .unwrap_or("SetupError");
    text.push_str(&format!("\nVerdict: {verdict}\n"));
    if let Some(outcome) = outcome {
        if let Some(run) = outcome.run_results.first() {
            if let Some(compile) = &run.compile {
                if compile.exit_code != 0 {
                    text.push_str("\nCompiler output:\n");
                    text.push_str(cap_excerpt(&compile.stderr, FEEDBACK_STREAM_CAP));
                    text.push('\n');
                }
            }
            if !run.stderr.is_empty() {
                text.push_str("\nRuntime stderr:\n");
                text.push_str(cap_excerpt(&run.stderr, FEEDBACK_STREAM_CAP));
                text.push('\n');
            }
            if !run.stdout.is_empty() {
                text.push_str("\nRuntime stdout (truncated):\n");
                text.push_str(cap_excerpt(&run.stdout, FEEDBACK_STREAM_CAP));
                text.push('\n');
            }
        }
    }
    text.push_str(&format!(
        "\nProvide a corrected {lang} solution in a fenced code block.\n"
    ));
    text
}

/// Evaluate one problem under a strategy.
pub fn eval_problem(
    pipeline: &Pipeline,
    problem: &Problem,
    provider: &dyn Provider,
    params: &SamplingParams,
    strategy: Strategy,
) -> ProblemResult {
    match strategy {
        Strategy::Single => pipeline.eval_single(problem, provider, params),
        Strategy::Bon(n) => pipeline.eval_bon(problem, provider, params, n),
        Strategy::Reflect(n) => pipeline.eval_reflection(problem, provider, params, n),
    }
}

/// Batch evaluation over a dataset with a bounded fan-out. Problems are
/// processed concurrently; per-problem strategy rounds stay sequential.
/// Results come back in dataset order.
pub fn eval_batch(
    pipeline: &Pipeline,
    dataset: &Dataset,
    provider: &dyn Provider,
    params: &SamplingParams,
    strategy: Strategy,
) -> Vec<ProblemResult> {
    let problems = dataset.problems();
    let results: Vec<Mutex<Option<ProblemResult>>> =
        (0..problems.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = pipeline.executor().workers().min(problems.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= problems.len() {
                    break;
                }
                let result = eval_problem(pipeline, &problems[index], provider, params, strategy);
                *results[index].lock().expect("result slot") = Some(result);
            });
        }
    });

    results
        .into_iter()
        .map(|slot| slot.into_inner().expect("slot").expect("result filled"))
        .collect()
}

/// Flatten problem results into per-attempt judgment-log records.
pub fn attempt_records(results: &[ProblemResult], dataset: &Dataset) -> Vec<AttemptRecord> {
    let mut records = Vec::new();
    for result in results {
        let language = dataset
            .get(&result.problem_id)
            .map(|p| p.programming_language.clone())
            .unwrap_or(crate::lang::Language::Plugin("unknown".to_string()));
        if result.transcript.is_empty() {
            records.push(AttemptRecord {
                problem_id: result.problem_id.clone(),
                round: 1,
                language,
                passed: result.judgment.passed,
                failure_kind: result.judgment.failure_kind,
                compile_ok: None,
            });
            continue;
        }
        for entry in &result.transcript {
            records.push(AttemptRecord {
                problem_id: result.problem_id.clone(),
                round: entry.round,
                language: language.clone(),
                passed: entry.passed,
                failure_kind: entry.verdict,
                compile_ok: compile_ok_from_verdict(entry, &language),
            });
        }
    }
    records
}

fn compile_ok_from_verdict(
    entry: &TranscriptEntry,
    language: &crate::lang::Language,
) -> Option<bool> {
    if !language.is_compiled() {
        return None;
    }
    match entry.verdict {
        None => Some(true), // passed: compile necessarily succeeded
        Some(FailureKind::CompileError) => Some(false),
        Some(FailureKind::ExtractionFailed) | Some(FailureKind::SetupError) => Some(false),
        // ran past the compiler
        Some(_) => Some(true),
    }
}

/// Append transcript entries as JSON lines: problem id, round, prompt,
/// response, verdict.
pub fn write_transcript_log(path: impl AsRef<Path>, results: &[ProblemResult]) -> Result<()> {
    #[derive(Serialize)]
    struct LogLine<'a> {
        problem_id: &'a str,
        round: u32,
        prompt: &'a Prompt,
        response: &'a str,
        verdict: Option<&'static str>,
        passed: bool,
    }
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for result in results {
        for entry in &result.transcript {
            let line = LogLine {
                problem_id: &result.problem_id,
                round: entry.round,
                prompt: &entry.prompt,
                response: &entry.response,
                verdict: entry.verdict.map(|v| v.name()),
                passed: entry.passed,
            };
            writeln!(file, "{}", serde_json::to_string(&line)?).map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Language;
    use crate::problem::{Difficulty, Domain, IOCase, Labels, NaturalLanguage};
    use crate::provider::FixOnFeedbackProvider;
    use crate::runner::Registry;

    fn pipeline() -> Pipeline {
        Pipeline::new(Executor::new(Registry::builtin()))
    }

    fn python_problem(id: &str) -> Problem {
        Problem {
            id: id.to_string(),
            question: format!("Write a function add(a, b) returning a+b for problem {id}."),
            programming_language: Language::Python,
            test_spec: TestSpec::AutoEval {
                test_code: "assert add(2, 3) == 5\nassert add(-1, 1) == 0".to_string(),
            },
            reference_solution: "def add(a, b):\n    return a + b".to_string(),
            labels: Labels {
                domain: Domain::BP,
                difficulty: Difficulty::Easy,
                natural_language: NaturalLanguage::En,
            },
            entry_class: None,
            few_shot_exemplars: Vec::new(),
        }
    }

    fn oj_problem(id: &str) -> Problem {
        Problem {
            id: id.to_string(),
            question: "Read one integer and print its double.".to_string(),
            programming_language: Language::Python,
            test_spec: TestSpec::CommonOj {
                cases: vec![
                    IOCase {
                        stdin: "3\n".into(),
                        expected_stdout: "6\n".into(),
                    },
                    IOCase {
                        stdin: "0\n".into(),
                        expected_stdout: "0\n".into(),
                    },
                ],
            },
            reference_solution: "print(int(input()) * 2)".to_string(),
            labels: Labels {
                domain: Domain::BP,
                difficulty: Difficulty::Easy,
                natural_language: NaturalLanguage::En,
            },
            entry_class: None,
            few_shot_exemplars: Vec::new(),
        }
    }

    struct CannedProvider(Vec<String>, AtomicUsize);

    impl CannedProvider {
        fn new(responses: Vec<&str>) -> CannedProvider {
            CannedProvider(
                responses.into_iter().map(|s| s.to_string()).collect(),
                AtomicUsize::new(0),
            )
        }
    }

    impl Provider for CannedProvider {
        fn complete(&self, _prompt: &Prompt, _params: &SamplingParams) -> Result<String> {
            let i = self.1.fetch_add(1, Ordering::SeqCst);
            Ok(self.0[i.min(self.0.len() - 1)].clone())
        }
    }

    #[test]
    fn reference_solutions_verify() {
        let pipeline = pipeline();
        assert!(pipeline.verify_reference(&python_problem("p1")).passed);
        assert!(pipeline.verify_reference(&oj_problem("p2")).passed);
    }

    #[test]
    fn broken_reference_fails() {
        let mut problem = python_problem("p1");
        problem.reference_solution = "def add(a, b):\n    return a - b".to_string();
        let judgment = pipeline().verify_reference(&problem);
        assert!(!judgment.passed);
        assert_eq!(judgment.failure_kind, Some(FailureKind::RuntimeError));
    }

    #[test]
    fn eval_single_full_path() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let provider = CannedProvider::new(vec![
            "Sure!\n```python\ndef add(a, b):\n    return a + b\n```",
        ]);
        let result = pipeline.eval_single(&problem, &provider, &SamplingParams::default());
        assert!(result.judgment.passed);
        assert_eq!(result.transcript.len(), 1);
        assert_eq!(result.judgment.attempts, 1);
    }

    #[test]
    fn eval_single_no_code_is_extraction_failed() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let provider = CannedProvider::new(vec!["I am not able to help with that."]);
        let result = pipeline.eval_single(&problem, &provider, &SamplingParams::default());
        assert!(!result.judgment.passed);
        assert_eq!(
            result.judgment.failure_kind,
            Some(FailureKind::ExtractionFailed)
        );
    }

    #[test]
    fn eval_single_compile_broken_cpp() {
        let pipeline = pipeline();
        let mut problem = python_problem("p1");
        problem.programming_language = Language::Cpp;
        problem.test_spec = TestSpec::AutoEval {
            test_code: "int main(){ return add(2,3) == 5 ? 0 : 1; }".to_string(),
        };
        problem.reference_solution = "int add(int a,int b){return a+b;}".to_string();
        let provider = CannedProvider::new(vec!["```cpp\nint add(int a,int b){return a+b\n```"]);
        let result = pipeline.eval_single(&problem, &provider, &SamplingParams::default());
        assert!(!result.judgment.passed);
        assert_eq!(
            result.judgment.failure_kind,
            Some(FailureKind::CompileError)
        );
    }

    #[test]
    fn bon_any_pass_semantics() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let provider = CannedProvider::new(vec![
            "```python\ndef add(a, b):\n    return a - b\n```",
            "```python\ndef add(a, b):\n    return a + b\n```",
            "```python\ndef add(a, b):\n    return 0\n```",
        ]);
        let result = pipeline.eval_bon(&problem, &provider, &SamplingParams::default(), 3);
        assert!(result.judgment.passed);
        assert!(result.judgment.attempts <= 3);
        assert_eq!(result.judgment.attempts, 2);
        assert!(result.early_exit);
    }

    #[test]
    fn bon_exhaustion() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let provider =
            CannedProvider::new(vec!["```python\ndef add(a, b):\n    return a - b\n```"]);
        let result = pipeline.eval_bon(&problem, &provider, &SamplingParams::default(), 3);
        assert!(!result.judgment.passed);
        assert_eq!(result.judgment.attempts, 3);
        assert!(!result.early_exit);
        // every completion issued lands in exactly one transcript entry
        assert_eq!(result.transcript.len(), 3);
    }

    #[test]
    fn bon_and_reflect_with_n_1_match_single() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let response = "```python\ndef add(a, b):\n    return a + b\n```";
        let single = pipeline.eval_single(
            &problem,
            &CannedProvider::new(vec![response]),
            &SamplingParams::default(),
        );
        let bon = pipeline.eval_bon(
            &problem,
            &CannedProvider::new(vec![response]),
            &SamplingParams::default(),
            1,
        );
        let reflect = pipeline.eval_reflection(
            &problem,
            &CannedProvider::new(vec![response]),
            &SamplingParams::default(),
            1,
        );
        assert_eq!(single.judgment, bon.judgment);
        assert_eq!(single.judgment, reflect.judgment);
        assert_eq!(bon.transcript.len(), 1);
        assert_eq!(reflect.transcript.len(), 1);
    }

    #[test]
    fn reflection_fixes_on_feedback() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let dataset = Dataset::new(vec![problem.clone()]);
        let provider = FixOnFeedbackProvider::from_dataset(dataset);
        let result = pipeline.eval_reflection(&problem, &provider, &SamplingParams::default(), 2);
        assert!(result.judgment.passed);
        assert_eq!(result.judgment.attempts, 2);
        assert_eq!(result.transcript.len(), 2);
        // round 2's prompt embeds the feedback marker
        assert!(result.transcript[1]
            .prompt
            .user_text
            .starts_with(FEEDBACK_MARKER));
    }

    #[test]
    fn reflection_exhausts_on_unfixable() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let provider = CannedProvider::new(vec!["```python\nx = 1\n```"]);
        let result = pipeline.eval_reflection(&problem, &provider, &SamplingParams::default(), 3);
        assert!(!result.judgment.passed);
        assert_eq!(result.judgment.attempts, 3);
    }

    #[test]
    fn strategy_parsing() {
        assert_eq!(Strategy::parse("single").unwrap(), Strategy::Single);
        assert_eq!(Strategy::parse("bon:4").unwrap(), Strategy::Bon(4));
        assert_eq!(Strategy::parse("reflect:2").unwrap(), Strategy::Reflect(2));
        assert!(Strategy::parse("bon:0").is_err());
        assert!(Strategy::parse("other").is_err());
    }

    #[test]
    fn batch_preserves_order_and_counts() {
        let pipeline = pipeline();
        let problems: Vec<Problem> = (0..6).map(|i| python_problem(&format!("p{i}"))).collect();
        let dataset = Dataset::new(problems);
        let provider =
            CannedProvider::new(vec!["```python\ndef add(a, b):\n    return a + b\n```"]);
        let results = eval_batch(
            &pipeline,
            &dataset,
            &provider,
            &SamplingParams::default(),
            Strategy::Single,
        );
        assert_eq!(results.len(), 6);
        for (i, result) in results.iter().enumerate() {
            assert_eq!(result.problem_id, format!("p{i}"));
            assert!(result.judgment.passed);
        }
        let records = attempt_records(&results, &dataset);
        assert_eq!(records.len(), 6);
    }

    #[test]
    fn feedback_prompt_contains_all_sections() {
        let pipeline = pipeline();
        let problem = python_problem("p1");
        let outcome = pipeline.judge_code(&problem, "def add(a,b):\n    return a - b");
        let feedback = build_feedback_prompt(&problem, Some(&outcome));
        assert!(feedback.starts_with(FEEDBACK_MARKER));
        assert!(feedback.contains(&problem.question));
        assert!(feedback.contains("return a - b"));
        assert!(feedback.contains("Verdict: RuntimeError"));
        assert!(feedback.contains("AssertionError"));
    }
}
