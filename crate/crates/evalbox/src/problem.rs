//! Problem datasets: loading, validation, and prompt generation.
//!
//! A problem file is UTF-8 with one JSON record per line:
//!
//! ```json
//! {"id": "py-001", "question": "...", "language": "python",
//!  "test_kind": "autoeval", "test_code": "assert f(1) == 2",
//!  "canonical_solution": "def f(x): return x + 1",
//!  "labels": {"domain": "BP", "difficulty": "easy", "natural_language": "en"}}
//! ```
//!
//! OJ records carry `"test_kind": "oj"` and `"cases": [{"stdin": ...,
//! "expected_stdout": ...}]` instead of `test_code`. Optional fields:
//! `entry_class` (multi-file languages) and `exemplars` (few-shot pairs).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;

/// Application-domain tag (closed 12-tag set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    BP,
    AP,
    SE,
    DP,
    MA,
    DW,
    ML,
    SC,
    DB,
    MM,
    OS,
    Others,
}

impl Domain {
    pub const ALL: &'static [Domain] = &[
        Domain::BP,
        Domain::AP,
        Domain::SE,
        Domain::DP,
        Domain::MA,
        Domain::DW,
        Domain::ML,
        Domain::SC,
        Domain::DB,
        Domain::MM,
        Domain::OS,
        Domain::Others,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Domain::BP => "BP",
            Domain::AP => "AP",
            Domain::SE => "SE",
            Domain::DP => "DP",
            Domain::MA => "MA",
            Domain::DW => "DW",
            Domain::ML => "ML",
            Domain::SC => "SC",
            Domain::DB => "DB",
            Domain::MM => "MM",
            Domain::OS => "OS",
            Domain::Others => "Others",
        }
    }
}

/// Three-level difficulty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub fn name(&self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

/// Natural language of the question text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NaturalLanguage {
    En,
    Zh,
}

impl NaturalLanguage {
    pub fn name(&self) -> &'static str {
        match self {
            NaturalLanguage::En => "en",
            NaturalLanguage::Zh => "zh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub domain: Domain,
    pub difficulty: Difficulty,
    pub natural_language: NaturalLanguage,
}

/// One stdin/expected-stdout pair for OJ judging.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IOCase {
    pub stdin: String,
    pub expected_stdout: String,
}

/// How a problem is tested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestSpec {
    /// Model code is concatenated with a test script; zero exit = pass.
    AutoEval { test_code: String },
    /// A standalone program is run once per case; stdout is compared.
    CommonOj { cases: Vec<IOCase> },
}

/// A (question, solution) pair used for few-shot prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exemplar {
    pub question: String,
    pub solution: String,
}

/// One evaluation item.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub id: String,
    pub question: String,
    pub programming_language: Language,
    pub test_spec: TestSpec,
    pub reference_solution: String,
    pub labels: Labels,
    pub entry_class: Option<String>,
    pub few_shot_exemplars: Vec<Exemplar>,
}

/// On-disk record shape. Kept separate from `Problem` so the file schema
/// stays stable regardless of internal naming.
#[derive(Debug, Serialize, Deserialize)]
struct ProblemRecord {
    id: String,
    question: String,
    language: Language,
    test_kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    test_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cases: Option<Vec<IOCase>>,
    canonical_solution: String,
    labels: Labels,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entry_class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exemplars: Option<Vec<Exemplar>>,
}

impl ProblemRecord {
    fn into_problem(self, line: usize) -> Result<Problem> {
        let bad = |message: String| Error::DatasetFormat { line, message };
        if self.question.is_empty() {
            return Err(bad("question must be nonempty".into()));
        }
        if self.canonical_solution.is_empty() {
            return Err(bad("canonical_solution must be nonempty".into()));
        }
        let test_spec = match self.test_kind.as_str() {
            "autoeval" => {
                let test_code = self
                    .test_code
                    .ok_or_else(|| bad("autoeval record requires test_code".into()))?;
                if test_code.is_empty() {
                    return Err(bad("autoeval test_code must be nonempty".into()));
                }
                TestSpec::AutoEval { test_code }
            }
            "oj" => {
                let cases = self
                    .cases
                    .ok_or_else(|| bad("oj record requires cases".into()))?;
                if cases.is_empty() {
                    return Err(bad("oj record requires at least one case".into()));
                }
                TestSpec::CommonOj { cases }
            }
            other => return Err(bad(format!("unknown test_kind {other:?}"))),
        };
        Ok(Problem {
            id: self.id,
            question: self.question,
            programming_language: self.language,
            test_spec,
            reference_solution: self.canonical_solution,
            labels: self.labels,
            entry_class: self.entry_class,
            few_shot_exemplars: self.exemplars.unwrap_or_default(),
        })
    }

    fn from_problem(problem: &Problem) -> ProblemRecord {
        let (test_kind, test_code, cases) = match &problem.test_spec {
            TestSpec::AutoEval { test_code } => {
                ("autoeval".to_string(), Some(test_code.clone()), None)
            }
            TestSpec::CommonOj { cases } => ("oj".to_string(), None, Some(cases.clone())),
        };
        ProblemRecord {
            id: problem.id.clone(),
            question: problem.question.clone(),
            language: problem.programming_language.clone(),
            test_kind,
            test_code,
            cases,
            canonical_solution: problem.reference_solution.clone(),
            labels: problem.labels,
            entry_class: problem.entry_class.clone(),
            exemplars: if problem.few_shot_exemplars.is_empty() {
                None
            } else {
                Some(problem.few_shot_exemplars.clone())
            },
        }
    }
}

/// Load all problems from a line-delimited problem file.
///
/// Every record is validated; the first malformed record aborts the load
/// with its line number. Ids must be unique within the file.
pub fn load_problems(path: impl AsRef<Path>) -> Result<Vec<Problem>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut problems = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ProblemRecord =
            serde_json::from_str(&line).map_err(|e| Error::DatasetFormat {
                line: line_no,
                message: e.to_string(),
            })?;
        if seen.insert(record.id.clone(), line_no).is_some() {
            return Err(Error::DuplicateProblemId {
                id: record.id,
                line: line_no,
            });
        }
        problems.push(record.into_problem(line_no)?);
    }
    Ok(problems)
}

/// Serialize problems back to the line-delimited format.
pub fn save_problems(path: impl AsRef<Path>, problems: &[Problem]) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    for problem in problems {
        let record = ProblemRecord::from_problem(problem);
        let json = serde_json::to_string(&record)?;
        writeln!(file, "{json}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// An immutable, indexed problem collection, shareable across threads.
#[derive(Debug, Clone)]
pub struct Dataset {
    problems: Arc<Vec<Problem>>,
    by_id: Arc<HashMap<String, usize>>,
}

impl Dataset {
    pub fn new(problems: Vec<Problem>) -> Dataset {
        let by_id = problems
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        Dataset {
            problems: Arc::new(problems),
            by_id: Arc::new(by_id),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Dataset> {
        Ok(Dataset::new(load_problems(path)?))
    }

    pub fn get(&self, id: &str) -> Option<&Problem> {
        self.by_id.get(id).map(|&i| &self.problems[i])
    }

    pub fn problems(&self) -> &[Problem] {
        &self.problems
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn labels_of(&self, id: &str) -> Option<(Labels, Language)> {
        self.get(id)
            .map(|p| (p.labels, p.programming_language.clone()))
    }

    /// Summary statistics over the dataset.
    pub fn stats(&self) -> DatasetStats {
        let mut stats = DatasetStats {
            problems: self.problems.len(),
            ..DatasetStats::default()
        };
        for p in self.problems.iter() {
            match p.labels.difficulty {
                Difficulty::Easy => stats.easy += 1,
                Difficulty::Medium => stats.medium += 1,
                Difficulty::Hard => stats.hard += 1,
            }
            match &p.test_spec {
                TestSpec::AutoEval { .. } => stats.autoeval += 1,
                TestSpec::CommonOj { cases } => {
                    stats.oj += 1;
                    stats.total_cases += cases.len();
                }
            }
        }
        stats
    }
}

/// Dataset-level counts used by validation hooks and reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub problems: usize,
    pub easy: usize,
    pub medium: usize,
    pub hard: usize,
    pub autoeval: usize,
    pub oj: usize,
    pub total_cases: usize,
}

/// Prompting paradigm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Paradigm {
    ZeroShot,
    FewShot(usize),
}

/// A prompt ready for model completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system_text: Option<String>,
    pub user_text: String,
    pub paradigm: Paradigm,
}

/// Build the prompt for a problem.
///
/// Zero-shot passes the question through verbatim with no system text.
/// Few-shot(k) prepends the problem's first k exemplar question/solution
/// pairs, each part separated by a blank line.
pub fn generate_prompt(
    problem: &Problem,
    paradigm: Paradigm,
    natural_language_override: Option<NaturalLanguage>,
) -> Result<Prompt> {
    // The override is accepted for interface completeness; questions are
    // stored in a single language per problem, so it cannot retarget text.
    let _ = natural_language_override;
    match paradigm {
        Paradigm::ZeroShot => Ok(Prompt {
            system_text: None,
            user_text: problem.question.clone(),
            paradigm,
        }),
        Paradigm::FewShot(k) => {
            if k < 1 || problem.few_shot_exemplars.len() < k {
                return Err(Error::InsufficientExemplars {
                    requested: k,
                    available: problem.few_shot_exemplars.len(),
                });
            }
            let mut parts = Vec::with_capacity(2 * k + 1);
            for exemplar in &problem.few_shot_exemplars[..k] {
                parts.push(exemplar.question.clone());
                parts.push(exemplar.solution.clone());
            }
            parts.push(problem.question.clone());
            Ok(Prompt {
                system_text: None,
                user_text: parts.join("\n\n"),
                paradigm,
            })
        }
    }
}

/// Default exemplar count for few-shot prompting.
pub const DEFAULT_FEW_SHOT_K: usize = 2;
