//! Pass rates, pass@k, compile rates, difficulty voting, and grouped
//! reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::judge::{FailureKind, Judgment};
use crate::lang::Language;
use crate::problem::{Dataset, Difficulty};

/// One judgment-log record: a single attempt at a single problem.
/// Records are append-only, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub problem_id: String,
    pub round: u32,
    pub language: Language,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<FailureKind>,
    /// Whether the compile phase exited zero. `None` for attempts that
    /// never reached a compiler (interpreted languages, extraction
    /// failures, setup errors).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_ok: Option<bool>,
}

pub fn write_attempt_log(path: impl AsRef<Path>, records: &[AttemptRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    for record in records {
        let json = serde_json::to_string(record)?;
        writeln!(file, "{json}").map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn read_attempt_log(path: impl AsRef<Path>) -> Result<Vec<AttemptRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::DatasetFormat {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Fraction of judgments that passed. Errors on an empty list.
pub fn pass_at_1(judgments: &[Judgment]) -> Result<f64> {
    if judgments.is_empty() {
        return Err(Error::EmptyInput(
            "pass_at_1 requires at least one judgment",
        ));
    }
    let passed = judgments.iter().filter(|j| j.passed).count();
    Ok(passed as f64 / judgments.len() as f64)
}

/// Unbiased any-of-k estimator: the probability that at least one of k
/// draws (without replacement) from n attempts, c of which passed, is a
/// pass. Computed as `1 - prod_{i=0}^{k-1} (n-c-i)/(n-i)`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64> {
    if c > n {
        return Err(Error::InvalidMetricArgs(format!("c={c} exceeds n={n}")));
    }
    if k < 1 || k > n {
        return Err(Error::InvalidMetricArgs(format!(
            "k={k} outside 1..=n ({n})"
        )));
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss_all = 1.0f64;
    for i in 0..k {
        miss_all *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss_all)
}

/// Fraction of attempts in the filtered compiled languages whose compile
/// phase exited zero. Attempts that never reached the compiler count as
/// compile failures.
pub fn compile_pass_rate(records: &[AttemptRecord], filter: &[Language]) -> Result<f64> {
    if filter.is_empty() {
        return Err(Error::EmptyInput(
            "compile_pass_rate requires a language filter",
        ));
    }
    for lang in filter {
        if !lang.is_compiled() {
            return Err(Error::NotCompiledLanguage(lang.name().to_string()));
        }
    }
    let selected: Vec<&AttemptRecord> = records
        .iter()
        .filter(|r| filter.contains(&r.language))
        .collect();
    if selected.is_empty() {
        return Err(Error::EmptyInput(
            "no attempts in the filtered compiled languages",
        ));
    }
    let passed = selected
        .iter()
        .filter(|r| r.compile_ok == Some(true))
        .count();
    Ok(passed as f64 / selected.len() as f64)
}

/// Classify difficulty from six correctness votes: at most one correct is
/// hard, five or more is easy, the rest are medium.
pub fn vote_difficulty(correct_flags: &[bool]) -> Result<Difficulty> {
    Ok(vote_difficulty_with_filter(correct_flags, false)?
        .expect("filter disabled always classifies"))
}

/// As [`vote_difficulty`], with an optional filter that drops problems
/// every voter solved (returns `None` for them).
pub fn vote_difficulty_with_filter(
    correct_flags: &[bool],
    drop_all_correct: bool,
) -> Result<Option<Difficulty>> {
    if correct_flags.len() != 6 {
        return Err(Error::VoteArity {
            expected: 6,
            actual: correct_flags.len(),
        });
    }
    let c = correct_flags.iter().filter(|&&f| f).count();
    if drop_all_correct && c == 6 {
        return Ok(None);
    }
    let difficulty = if c <= 1 {
        Difficulty::Hard
    } else if c >= 5 {
        Difficulty::Easy
    } else {
        Difficulty::Medium
    };
    Ok(Some(difficulty))
}

/// Grouping axis for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Domain,
    ProgrammingLanguage,
    Difficulty,
    NaturalLanguage,
}

impl GroupBy {
    pub fn parse(name: &str) -> Result<GroupBy> {
        match name {
            "domain" => Ok(GroupBy::Domain),
            "programming_language" | "language" => Ok(GroupBy::ProgrammingLanguage),
            "difficulty" => Ok(GroupBy::Difficulty),
            "natural_language" => Ok(GroupBy::NaturalLanguage),
            other => Err(Error::Config(format!("unknown group key {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GroupBy::Domain => "domain",
            GroupBy::ProgrammingLanguage => "programming_language",
            GroupBy::Difficulty => "difficulty",
            GroupBy::NaturalLanguage => "natural_language",
        }
    }
}

pub const OVERALL_KEY: &str = "Overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub group_key: String,
    pub pass_count: usize,
    pub total: usize,
    pub pass_rate: f64,
}

/// Grouped pass rates plus compile rates over the compiled-language
/// subset. Rows are percent-free fractions in `[0, 1]`, sorted by key,
/// with an `Overall` row appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub group_by: GroupBy,
    pub rows: Vec<MetricsRow>,
    pub compile_rows: Vec<MetricsRow>,
}

impl MetricsReport {
    /// Plain-text table rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pass rates by {}", self.group_by.name());
        let _ = writeln!(
            out,
            "{:<24} {:>6} {:>6} {:>9}",
            "group", "pass", "total", "rate"
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>6} {:>9.4}",
                row.group_key, row.pass_count, row.total, row.pass_rate
            );
        }
        if !self.compile_rows.is_empty() {
            let _ = writeln!(out, "\ncompile pass rates (compiled languages)");
            let _ = writeln!(
                out,
                "{:<24} {:>6} {:>6} {:>9}",
                "group", "pass", "total", "rate"
            );
            for row in &self.compile_rows {
                let _ = writeln!(
                    out,
                    "{:<24} {:>6} {:>6} {:>9.4}",
                    row.group_key, row.pass_count, row.total, row.pass_rate
                );
            }
        }
        out
    }
}

fn group_key(
    record_language: &Language,
    labels: crate::problem::Labels,
    group_by: GroupBy,
) -> String {
    match group_by {
        GroupBy::Domain => labels.domain.name().to_string(),
        GroupBy::ProgrammingLanguage => record_language.name().to_string(),
        GroupBy::Difficulty => labels.difficulty.name().to_string(),
        GroupBy::NaturalLanguage => labels.natural_language.name().to_string(),
    }
}

fn rows_from_counts(counts: BTreeMap<String, (usize, usize)>) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = counts
        .into_iter()
        .map(|(group_key, (pass_count, total))| MetricsRow {
            group_key,
            pass_count,
            total,
            pass_rate: pass_count as f64 / total as f64,
        })
        .collect();
    let pass_count: usize = rows.iter().map(|r| r.pass_count).sum();
    let total: usize = rows.iter().map(|r| r.total).sum();
    if total > 0 {
        rows.push(MetricsRow {
            group_key: OVERALL_KEY.to_string(),
            pass_count,
            total,
            pass_rate: pass_count as f64 / total as f64,
        });
    }
    rows
}

/// Build a grouped report from an attempt log.
///
/// Problem rows count each problem once, passed when any of its attempts
/// passed. Compile rows count individual attempts in compiled languages.
/// Every problem id must resolve to labels in the dataset.
pub fn aggregate(
    records: &[AttemptRecord],
    dataset: &Dataset,
    group_by: GroupBy,
) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput("aggregate requires at least one record"));
    }

    // per-problem outcome: any attempt passed
    let mut problems: BTreeMap<&str, (&AttemptRecord, bool)> = BTreeMap::new();
    for record in records {
        let entry = problems
            .entry(record.problem_id.as_str())
            .or_insert((record, false));
        entry.1 |= record.passed;
    }

    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (problem_id, (record, passed)) in &problems {
        let (labels, _) = dataset
            .labels_of(problem_id)
            .ok_or_else(|| Error::UnresolvableProblem(problem_id.to_string()))?;
        let key = group_key(&record.language, labels, group_by);
        let entry = counts.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if *passed {
            entry.0 += 1;
        }
    }

    let mut compile_counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for record in records {
        if !record.language.is_compiled() {
            continue;
        }
        let (labels, _) = dataset
            .labels_of(&record.problem_id)
            .ok_or_else(|| Error::UnresolvableProblem(record.problem_id.clone()))?;
        let key = group_key(&record.language, labels, group_by);
        let entry = compile_counts.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if record.compile_ok == Some(true) {
            entry.0 += 1;
        }
    }

    Ok(MetricsReport {
        group_by,
        rows: rows_from_counts(counts),
        compile_rows: rows_from_counts(compile_counts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Domain, Labels, NaturalLanguage, Problem, TestSpec};

    fn judgment(passed: bool) -> Judgment {
        Judgment {
            problem_id: "p".into(),
            passed,
            failure_kind: if passed {
                None
            } else {
                Some(FailureKind::WrongAnswer)
            },
            attempts: 1,
            per_case: None,
        }
    }

    #[test]
    fn pass_at_1_is_the_mean() {
        let js = vec![
            judgment(true),
            judgment(false),
            judgment(true),
            judgment(true),
        ];
        assert_eq!(pass_at_1(&js).unwrap(), 0.75);
        assert_eq!(pass_at_1(&[judgment(true)]).unwrap(), 1.0);
        assert_eq!(pass_at_1(&[judgment(false)]).unwrap(), 0.0);
        assert!(pass_at_1(&[]).is_err());
    }

    /// Independent oracle: enumerate every k-subset of n attempts (c of
    /// which pass) and count subsets containing at least one pass.
    fn pass_at_k_bruteforce(n: u64, c: u64, k: u64) -> f64 {
        let n = n as u32;
        let mut subsets = 0u64;
        let mut hits = 0u64;
        for mask in 0u64..(1 << n) {
            if mask.count_ones() as u64 != k {
                continue;
            }
            subsets += 1;
            // attempts 0..c pass, the rest fail
            if (0..c).any(|i| mask & (1 << i) != 0) {
                hits += 1;
            }
        }
        hits as f64 / subsets as f64
    }

    #[test]
    fn pass_at_k_matches_bruteforce_enumeration() {
        // frozen value from the oracle: n=4, c=2, k=2 -> 5/6
        assert!((pass_at_k(4, 2, 2).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(pass_at_k_bruteforce(4, 2, 2), 5.0 / 6.0);
        for n in 1..=8u64 {
            for c in 0..=n {
                for k in 1..=n {
                    let fast = pass_at_k(n, c, k).unwrap();
                    let slow = pass_at_k_bruteforce(n, c, k);
                    assert!(
                        (fast - slow).abs() < 1e-9,
                        "n={n} c={c} k={k}: {fast} vs {slow}"
                    );
                }
            }
        }
    }

    #[test]
    fn pass_at_k_edges() {
        assert_eq!(pass_at_k(5, 0, 3).unwrap(), 0.0);
        assert_eq!(pass_at_k(5, 5, 1).unwrap(), 1.0);
        assert!(pass_at_k(4, 5, 1).is_err());
        assert!(pass_at_k(4, 2, 0).is_err());
        assert!(pass_at_k(4, 2, 5).is_err());
    }

    #[test]
    fn pass_at_1_equals_c_over_n() {
        for n in 1..=10u64 {
            for c in 0..=n {
                let got = pass_at_k(n, c, 1).unwrap();
                assert!((got - c as f64 / n as f64).abs() < 1e-15, "n={n} c={c}");
            }
        }
    }

    #[test]
    fn pass_at_k_monotone_in_k_and_c() {
        for n in 1..=8u64 {
            for c in 0..=n {
                let mut prev = 0.0;
                for k in 1..=n {
                    let v = pass_at_k(n, c, k).unwrap();
                    assert!(v + 1e-12 >= prev, "k-monotonicity n={n} c={c} k={k}");
                    prev = v;
                }
            }
            for k in 1..=n {
                let mut prev = 0.0;
                for c in 0..=n {
                    let v = pass_at_k(n, c, k).unwrap();
                    assert!(v + 1e-12 >= prev, "c-monotonicity n={n} c={c} k={k}");
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn vote_difficulty_full_table() {
        for c in 0..=6usize {
            let flags: Vec<bool> = (0..6).map(|i| i < c).collect();
            let got = vote_difficulty(&flags).unwrap();
            let want = match c {
                0 | 1 => Difficulty::Hard,
                5 | 6 => Difficulty::Easy,
                _ => Difficulty::Medium,
            };
            assert_eq!(got, want, "c={c}");
        }
    }

    #[test]
    fn vote_difficulty_arity_checked() {
        assert!(vote_difficulty(&[true; 5]).is_err());
        assert!(vote_difficulty(&[true; 7]).is_err());
    }

    #[test]
    fn vote_filter_drops_all_correct() {
        assert_eq!(vote_difficulty_with_filter(&[true; 6], true).unwrap(), None);
        assert_eq!(
            vote_difficulty_with_filter(&[true; 6], false).unwrap(),
            Some(Difficulty::Easy)
        );
    }

    fn record(id: &str, lang: Language, passed: bool, compile_ok: Option<bool>) -> AttemptRecord {
        AttemptRecord {
            problem_id: id.into(),
            round: 1,
            language: lang,
            passed,
            failure_kind: None,
            compile_ok,
        }
    }

    fn dataset_with(ids: &[(&str, Domain, Language)]) -> Dataset {
        let problems: Vec<Problem> = ids
            .iter()
            .map(|(id, domain, lang)| Problem {
                id: id.to_string(),
                question: "q".into(),
                programming_language: lang.clone(),
                test_spec: TestSpec::AutoEval {
                    test_code: "t".into(),
                },
                reference_solution: "s".into(),
                labels: Labels {
                    domain: *domain,
                    difficulty: Difficulty::Easy,
                    natural_language: NaturalLanguage::En,
                },
                entry_class: None,
                few_shot_exemplars: Vec::new(),
            })
            .collect();
        Dataset::new(problems)
    }

    #[test]
    fn aggregate_by_domain() {
        let ds = dataset_with(&[
            ("b1", Domain::BP, Language::Python),
            ("b2", Domain::BP, Language::Python),
            ("m1", Domain::MA, Language::Python),
            ("m2", Domain::MA, Language::Python),
        ]);
        let records = vec![
            record("b1", Language::Python, true, None),
            record("b2", Language::Python, false, None),
            record("m1", Language::Python, true, None),
            record("m2", Language::Python, true, None),
        ];
        let report = aggregate(&records, &ds, GroupBy::Domain).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.rows[0].group_key, "BP");
        assert_eq!(report.rows[0].pass_rate, 0.5);
        assert_eq!(report.rows[1].group_key, "MA");
        assert_eq!(report.rows[1].pass_rate, 1.0);
        assert_eq!(report.rows[2].group_key, OVERALL_KEY);
        assert_eq!(report.rows[2].pass_rate, 0.75);
    }

    #[test]
    fn aggregate_overall_is_weighted_mean_and_totals_sum() {
        let ds = dataset_with(&[
            ("a", Domain::BP, Language::Python),
            ("b", Domain::MA, Language::Python),
            ("c", Domain::MA, Language::Python),
        ]);
        let records = vec![
            record("a", Language::Python, true, None),
            record("b", Language::Python, false, None),
            record("c", Language::Python, true, None),
        ];
        let report = aggregate(&records, &ds, GroupBy::Domain).unwrap();
        let overall = report.rows.last().unwrap();
        let groups = &report.rows[..report.rows.len() - 1];
        let total: usize = groups.iter().map(|r| r.total).sum();
        assert_eq!(total, 3);
        let weighted: f64 = groups
            .iter()
            .map(|r| r.pass_rate * r.total as f64)
            .sum::<f64>()
            / total as f64;
        assert_eq!(overall.pass_rate, weighted);
    }

    #[test]
    fn aggregate_unresolvable_problem_errors() {
        let ds = dataset_with(&[("a", Domain::BP, Language::Python)]);
        let records = vec![record("ghost", Language::Python, true, None)];
        assert!(matches!(
            aggregate(&records, &ds, GroupBy::Domain).unwrap_err(),
            Error::UnresolvableProblem(_)
        ));
    }

    #[test]
    fn aggregate_single_group_equals_pass_at_1() {
        let ds = dataset_with(&[
            ("a", Domain::BP, Language::Python),
            ("b", Domain::BP, Language::Python),
        ]);
        let records = vec![
            record("a", Language::Python, true, None),
            record("b", Language::Python, false, None),
        ];
        let report = aggregate(&records, &ds, GroupBy::Domain).unwrap();
        assert_eq!(report.rows.len(), 2); // BP + Overall
        assert_eq!(report.rows[0].pass_rate, 0.5);
        assert_eq!(report.rows[1].pass_rate, 0.5);
    }

    #[test]
    fn compile_rate_over_filter() {
        let records = vec![
            record("a", Language::Cpp, false, Some(true)),
            record("b", Language::Cpp, true, Some(true)),
            record("c", Language::Cpp, false, Some(false)),
            record("d", Language::Cpp, false, Some(true)),
            record("e", Language::Python, true, None),
        ];
        let rate = compile_pass_rate(&records, &[Language::Cpp]).unwrap();
        assert_eq!(rate, 0.75);
        assert!(matches!(
            compile_pass_rate(&records, &[Language::Python]).unwrap_err(),
            Error::NotCompiledLanguage(_)
        ));
    }

    #[test]
    fn compile_rate_dominates_pass_rate() {
        // passing a test implies compiling; the inequality is strict here
        let records = vec![
            record("a", Language::Cpp, true, Some(true)),
            record("b", Language::Cpp, false, Some(true)),
        ];
        let compile = compile_pass_rate(&records, &[Language::Cpp]).unwrap();
        let judgments: Vec<Judgment> = records
            .iter()
            .map(|r| Judgment {
                problem_id: r.problem_id.clone(),
                passed: r.passed,
                failure_kind: None,
                attempts: 1,
                per_case: None,
            })
            .collect();
        let pass = pass_at_1(&judgments).unwrap();
        assert!(compile >= pass);
        assert!(compile > pass);
    }

    #[test]
    fn attempt_log_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let records = vec![
            record("a", Language::Cpp, true, Some(true)),
            record("b", Language::Python, false, None),
        ];
        write_attempt_log(&path, &records).unwrap();
        assert_eq!(read_attempt_log(&path).unwrap(), records);
    }
}
