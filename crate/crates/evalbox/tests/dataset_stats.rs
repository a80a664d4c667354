//! Loader scale check: a full-size synthetic problem file with the
//! production difficulty distribution loads intact and reports the
//! expected statistics.

use std::io::Write;

use evalbox::problem::{Dataset, Difficulty};

const TOTAL: usize = 3374;
const EASY: usize = 1466;
const MEDIUM: usize = 1184;
const HARD: usize = 724;

#[test]
fn full_scale_load_reports_expected_difficulty_counts() {
    assert_eq!(EASY + MEDIUM + HARD, TOTAL);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("full.jsonl");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path).unwrap());
    for i in 0..TOTAL {
        let difficulty = if i < EASY {
            "easy"
        } else if i < EASY + MEDIUM {
            "medium"
        } else {
            "hard"
        };
        writeln!(
            file,
            r#"{{"id":"gen-{i:04}","question":"Compute problem {i}.","language":"python","test_kind":"autoeval","test_code":"assert solve() == {i}","canonical_solution":"def solve():\n    return {i}","labels":{{"domain":"BP","difficulty":"{difficulty}","natural_language":"en"}}}}"#
        )
        .unwrap();
    }
    drop(file);

    let dataset = Dataset::load(&path).unwrap();
    assert_eq!(dataset.len(), TOTAL);
    let stats = dataset.stats();
    assert_eq!(stats.problems, TOTAL);
    assert_eq!(stats.easy, EASY);
    assert_eq!(stats.medium, MEDIUM);
    assert_eq!(stats.hard, HARD);
    assert_eq!(stats.autoeval, TOTAL);

    // spot-check the index and label resolution at scale
    let probe = dataset.get("gen-2000").unwrap();
    assert_eq!(probe.labels.difficulty, Difficulty::Medium);
    assert!(dataset.get("gen-9999").is_none());
}
