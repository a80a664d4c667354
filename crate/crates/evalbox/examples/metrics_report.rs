//! Grouped pass-rate reports from a judgment log, across all four
//! grouping axes, plus pass@k and difficulty voting.
//!
//! ```bash
//! cargo run -p evalbox --example metrics_report
//! ```

use std::path::Path;

use evalbox::metrics::{aggregate, pass_at_k, read_attempt_log, vote_difficulty, GroupBy};
use evalbox::Dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;
    let records = read_attempt_log(fixtures.join("judgment_log_sample.jsonl"))?;

    for group_by in [
        GroupBy::Domain,
        GroupBy::ProgrammingLanguage,
        GroupBy::Difficulty,
        GroupBy::NaturalLanguage,
    ] {
        let report = aggregate(&records, &dataset, group_by)?;
        println!("{}", report.to_table());
    }

    println!("pass@k estimator (n attempts, c passing):");
    for (n, c, k) in [(4, 2, 1), (4, 2, 2), (4, 2, 4), (10, 3, 5)] {
        println!("  pass@{k} with n={n}, c={c}: {:.6}", pass_at_k(n, c, k)?);
    }

    println!("\ndifficulty voting over six models' correctness:");
    for correct in [1, 3, 6] {
        let flags: Vec<bool> = (0..6).map(|i| i < correct).collect();
        println!("  {correct}/6 correct -> {:?}", vote_difficulty(&flags)?);
    }
    Ok(())
}
