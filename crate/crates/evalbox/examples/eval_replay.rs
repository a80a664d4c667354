//! Batch evaluation with a recorded (replay) provider, ending in a
//! grouped metrics report. Deterministic: no model in the loop.
//!
//! ```bash
//! cargo run -p evalbox --example eval_replay
//! ```

use std::path::Path;

use evalbox::executor::Executor;
use evalbox::metrics::{aggregate, GroupBy};
use evalbox::pipeline::{attempt_records, eval_batch, Pipeline, Strategy};
use evalbox::provider::{ProviderConfig, SamplingParams};
use evalbox::runner::Registry;
use evalbox::Dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;

    // replay_mixed answers a few problems badly on purpose
    let provider =
        ProviderConfig::replay(fixtures.join("replay_mixed.json")).build(Some(&dataset))?;
    let pipeline = Pipeline::new(Executor::new(Registry::builtin()));

    let results = eval_batch(
        &pipeline,
        &dataset,
        provider.as_ref(),
        &SamplingParams::default(),
        Strategy::Single,
    );

    let failures: Vec<_> = results
        .iter()
        .filter(|r| !r.judgment.passed)
        .map(|r| {
            format!(
                "{} ({})",
                r.problem_id,
                r.judgment.failure_kind.map(|k| k.name()).unwrap_or("?")
            )
        })
        .collect();
    println!("failures: {failures:?}\n");

    let records = attempt_records(&results, &dataset);
    let report = aggregate(&records, &dataset, GroupBy::ProgrammingLanguage)?;
    print!("{}", report.to_table());
    Ok(())
}
