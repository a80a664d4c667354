//! Reference-solution gate: every bundled problem's canonical solution
//! must pass its own tests.
//!
//! ```bash
//! cargo run -p evalbox --example verify_dataset
//! ```

use std::path::Path;

use evalbox::executor::Executor;
use evalbox::metrics::pass_at_1;
use evalbox::pipeline::Pipeline;
use evalbox::runner::Registry;
use evalbox::Dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;
    let stats = dataset.stats();
    println!(
        "{} problems ({} script-judged, {} OJ with {} cases), difficulty {}/{}/{}",
        stats.problems,
        stats.autoeval,
        stats.oj,
        stats.total_cases,
        stats.easy,
        stats.medium,
        stats.hard
    );

    let pipeline = Pipeline::new(Executor::new(Registry::builtin()));
    let mut judgments = Vec::new();
    for problem in dataset.problems() {
        let judgment = pipeline.verify_reference(problem);
        println!(
            "{} {}",
            if judgment.passed { "ok  " } else { "FAIL" },
            problem.id
        );
        judgments.push(judgment);
    }
    println!("pass@1 = {:.2}", pass_at_1(&judgments)?);
    Ok(())
}
