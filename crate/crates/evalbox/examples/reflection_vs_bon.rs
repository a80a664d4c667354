//! Best-of-N versus execution-feedback reflection, demonstrated with a
//! scripted provider that only produces a fix after seeing feedback.
//!
//! ```bash
//! cargo run -p evalbox --example reflection_vs_bon
//! ```

use std::path::Path;

use evalbox::executor::Executor;
use evalbox::metrics::pass_at_1;
use evalbox::pipeline::{eval_batch, Pipeline, Strategy};
use evalbox::provider::{FixOnFeedbackProvider, SamplingParams};
use evalbox::runner::Registry;
use evalbox::{Dataset, Judgment, Language};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;
    let slice: Vec<_> = dataset
        .problems()
        .iter()
        .filter(|p| p.programming_language == Language::Python)
        .take(10)
        .cloned()
        .collect();
    let slice = Dataset::new(slice);
    println!("evaluating {} problems with N = 2\n", slice.len());

    let provider = FixOnFeedbackProvider::from_dataset(slice.clone());
    let pipeline = Pipeline::new(Executor::new(Registry::builtin()));
    let params = SamplingParams::default();

    for strategy in [Strategy::Bon(2), Strategy::Reflect(2)] {
        let results = eval_batch(&pipeline, &slice, &provider, &params, strategy);
        let judgments: Vec<Judgment> = results.iter().map(|r| r.judgment.clone()).collect();
        let attempts: u32 = judgments.iter().map(|j| j.attempts).sum();
        println!(
            "{strategy:<10} pass@1 = {:.2} ({attempts} completions issued)",
            pass_at_1(&judgments)?
        );
    }

    println!(
        "\nreflection wins because round 2's prompt carries the sandbox\n\
         feedback (verdict + stderr), which the scripted provider needs\n\
         before it produces the fix; BoN reissues the same blind prompt."
    );
    Ok(())
}
