//! Judge raw model responses against a fixture problem: the full
//! extraction -> synthesis -> execution -> judgment path.
//!
//! ```bash
//! cargo run -p evalbox --example judge_completion
//! ```

use std::path::Path;

use evalbox::executor::Executor;
use evalbox::pipeline::Pipeline;
use evalbox::runner::Registry;
use evalbox::Dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;
    let problem = dataset.get("py-ae-001").expect("bundled fixture");
    let pipeline = Pipeline::new(Executor::new(Registry::builtin()));

    let candidates = [
        (
            "correct solution",
            "Happy to help!\n```python\ndef add(a, b):\n    return a + b\n```",
        ),
        (
            "wrong answer",
            "```python\ndef add(a, b):\n    return a * b\n```",
        ),
        ("no code at all", "I'd rather not."),
        (
            "bare code without fences",
            "def add(a, b):\n    return a + b",
        ),
    ];

    println!("problem: {}\n", problem.question);
    for (label, response) in candidates {
        let outcome = pipeline.judge_completion(problem, response);
        println!(
            "{label:<26} extraction={:?} passed={} verdict={:?}",
            outcome.extraction.method,
            outcome.judgment.passed,
            outcome.judgment.failure_kind.map(|k| k.name()),
        );
    }

    // the same entry point backs reference verification
    let judgment = pipeline.verify_reference(problem);
    println!("\nreference verification: passed={}", judgment.passed);
    Ok(())
}
