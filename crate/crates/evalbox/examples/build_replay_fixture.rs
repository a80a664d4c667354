//! Regenerate the bundled replay fixtures from the fixture problems.
//!
//! A replay fixture maps prompt digests (see `provider::prompt_digest`)
//! to recorded response texts, so evaluations replay byte-identically
//! with no model in the loop. Two fixtures are produced:
//!
//! - `replay_reference.json`: every response is the fenced reference
//!   solution, so every problem passes.
//! - `replay_mixed.json`: a handful of problems respond with broken or
//!   codeless answers to exercise the failure taxonomy end to end.
//!
//! ```bash
//! cargo run -p evalbox --example build_replay_fixture
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use evalbox::problem::{generate_prompt, Paradigm};
use evalbox::provider::prompt_digest;
use evalbox::Dataset;

fn fenced(lang: &str, code: &str) -> String {
    format!("Here is my solution:\n\n```{lang}\n{code}\n```\n")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let dataset = Dataset::load(fixtures.join("problems.jsonl"))?;

    let mut reference: BTreeMap<String, String> = BTreeMap::new();
    let mut mixed: BTreeMap<String, String> = BTreeMap::new();

    for problem in dataset.problems() {
        let prompt = generate_prompt(problem, Paradigm::ZeroShot, None)?;
        let digest = prompt_digest(&prompt);
        let lang = problem.programming_language.name();
        let good = fenced(lang, &problem.reference_solution);
        reference.insert(digest.clone(), good.clone());

        let response = match problem.id.as_str() {
            // does not compile: missing closing brace
            "cpp-ae-001" => fenced(lang, "int add(int a, int b) {\n    return a + b;"),
            // compiles, fails the tests
            "cpp-ae-002" => fenced(lang, "long long factorial(int n) {\n    return n;\n}"),
            // refusal with no code at all
            "py-ae-001" => "I'm sorry, I cannot help with that request.".to_string(),
            // wrong answer on the OJ cases
            "py-oj-001" => fenced(lang, "print(int(input()) * 3)"),
            // correct code but bare (exercises the heuristic extractor)
            "js-ae-001" => format!(
                "The implementation is:\n{}\nThat should do it.",
                problem.reference_solution
            ),
            _ => good,
        };
        mixed.insert(digest, response);
    }

    assert_eq!(
        reference.len(),
        dataset.len(),
        "prompt digest collision: two problems share identical question text"
    );

    let reference_path = fixtures.join("replay_reference.json");
    let mixed_path = fixtures.join("replay_mixed.json");
    std::fs::write(&reference_path, serde_json::to_string_pretty(&reference)?)?;
    std::fs::write(&mixed_path, serde_json::to_string_pretty(&mixed)?)?;
    println!(
        "wrote {} ({} entries) and {} ({} entries)",
        reference_path.display(),
        reference.len(),
        mixed_path.display(),
        mixed.len()
    );
    Ok(())
}
