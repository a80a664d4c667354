//! Assemble runnable test programs: concatenation, header merging, and
//! java class splitting.
//!
//! ```bash
//! cargo run -p evalbox --example synthesize_programs
//! ```

use evalbox::problem::{Difficulty, Domain, Labels, NaturalLanguage, Problem, TestSpec};
use evalbox::synthesis::{split_top_level_units, synthesize_auto_eval};
use evalbox::Language;

fn problem(language: Language, test_code: &str) -> Problem {
    Problem {
        id: "demo".into(),
        question: "demo".into(),
        programming_language: language,
        test_spec: TestSpec::AutoEval {
            test_code: test_code.into(),
        },
        reference_solution: String::new(),
        labels: Labels {
            domain: Domain::BP,
            difficulty: Difficulty::Easy,
            natural_language: NaturalLanguage::En,
        },
        entry_class: None,
        few_shot_exemplars: Vec::new(),
    }
}

fn dump(title: &str, program: &evalbox::TestProgram) {
    println!("== {title} (entry: {:?})", program.entry_hint);
    for (path, content) in &program.files {
        println!("-- {path}");
        for line in content.lines() {
            println!("   {line}");
        }
    }
    println!();
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // interpreted: code, blank line, test script
    let p = problem(Language::Python, "assert f(2) == 4");
    let program = synthesize_auto_eval("def f(x):\n    return x * 2", &p)?;
    dump("python concatenation", &program);

    // compiled single unit: duplicate includes dropped from the harness
    let p = problem(
        Language::Cpp,
        "#include <vector>\n#include <cassert>\nint main() { assert(total({1,2,3}) == 6); }",
    );
    let program = synthesize_auto_eval(
        "#include <vector>\nint total(const std::vector<int>& v) {\n    int s = 0;\n    for (int x : v) s += x;\n    return s;\n}",
        &p,
    )?;
    dump("cpp header merge", &program);

    // java: one file per public class, test class separate
    let p = problem(
        Language::Java,
        "public class Check { public static void main(String[] a) { assert Calc.twice(2) == 4; } }",
    );
    let program = synthesize_auto_eval(
        "import java.util.*;\npublic class Calc { static int twice(int x) { return 2 * x; } }\nclass Helper {}\npublic class Other {}",
        &p,
    )?;
    dump("java class splitting", &program);

    // the splitter is usable on its own
    let files = split_top_level_units(
        "public class A {}\nclass B {}\npublic class C {}",
        &Language::Java,
    )?;
    println!(
        "split_top_level_units -> {:?}",
        files.keys().collect::<Vec<_>>()
    );

    Ok(())
}
