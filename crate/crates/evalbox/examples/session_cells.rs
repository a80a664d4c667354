//! Sequential-cell execution: cells share interpreter state, each result
//! captures only its own output, and a failing cell halts the rest.
//!
//! ```bash
//! cargo run -p evalbox --example session_cells
//! ```

use evalbox::executor::{Executor, Limits};
use evalbox::runner::Registry;
use evalbox::session::run_cells;
use evalbox::Language;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let executor = Executor::new(Registry::builtin());
    let limits = Limits::default();

    let cells: Vec<String> = [
        "import math\nradius = 2.0",
        "area = math.pi * radius ** 2\nprint(f'area = {area:.3f}')",
        "1 / 0",
        "print('never reached')",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();

    let results = run_cells(&executor, &cells, &Language::Python, &limits)?;
    for (i, result) in results.iter().enumerate() {
        println!(
            "cell {i}: {:?} exit={:?} stdout={:?} note={:?}",
            result.status,
            result.exit_code,
            result.stdout.trim_end(),
            result.setup_message
        );
    }

    // node sessions share globals the same way
    let js_cells: Vec<String> = ["globalThis.total = 40", "console.log(total + 2)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let results = run_cells(&executor, &js_cells, &Language::JavaScript, &limits)?;
    println!(
        "node session -> {:?}",
        results.last().map(|r| r.stdout.trim_end().to_string())
    );

    Ok(())
}
