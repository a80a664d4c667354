//! Execute snippets in the sandbox under resource limits.
//!
//! ```bash
//! cargo run -p evalbox --example run_code
//! ```

use evalbox::executor::{Executor, RunSpec};
use evalbox::runner::Registry;
use evalbox::synthesis::synthesize_oj;
use evalbox::Language;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let executor = Executor::new(Registry::builtin());

    // plain run
    let program = synthesize_oj("print('hello from the sandbox')", &Language::Python)?;
    let result = executor.run_code(&RunSpec::new(program));
    println!(
        "hello        -> {:?} exit={:?} stdout={:?}",
        result.status, result.exit_code, result.stdout
    );

    // stdin
    let program = synthesize_oj("print(int(input()) * 2)", &Language::Python)?;
    let mut spec = RunSpec::new(program);
    spec.stdin = Some("21\n".to_string());
    let result = executor.run_code(&spec);
    println!(
        "stdin        -> {:?} stdout={:?}",
        result.status, result.stdout
    );

    // a compiled language records its compile phase
    let cpp = "#include <cstdio>\nint main() { printf(\"built and ran\\n\"); }";
    let program = synthesize_oj(cpp, &Language::Cpp)?;
    let result = executor.run_code(&RunSpec::new(program));
    println!(
        "cpp          -> {:?} stdout={:?} compile_exit={:?}",
        result.status,
        result.stdout,
        result.compile.as_ref().map(|c| c.exit_code)
    );

    // wall-clock limit
    let program = synthesize_oj("while True: pass", &Language::Python)?;
    let mut spec = RunSpec::new(program);
    spec.limits.wall_ms = 1000;
    let result = executor.run_code(&spec);
    println!(
        "infinite     -> {:?} after {} ms",
        result.status, result.duration_ms
    );

    // memory limit
    let program = synthesize_oj("b = bytearray(1024**3)", &Language::Python)?;
    let mut spec = RunSpec::new(program);
    spec.limits.memory_bytes = 256 * 1024 * 1024;
    let result = executor.run_code(&spec);
    println!("big alloc    -> {:?}", result.status);

    // output cap
    let program = synthesize_oj("while True: print('spam')", &Language::Python)?;
    let mut spec = RunSpec::new(program);
    spec.limits.max_output_bytes = 4096;
    let result = executor.run_code(&spec);
    println!(
        "spam printer -> {:?} captured {} bytes",
        result.status,
        result.stdout.len()
    );

    Ok(())
}
