//! Pull candidate code out of model responses of various shapes.
//!
//! ```bash
//! cargo run -p evalbox --example extract_code
//! ```

use evalbox::{extract_code, Language};

fn show(label: &str, response: &str, target: &Language) {
    let result = extract_code(response, target);
    println!(
        "{label:<28} method={:?} tag={:?}\n{}\n",
        result.method,
        result.block_tag,
        if result.code.is_empty() {
            "  (no code)".to_string()
        } else {
            result
                .code
                .lines()
                .map(|l| format!("  | {l}"))
                .collect::<Vec<_>>()
                .join("\n")
        }
    );
}

fn main() {
    let python = Language::Python;

    show(
        "tagged block",
        "Sure thing:\n```python\ndef f(x):\n    return x + 1\n```\nEnjoy!",
        &python,
    );

    show(
        "wrong language first",
        "```cpp\nint f(int x) { return x + 1; }\n```\nAnd in Python:\n```py\ndef f(x): return x + 1\n```",
        &python,
    );

    show(
        "untagged fallback",
        "This should work:\n```\nresult = sum(range(10))\nprint(result)\n```",
        &python,
    );

    show(
        "bare code (heuristic)",
        "Here is the function you wanted.\ndef add(a, b):\n    return a + b\nLet me know if it helps.",
        &python,
    );

    show("refusal", "This request cannot be completed.", &python);
}
