//! Pulling candidate code out of free-form model responses.
//!
//! Preference order: a fenced block tagged with the target language, then
//! an untagged (or unrecognized-tag) fenced block, then a heuristic trim
//! of the raw text. Blocks tagged with a *different* known language are
//! never used, even when nothing better exists.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lang::{normalize_language_tag, Language};

/// How the code was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMethod {
    Fenced,
    Heuristic,
    None,
}

/// Extraction outcome. `method == None` implies `code` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub code: String,
    pub method: ExtractionMethod,
    /// Raw fence tag, present only when it normalized to the target.
    pub block_tag: Option<String>,
}

impl ExtractionResult {
    fn none() -> ExtractionResult {
        ExtractionResult {
            code: String::new(),
            method: ExtractionMethod::None,
            block_tag: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.method == ExtractionMethod::None
    }
}

#[derive(Debug)]
struct FencedBlock {
    tag: Option<String>,
    code: String,
}

/// Split a response into fenced blocks. A fence opens on a line whose
/// trimmed content starts with three or more backticks; it closes on a
/// line of at least as many backticks and nothing else. An unterminated
/// fence swallows the rest of the response (truncated completions).
fn fenced_blocks(response: &str) -> Vec<FencedBlock> {
    let mut blocks = Vec::new();
    let mut lines = response.lines();
    while let Some(line) = lines.next() {
        let trimmed = line.trim_start();
        let ticks = trimmed.chars().take_while(|&c| c == '`').count();
        if ticks < 3 {
            continue;
        }
        let info = trimmed[ticks..].trim();
        let tag = info
            .split_whitespace()
            .next()
            .map(str::to_string)
            .filter(|t| !t.is_empty());
        let mut body: Vec<&str> = Vec::new();
        for inner in lines.by_ref() {
            let inner_trimmed = inner.trim();
            let close_ticks = inner_trimmed.chars().take_while(|&c| c == '`').count();
            if close_ticks >= ticks && inner_trimmed.chars().all(|c| c == '`') {
                break;
            }
            body.push(inner);
        }
        blocks.push(FencedBlock {
            tag,
            code: body.join("\n"),
        });
    }
    blocks
}

/// Extract the candidate code for `target` from a model response.
///
/// Total: failure is reported as `ExtractionMethod::None`, never an
/// error. An empty outcome (including an empty fenced block) is a
/// failure.
pub fn extract_code(response: &str, target: &Language) -> ExtractionResult {
    let result = select_candidate(response, target);
    if result.code.trim().is_empty() {
        return ExtractionResult::none();
    }
    result
}

fn select_candidate(response: &str, target: &Language) -> ExtractionResult {
    let blocks = fenced_blocks(response);

    // 1. First block whose tag normalizes to the target language.
    for block in &blocks {
        if let Some(tag) = &block.tag {
            if normalize_language_tag(tag).as_ref() == Some(target) {
                return ExtractionResult {
                    code: block.code.clone(),
                    method: ExtractionMethod::Fenced,
                    block_tag: Some(tag.clone()),
                };
            }
        }
    }

    // 2. First untagged or unknown-tagged block. Blocks tagged with a
    //    different known language are skipped.
    for block in &blocks {
        let recognized = block.tag.as_deref().and_then(normalize_language_tag);
        if block.tag.is_none() || recognized.is_none() {
            return ExtractionResult {
                code: block.code.clone(),
                method: ExtractionMethod::Fenced,
                block_tag: None,
            };
        }
    }

    // 3. Heuristic trim of the raw text.
    if let Some(code) = heuristic_trim(response, target) {
        return ExtractionResult {
            code,
            method: ExtractionMethod::Heuristic,
            block_tag: None,
        };
    }

    ExtractionResult::none()
}

/// Drop prose around bare code: skip leading lines until the first line
/// matching the target's code-signal set, and cut after the last line
/// that is a signal or a structural continuation of one.
fn heuristic_trim(response: &str, target: &Language) -> Option<String> {
    let signals = signal_set(target)?;
    let lines: Vec<&str> = response.lines().collect();
    let first = lines.iter().position(|l| signals.matches(l))?;
    let mut last = first;
    for (i, line) in lines.iter().enumerate().skip(first + 1) {
        if signals.matches(line) || is_continuation(line) {
            last = i;
        }
    }
    let code = lines[first..=last].join("\n");
    if code.trim().is_empty() {
        None
    } else {
        Some(code)
    }
}

/// A line that extends preceding code without itself looking like a
/// statement start: indentation, closers, or chained-clause keywords.
fn is_continuation(line: &str) -> bool {
    if line.is_empty() {
        return false;
    }
    if line.starts_with(' ') || line.starts_with('\t') {
        return !line.trim().is_empty();
    }
    let trimmed = line.trim_start();
    const CLOSERS: &[&str] = &[
        "}", ")", "]", "};", ");", "];", "})", "});", "end", "fi", "done", "esac", "else", "elif",
        "except", "finally", "catch", "case", "default:",
    ];
    CLOSERS.iter().any(|c| {
        trimmed == *c
            || trimmed.starts_with(&format!("{c} "))
            || trimmed.starts_with(&format!("{c}{{",))
    })
}

struct SignalSet {
    prefixes: &'static [&'static str],
    patterns: Vec<Regex>,
}

impl SignalSet {
    fn matches(&self, line: &str) -> bool {
        let trimmed = line.trim_start();
        if trimmed.is_empty() {
            return false;
        }
        // Signals are judged on unindented lines; indented ones are
        // continuations handled by the caller.
        if line.starts_with(' ') || line.starts_with('\t') {
            return false;
        }
        self.prefixes.iter().any(|p| trimmed.starts_with(p))
            || self.patterns.iter().any(|r| r.is_match(line))
    }
}

fn signal_set(lang: &Language) -> Option<&'static SignalSet> {
    static TABLE: OnceLock<HashMap<&'static str, SignalSet>> = OnceLock::new();
    let table = TABLE.get_or_init(build_signal_table);
    table.get(lang.name())
}

fn rx(pattern: &str) -> Regex {
    Regex::new(pattern).expect("static signal pattern")
}

fn build_signal_table() -> HashMap<&'static str, SignalSet> {
    let mut table = HashMap::new();
    table.insert(
        "python",
        SignalSet {
            prefixes: &[
                "import ",
                "from ",
                "def ",
                "class ",
                "if ",
                "elif ",
                "else:",
                "for ",
                "while ",
                "return ",
                "print(",
                "async ",
                "with ",
                "try:",
                "except",
                "finally:",
                "raise ",
                "assert ",
                "@",
                "lambda ",
                "pass",
                "yield ",
                "global ",
                "nonlocal ",
                "del ",
                "match ",
            ],
            patterns: vec![
                rx(r"^[A-Za-z_][\w.\[\]'\x22]*\s*([-+*/%&|^]|//|\*\*)?=\s*\S"),
                rx(r"^[A-Za-z_][\w.]*\(.*\)\s*$"),
            ],
        },
    );
    table.insert(
        "cpp",
        SignalSet {
            prefixes: &[
                "#include",
                "#define",
                "#pragma",
                "#if",
                "#endif",
                "using ",
                "namespace ",
                "template",
                "class ",
                "struct ",
                "enum ",
                "typedef ",
                "int ",
                "long ",
                "short ",
                "char ",
                "bool ",
                "float ",
                "double ",
                "void ",
                "auto ",
                "const ",
                "constexpr ",
                "static ",
                "unsigned ",
                "signed ",
                "std::",
                "extern ",
                "return ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "while(",
                "switch ",
                "public:",
                "private:",
                "protected:",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "javascript",
        SignalSet {
            prefixes: &[
                "import ",
                "export ",
                "const ",
                "let ",
                "var ",
                "function ",
                "class ",
                "async ",
                "await ",
                "return ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "while(",
                "switch ",
                "console.",
                "module.exports",
                "require(",
                "try ",
                "try{",
                "catch",
                "throw ",
                "new ",
                "process.",
            ],
            patterns: vec![rx(r"(=>|[;{}])\s*$")],
        },
    );
    table.insert(
        "typescript",
        SignalSet {
            prefixes: &[
                "import ",
                "export ",
                "const ",
                "let ",
                "var ",
                "function ",
                "class ",
                "interface ",
                "type ",
                "enum ",
                "declare ",
                "namespace ",
                "async ",
                "return ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "console.",
                "new ",
                "throw ",
            ],
            patterns: vec![rx(r"(=>|[;{}])\s*$")],
        },
    );
    table.insert(
        "rust",
        SignalSet {
            prefixes: &[
                "use ",
                "fn ",
                "pub ",
                "struct ",
                "enum ",
                "impl ",
                "trait ",
                "mod ",
                "let ",
                "const ",
                "static ",
                "match ",
                "if ",
                "for ",
                "while ",
                "loop ",
                "return ",
                "#[",
                "#![",
                "macro_rules!",
                "extern ",
                "unsafe ",
                "println!",
                "type ",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "go",
        SignalSet {
            prefixes: &[
                "package ", "import ", "func ", "type ", "var ", "const ", "if ", "for ",
                "switch ", "return ", "defer ", "go ", "chan ", "fmt.",
            ],
            patterns: vec![rx(r"[{}]\s*$")],
        },
    );
    table.insert(
        "java",
        SignalSet {
            prefixes: &[
                "package ",
                "import ",
                "public ",
                "private ",
                "protected ",
                "class ",
                "interface ",
                "enum ",
                "static ",
                "final ",
                "void ",
                "int ",
                "return ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "try ",
                "try{",
                "catch",
                "new ",
                "@",
                "System.",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "bash",
        SignalSet {
            prefixes: &[
                "#!",
                "echo ",
                "if ",
                "then",
                "else",
                "fi",
                "for ",
                "while ",
                "do",
                "done",
                "case ",
                "esac",
                "function ",
                "export ",
                "local ",
                "read ",
                "set ",
                "cd ",
                "exit ",
                "printf ",
                "shift",
                "trap ",
                "source ",
                ". ",
                "[[",
                "declare ",
            ],
            patterns: vec![
                rx(r"^\w+=\S"),
                rx(r"^\w[\w-]*\s*\(\)\s*\{?"),
                rx(r"^[a-z][\w./-]*\s+-{1,2}\w"),
            ],
        },
    );
    table.insert(
        "perl",
        SignalSet {
            prefixes: &[
                "#!", "use ", "my ", "our ", "sub ", "print ", "print(", "if ", "unless ",
                "foreach ", "for ", "while ", "chomp", "push ", "push(", "return ", "$", "@", "%",
                "last", "next", "die ", "open(", "open ",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "csharp",
        SignalSet {
            prefixes: &[
                "using ",
                "namespace ",
                "public ",
                "private ",
                "protected ",
                "internal ",
                "class ",
                "struct ",
                "interface ",
                "enum ",
                "static ",
                "void ",
                "int ",
                "string ",
                "var ",
                "return ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "Console.",
                "new ",
                "[",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "php",
        SignalSet {
            prefixes: &[
                "<?php",
                "$",
                "function ",
                "class ",
                "echo ",
                "print ",
                "if ",
                "if(",
                "for ",
                "for(",
                "foreach ",
                "while ",
                "return ",
                "use ",
                "namespace ",
                "require",
                "include",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "ruby",
        SignalSet {
            prefixes: &[
                "require ", "def ", "class ", "module ", "if ", "unless ", "elsif ", "end",
                "puts ", "print ", "p ", "return ", "while ", "until ", "for ", "case ", "when ",
                "do ", "begin", "rescue", "ensure", "attr_", "@", "yield",
            ],
            patterns: vec![
                rx(r"^[a-z_][\w.\[\]]*\s*=\s*\S"),
                rx(r"\bdo\s*(\|[^|]*\|)?\s*$"),
            ],
        },
    );
    table.insert(
        "lua",
        SignalSet {
            prefixes: &[
                "local ",
                "function ",
                "if ",
                "for ",
                "while ",
                "repeat",
                "return ",
                "end",
                "print(",
                "require",
                "do",
                "else",
                "elseif ",
            ],
            patterns: vec![rx(r"^[a-zA-Z_][\w.\[\]]*\s*=\s*\S")],
        },
    );
    table.insert(
        "r",
        SignalSet {
            prefixes: &[
                "library(",
                "require(",
                "function(",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "print(",
                "cat(",
                "source(",
                "return(",
            ],
            patterns: vec![rx(r"<-"), rx(r"^[a-zA-Z_.][\w.]*\s*=\s*\S")],
        },
    );
    table.insert(
        "d",
        SignalSet {
            prefixes: &[
                "import ", "module ", "void ", "int ", "auto ", "class ", "struct ", "enum ",
                "return ", "if ", "if(", "for ", "for(", "foreach", "while ", "writeln",
                "unittest", "public ", "private ",
            ],
            patterns: vec![rx(r"[;{}]\s*$")],
        },
    );
    table.insert(
        "scala",
        SignalSet {
            prefixes: &[
                "import ",
                "object ",
                "class ",
                "case ",
                "trait ",
                "def ",
                "val ",
                "var ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "println",
                "return ",
                "package ",
                "extends ",
                "override ",
                "@",
            ],
            patterns: vec![rx(r"[={}]\s*$")],
        },
    );
    table.insert(
        "julia",
        SignalSet {
            prefixes: &[
                "using ",
                "import ",
                "function ",
                "struct ",
                "mutable ",
                "if ",
                "for ",
                "while ",
                "println(",
                "print(",
                "return ",
                "end",
                "module ",
                "macro ",
                "@",
                "begin",
                "let ",
                "const ",
            ],
            patterns: vec![rx(r"^[a-zA-Z_][\w.\[\]!]*\s*=\s*\S")],
        },
    );
    table.insert(
        "kotlin",
        SignalSet {
            prefixes: &[
                "import ",
                "package ",
                "fun ",
                "val ",
                "var ",
                "class ",
                "object ",
                "interface ",
                "data ",
                "if ",
                "if(",
                "for ",
                "for(",
                "while ",
                "when ",
                "println(",
                "print(",
                "return ",
                "override ",
                "@",
            ],
            patterns: vec![rx(r"[={}]\s*$")],
        },
    );
    table
}
