//! Assembling runnable test programs from extracted code and problem tests.
//!
//! All functions here are pure: they build file maps and never touch the
//! filesystem. The executor materializes the result.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;
use crate::problem::{Problem, TestSpec};

/// A concrete program set ready for execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestProgram {
    /// Relative path → file content. Ordered for deterministic layout.
    pub files: BTreeMap<String, String>,
    pub language: Language,
    pub needs_compile: bool,
    pub run_stdin: Option<String>,
    /// Entry identifier for languages that launch a named unit (java).
    pub entry_hint: Option<String>,
}

impl TestProgram {
    /// Check the structural invariants: nonempty file map, relative paths
    /// without parent traversal.
    pub fn validate(&self) -> Result<()> {
        if self.files.is_empty() {
            return Err(Error::InvalidProgram("file map is empty".into()));
        }
        for path in self.files.keys() {
            if path.is_empty() || path.starts_with('/') || path.starts_with('\\') {
                return Err(Error::InvalidProgram(format!(
                    "path {path:?} must be relative"
                )));
            }
            if path.split(['/', '\\']).any(|seg| seg == "..") {
                return Err(Error::InvalidProgram(format!(
                    "path {path:?} escapes the working directory"
                )));
            }
        }
        Ok(())
    }

    pub fn total_bytes(&self) -> usize {
        self.files.values().map(|c| c.len()).sum()
    }
}

/// Conventional single source file name for a language.
pub fn source_file_name(language: &Language) -> String {
    let ext = extension(language);
    match language {
        Language::Java => "Main.java".to_string(),
        _ => format!("main.{ext}"),
    }
}

pub fn extension(language: &Language) -> &'static str {
    match language {
        Language::Python => "py",
        Language::Cpp => "cpp",
        Language::CSharp => "cs",
        Language::Go => "go",
        Language::Java => "java",
        Language::JavaScript => "js",
        Language::TypeScript => "ts",
        Language::Php => "php",
        Language::Rust => "rs",
        Language::Bash => "sh",
        Language::Lua => "lua",
        Language::R => "r",
        Language::Perl => "pl",
        Language::D => "d",
        Language::Ruby => "rb",
        Language::Scala => "scala",
        Language::Julia => "jl",
        Language::Kotlin => "kt",
        Language::Plugin(_) => "txt",
    }
}

/// Combine extracted code with an AutoEval test script.
///
/// Interpreted languages get one file: code, a blank line, then the test
/// script. Compiled single-unit languages get one translation unit with
/// the solution first and the harness second, duplicate import/package
/// headers dropped from the harness side. Java is split into one file
/// per top-level public class, with the test class as its own file.
pub fn synthesize_auto_eval(code: &str, problem: &Problem) -> Result<TestProgram> {
    let test_code = match &problem.test_spec {
        TestSpec::AutoEval { test_code } => test_code,
        TestSpec::CommonOj { .. } => {
            return Err(Error::InvalidProgram(
                "synthesize_auto_eval requires an AutoEval test spec".into(),
            ))
        }
    };
    if code.trim().is_empty() {
        return Err(Error::EmptyProgram);
    }
    let language = &problem.programming_language;

    if *language == Language::Java {
        return synthesize_java(code, test_code, problem);
    }

    let content = if language.is_compiled() {
        merge_translation_unit(code, test_code, language)?
    } else {
        concat_with_gap(code, test_code)
    };

    let mut files = BTreeMap::new();
    files.insert(source_file_name(language), content);
    let program = TestProgram {
        files,
        language: language.clone(),
        needs_compile: language.is_compiled(),
        run_stdin: None,
        entry_hint: None,
    };
    program.validate()?;
    Ok(program)
}

/// Wrap extracted code as a standalone stdin/stdout program. No test code
/// is injected; OJ cases are supplied at run time.
pub fn synthesize_oj(code: &str, language: &Language) -> Result<TestProgram> {
    if code.trim().is_empty() {
        return Err(Error::EmptyProgram);
    }
    let mut files = BTreeMap::new();
    if *language == Language::Java {
        // keep the compiler happy about public class/file agreement
        let units = split_top_level_units(code, language)?;
        let entry = find_main_unit(&units).or_else(|| {
            units
                .keys()
                .next()
                .map(|p| p.trim_end_matches(".java").to_string())
        });
        let program = TestProgram {
            files: units,
            language: language.clone(),
            needs_compile: true,
            run_stdin: None,
            entry_hint: entry,
        };
        program.validate()?;
        return Ok(program);
    }
    files.insert(source_file_name(language), code.to_string());
    let program = TestProgram {
        files,
        language: language.clone(),
        needs_compile: language.is_compiled(),
        run_stdin: None,
        entry_hint: None,
    };
    program.validate()?;
    Ok(program)
}

fn concat_with_gap(first: &str, second: &str) -> String {
    let mut out = String::with_capacity(first.len() + second.len() + 2);
    out.push_str(first);
    if !first.ends_with('\n') {
        out.push('\n');
    }
    out.push('\n');
    out.push_str(second);
    if !second.ends_with('\n') {
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// single-translation-unit assembly for compiled languages
// ---------------------------------------------------------------------------

#[derive(Debug, PartialEq)]
enum HeaderLine {
    Package(String),
    Import(String),
    Other,
}

fn classify_header(line: &str, language: &Language) -> HeaderLine {
    let t = line.trim();
    match language {
        Language::Cpp => {
            if t.starts_with("#include") || t.starts_with("using ") {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        Language::Rust => {
            if t.starts_with("use ") || t.starts_with("extern crate ") {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        Language::Go => {
            if let Some(rest) = t.strip_prefix("package ") {
                HeaderLine::Package(rest.trim().to_string())
            } else if t.starts_with("import ") && !t.contains('(') {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        Language::D => {
            if let Some(rest) = t.strip_prefix("module ") {
                HeaderLine::Package(rest.trim_end_matches(';').trim().to_string())
            } else if t.starts_with("import ") {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        Language::CSharp | Language::Scala | Language::Kotlin => {
            if let Some(rest) = t.strip_prefix("package ") {
                HeaderLine::Package(rest.trim_end_matches(';').trim().to_string())
            } else if t.starts_with("using ") || t.starts_with("import ") {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        Language::TypeScript | Language::JavaScript => {
            if t.starts_with("import ") || (t.contains("require(") && t.starts_with("const ")) {
                HeaderLine::Import(t.to_string())
            } else {
                HeaderLine::Other
            }
        }
        _ => HeaderLine::Other,
    }
}

/// Per-language rule for neutralizing a solution-side entry point when the
/// test harness brings its own: (detector, replacement for the first hit).
fn main_rename_rule(language: &Language) -> Option<(&'static str, &'static str)> {
    match language {
        Language::Cpp => Some(("int main(", "int solution_main(")),
        Language::Rust => Some(("fn main(", "fn solution_main(")),
        Language::Go => Some(("func main(", "func solutionMain(")),
        Language::D => Some(("void main(", "void solutionMain(")),
        Language::Kotlin => Some(("fun main(", "fun solutionMain(")),
        _ => None,
    }
}

/// Concatenate solution and harness into one translation unit, dropping
/// harness header lines that duplicate solution headers. Conflicting
/// package/module declarations are an error.
fn merge_translation_unit(code: &str, test_code: &str, language: &Language) -> Result<String> {
    let mut solution_package: Option<String> = None;
    let mut solution_imports: Vec<String> = Vec::new();
    let mut solution_has_go_import_block = false;
    for line in code.lines() {
        match classify_header(line, language) {
            HeaderLine::Package(p) => solution_package = Some(p),
            HeaderLine::Import(i) => solution_imports.push(i),
            HeaderLine::Other => {}
        }
    }
    let go_solution_items = if *language == Language::Go {
        let items = go_import_items(code);
        solution_has_go_import_block = !items.is_empty();
        items
    } else {
        Vec::new()
    };

    let mut solution_part = code.to_string();
    let mut test_part = String::new();
    let mut skip_block = 0usize;
    let test_lines: Vec<&str> = test_code.lines().collect();
    let mut idx = 0;
    while idx < test_lines.len() {
        let line = test_lines[idx];
        idx += 1;
        if skip_block > 0 {
            if line.contains(')') {
                skip_block -= 1;
            }
            continue;
        }
        // go import blocks in the harness: keep only items the solution lacks
        if *language == Language::Go && line.trim().starts_with("import (") {
            let mut items = Vec::new();
            while idx < test_lines.len() {
                let inner = test_lines[idx].trim();
                idx += 1;
                if inner.starts_with(')') {
                    break;
                }
                if !inner.is_empty() {
                    items.push(inner.to_string());
                }
            }
            let fresh: Vec<String> = items
                .into_iter()
                .filter(|i| !go_solution_items.iter().any(|s| s == i))
                .collect();
            if !fresh.is_empty() {
                if solution_has_go_import_block {
                    // splice the new items into the solution's import block
                    if let Some(pos) = solution_part.find("import (") {
                        let insert_at = solution_part[pos..]
                            .find('\n')
                            .map(|off| pos + off + 1)
                            .unwrap_or(solution_part.len());
                        let mut addition = String::new();
                        for item in &fresh {
                            addition.push('\t');
                            addition.push_str(item);
                            addition.push('\n');
                        }
                        solution_part.insert_str(insert_at, &addition);
                    }
                } else {
                    test_part.push_str("import (\n");
                    for item in &fresh {
                        test_part.push('\t');
                        test_part.push_str(item);
                        test_part.push('\n');
                    }
                    test_part.push_str(")\n");
                }
            }
            continue;
        }
        match classify_header(line, language) {
            HeaderLine::Package(p) => match &solution_package {
                Some(existing) if *existing == p => continue,
                Some(existing) => {
                    return Err(Error::HeaderConflict(format!(
                        "solution declares package {existing:?}, harness declares {p:?}"
                    )))
                }
                None => {
                    test_part.push_str(line);
                    test_part.push('\n');
                }
            },
            HeaderLine::Import(i) => {
                if solution_imports.contains(&i) {
                    continue;
                }
                test_part.push_str(line);
                test_part.push('\n');
            }
            HeaderLine::Other => {
                test_part.push_str(line);
                test_part.push('\n');
            }
        }
    }

    // harness supplies its own entry point: step the solution's aside
    if let Some((needle, replacement)) = main_rename_rule(language) {
        if test_part.contains(needle) && solution_part.contains(needle) {
            solution_part = solution_part.replacen(needle, replacement, 1);
        }
    }

    Ok(concat_with_gap(
        &solution_part,
        test_part.trim_end_matches('\n'),
    ))
}

fn go_import_items(code: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut in_block = false;
    for line in code.lines() {
        let t = line.trim();
        if in_block {
            if t.starts_with(')') {
                in_block = false;
            } else if !t.is_empty() {
                items.push(t.to_string());
            }
        } else if t.starts_with("import (") {
            in_block = true;
        } else if let Some(rest) = t.strip_prefix("import ") {
            items.push(rest.trim().to_string());
        }
    }
    items
}

// ---------------------------------------------------------------------------
// java assembly
// ---------------------------------------------------------------------------

fn synthesize_java(code: &str, test_code: &str, problem: &Problem) -> Result<TestProgram> {
    let mut files = split_top_level_units(code, &Language::Java)?;

    let test_class = first_public_unit_name(test_code)
        .or_else(|| first_unit_name(test_code))
        .unwrap_or_else(|| "Tests".to_string());
    let test_file = format!("{test_class}.java");
    if files.contains_key(&test_file) {
        return Err(Error::InvalidProgram(format!(
            "test class {test_class} collides with a solution class"
        )));
    }
    files.insert(test_file, test_code.to_string());

    let entry_hint = problem
        .entry_class
        .clone()
        .or_else(|| {
            if contains_java_main(test_code) {
                Some(test_class.clone())
            } else {
                None
            }
        })
        .or_else(|| find_main_unit(&files))
        .unwrap_or_else(|| "Main".to_string());

    let program = TestProgram {
        files,
        language: Language::Java,
        needs_compile: true,
        run_stdin: None,
        entry_hint: Some(entry_hint),
    };
    program.validate()?;
    Ok(program)
}

fn contains_java_main(code: &str) -> bool {
    code.contains("static void main")
}

fn find_main_unit(files: &BTreeMap<String, String>) -> Option<String> {
    files
        .iter()
        .find(|(_, content)| contains_java_main(content))
        .map(|(path, _)| path.trim_end_matches(".java").to_string())
}

/// Mask for lexical scanning: true where the byte belongs to code (not a
/// comment, string, or char literal).
fn code_mask(code: &str) -> Vec<bool> {
    #[derive(PartialEq)]
    enum State {
        Code,
        LineComment,
        BlockComment,
        Str,
        Chr,
    }
    let bytes = code.as_bytes();
    let mut mask = vec![true; bytes.len()];
    let mut state = State::Code;
    let mut i = 0;
    while i < bytes.len() {
        match state {
            State::Code => match bytes[i] {
                b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                    state = State::LineComment;
                    mask[i] = false;
                }
                b'/' if i + 1 < bytes.len() && bytes[i + 1] == b'*' => {
                    state = State::BlockComment;
                    mask[i] = false;
                }
                b'"' => {
                    state = State::Str;
                    mask[i] = false;
                }
                b'\'' => {
                    state = State::Chr;
                    mask[i] = false;
                }
                _ => {}
            },
            State::LineComment => {
                mask[i] = bytes[i] == b'\n';
                if bytes[i] == b'\n' {
                    state = State::Code;
                }
            }
            State::BlockComment => {
                mask[i] = false;
                if bytes[i] == b'*' && i + 1 < bytes.len() && bytes[i + 1] == b'/' {
                    mask[i + 1] = false;
                    i += 1;
                    state = State::Code;
                }
            }
            State::Str => {
                mask[i] = false;
                if bytes[i] == b'\\' {
                    if i + 1 < bytes.len() {
                        mask[i + 1] = false;
                        i += 1;
                    }
                } else if bytes[i] == b'"' {
                    state = State::Code;
                }
            }
            State::Chr => {
                mask[i] = false;
                if bytes[i] == b'\\' {
                    if i + 1 < bytes.len() {
                        mask[i + 1] = false;
                        i += 1;
                    }
                } else if bytes[i] == b'\'' {
                    state = State::Code;
                }
            }
        }
        i += 1;
    }
    mask
}

struct TopLevelUnit {
    name: String,
    public: bool,
    start: usize,
    end: usize, // exclusive, past the closing brace
}

/// Locate top-level type declarations by balanced-brace scanning.
fn scan_units(code: &str) -> Vec<TopLevelUnit> {
    use std::sync::OnceLock;
    static KEYWORD: OnceLock<regex::Regex> = OnceLock::new();
    static PUBLIC: OnceLock<regex::Regex> = OnceLock::new();
    let keyword = KEYWORD.get_or_init(|| {
        regex::Regex::new(r"\b(class|interface|enum|record)\s+([A-Za-z_$][\w$]*)")
            .expect("static pattern")
    });
    let public_word =
        PUBLIC.get_or_init(|| regex::Regex::new(r"\bpublic\b").expect("static pattern"));
    let mask = code_mask(code);
    let bytes = code.as_bytes();

    // depth profile over code bytes only
    let mut depth_at = vec![0i32; bytes.len() + 1];
    let mut depth = 0i32;
    for i in 0..bytes.len() {
        depth_at[i] = depth;
        if mask[i] {
            match bytes[i] {
                b'{' => depth += 1,
                b'}' => depth -= 1,
                _ => {}
            }
        }
    }
    depth_at[bytes.len()] = depth;

    let mut units = Vec::new();
    let mut cursor = 0usize;
    for caps in keyword.captures_iter(code) {
        let m = caps.get(1).expect("keyword group");
        if m.start() < cursor || !mask[m.start()] || depth_at[m.start()] != 0 {
            continue;
        }
        let name = caps.get(2).expect("name group").as_str().to_string();
        // find the opening brace, then its match
        let mut i = m.end();
        while i < bytes.len() && !(mask[i] && bytes[i] == b'{') {
            i += 1;
        }
        if i >= bytes.len() {
            continue;
        }
        let mut d = 0i32;
        let mut end = bytes.len();
        for j in i..bytes.len() {
            if mask[j] {
                match bytes[j] {
                    b'{' => d += 1,
                    b'}' => {
                        d -= 1;
                        if d == 0 {
                            end = j + 1;
                            break;
                        }
                    }
                    _ => {}
                }
            }
        }
        // the unit owns everything from the previous boundary (modifiers,
        // annotations, javadoc)
        let public = public_word.is_match(&code[cursor.min(m.start())..m.start()]);
        units.push(TopLevelUnit {
            name,
            public,
            start: cursor,
            end,
        });
        cursor = end;
    }
    units
}

fn first_public_unit_name(code: &str) -> Option<String> {
    let header_end = header_span(code);
    scan_units(&code[header_end..])
        .into_iter()
        .find(|u| u.public)
        .map(|u| u.name)
}

fn first_unit_name(code: &str) -> Option<String> {
    let header_end = header_span(code);
    scan_units(&code[header_end..])
        .into_iter()
        .next()
        .map(|u| u.name)
}

/// Byte length of the leading package/import/comment/blank region.
fn header_span(code: &str) -> usize {
    let mut end = 0usize;
    let mut offset = 0usize;
    let mut in_block_comment = false;
    for line in code.split_inclusive('\n') {
        let t = line.trim();
        let is_header = if in_block_comment {
            if t.contains("*/") {
                in_block_comment = false;
            }
            true
        } else if t.starts_with("/*") {
            in_block_comment = !t.contains("*/");
            true
        } else {
            t.is_empty()
                || t.starts_with("package ")
                || t.starts_with("import ")
                || t.starts_with("//")
        };
        offset += line.len();
        if is_header {
            end = offset;
        } else {
            break;
        }
    }
    end
}

/// Distribute top-level units across files: one file per public unit,
/// non-public units co-located with the nearest preceding public unit,
/// the shared import header replicated into every file. With no public
/// unit at all, everything lands in `Main.<ext>`.
pub fn split_top_level_units(code: &str, language: &Language) -> Result<BTreeMap<String, String>> {
    if !matches!(language, Language::Java | Language::Scala) {
        return Err(Error::UnsupportedLanguage(language.name().to_string()));
    }
    let ext = extension(language);
    let header_end = header_span(code);
    let header = &code[..header_end];
    let body = &code[header_end..];
    let units = scan_units(body);
    if units.is_empty() {
        return Err(Error::NoTopLevelUnit);
    }

    // group: leading non-public units attach to the first file
    let mut groups: Vec<(Option<String>, Vec<&TopLevelUnit>)> = Vec::new();
    for unit in &units {
        if unit.public {
            groups.push((Some(unit.name.clone()), vec![unit]));
        } else if let Some(last) = groups.last_mut() {
            last.1.push(unit);
        } else {
            groups.push((None, vec![unit]));
        }
    }
    // merge a leading anonymous group into the first named one
    if groups.len() > 1 && groups[0].0.is_none() {
        let (_, leading) = groups.remove(0);
        let mut merged = leading;
        merged.extend(groups[0].1.iter().copied());
        groups[0].1 = merged;
    }

    let mut files = BTreeMap::new();
    for (name, members) in groups {
        let file_name = match name {
            Some(n) => format!("{n}.{ext}"),
            None => format!("Main.{ext}"),
        };
        let mut content = String::new();
        if !header.trim().is_empty() {
            content.push_str(header);
            if !header.ends_with('\n') {
                content.push('\n');
            }
        }
        for unit in members {
            let text = body[unit.start..unit.end].trim_matches('\n');
            content.push_str(text);
            content.push('\n');
        }
        files.insert(file_name, content);
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Difficulty, Domain, Labels, NaturalLanguage};

    fn auto_problem(language: Language, test_code: &str) -> Problem {
        Problem {
            id: "t".to_string(),
            question: "q".to_string(),
            programming_language: language,
            test_spec: TestSpec::AutoEval {
                test_code: test_code.to_string(),
            },
            reference_solution: "s".to_string(),
            labels: Labels {
                domain: Domain::BP,
                difficulty: Difficulty::Easy,
                natural_language: NaturalLanguage::En,
            },
            entry_class: None,
            few_shot_exemplars: Vec::new(),
        }
    }

    #[test]
    fn python_concatenation_order() {
        let p = auto_problem(Language::Python, "assert f(1)==2");
        let prog = synthesize_auto_eval("def f(x): return x+1", &p).unwrap();
        let content = &prog.files["main.py"];
        assert_eq!(content, "def f(x): return x+1\n\nassert f(1)==2\n");
        assert!(!prog.needs_compile);
    }

    #[test]
    fn solution_bytes_appear_exactly_once() {
        let code = "def f(x):\n    return x + 1";
        let p = auto_problem(Language::Python, "assert f(0)==1");
        let prog = synthesize_auto_eval(code, &p).unwrap();
        let content = &prog.files["main.py"];
        assert_eq!(content.matches(code).count(), 1);
    }

    #[test]
    fn cpp_duplicate_includes_dropped_from_harness() {
        let code = "#include <vector>\nint add(int a,int b){return a+b;}\n";
        let test = "#include <vector>\n#include <cassert>\nint main(){assert(add(1,2)==3);}\n";
        let p = auto_problem(Language::Cpp, test);
        let prog = synthesize_auto_eval(code, &p).unwrap();
        let content = &prog.files["main.cpp"];
        assert_eq!(content.matches("#include <vector>").count(), 1);
        assert_eq!(content.matches("#include <cassert>").count(), 1);
        assert!(prog.needs_compile);
        // solution first, harness second
        assert!(content.find("int add").unwrap() < content.find("int main").unwrap());
    }

    #[test]
    fn go_single_package_clause() {
        let code = "package main\n\nimport \"fmt\"\n\nfunc Add(a, b int) int { return a + b }\n";
        let test = "package main\n\nimport \"fmt\"\n\nfunc main() { fmt.Println(Add(1, 2)) }\n";
        let p = auto_problem(Language::Go, test);
        let prog = synthesize_auto_eval(code, &p).unwrap();
        let content = &prog.files["main.go"];
        assert_eq!(content.matches("package main").count(), 1);
        assert_eq!(content.matches("import \"fmt\"").count(), 1);
    }

    #[test]
    fn go_conflicting_packages_error() {
        let code = "package main\nfunc A() {}\n";
        let test = "package other\nfunc main() {}\n";
        let p = auto_problem(Language::Go, test);
        assert!(matches!(
            synthesize_auto_eval(code, &p).unwrap_err(),
            Error::HeaderConflict(_)
        ));
    }

    #[test]
    fn solution_main_renamed_when_harness_has_one() {
        let code = "#include <cstdio>\nint main(){ printf(\"solution\"); return 0; }\n";
        let test = "int main(){ return 0; }\n";
        let p = auto_problem(Language::Cpp, test);
        let prog = synthesize_auto_eval(code, &p).unwrap();
        let content = &prog.files["main.cpp"];
        assert_eq!(content.matches("int main(").count(), 1);
        assert!(content.contains("int solution_main("));
    }

    #[test]
    fn empty_code_rejected() {
        let p = auto_problem(Language::Python, "assert True");
        assert!(matches!(
            synthesize_auto_eval("  \n", &p).unwrap_err(),
            Error::EmptyProgram
        ));
        assert!(matches!(
            synthesize_oj("", &Language::Python).unwrap_err(),
            Error::EmptyProgram
        ));
    }

    #[test]
    fn oj_is_identity_wrapping() {
        let prog = synthesize_oj("print(input())", &Language::Python).unwrap();
        assert_eq!(prog.files["main.py"], "print(input())");
        assert!(prog.run_stdin.is_none());
        let cpp = "#include <cstdio>\nint main(){int x; scanf(\"%d\",&x); printf(\"%d\",x+1);}\n";
        let prog = synthesize_oj(cpp, &Language::Cpp).unwrap();
        assert_eq!(prog.files["main.cpp"], cpp);
    }

    #[test]
    fn java_public_classes_split_into_files() {
        let code = "public class Foo { int x; }\npublic class Bar { int y; }\n";
        let files = split_top_level_units(code, &Language::Java).unwrap();
        assert_eq!(
            files.keys().collect::<Vec<_>>(),
            vec!["Bar.java", "Foo.java"]
        );
        assert!(files["Foo.java"].contains("class Foo"));
        assert!(files["Bar.java"].contains("class Bar"));
    }

    #[test]
    fn java_import_header_replicated() {
        let code = "import java.util.*;\npublic class Foo {}\npublic class Bar {}\n";
        let files = split_top_level_units(code, &Language::Java).unwrap();
        assert!(files["Foo.java"].starts_with("import java.util.*;"));
        assert!(files["Bar.java"].starts_with("import java.util.*;"));
    }

    #[test]
    fn java_package_private_only_goes_to_main_default() {
        let files = split_top_level_units("class helper {}", &Language::Java).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files.contains_key("Main.java"));
        assert!(files["Main.java"].contains("class helper"));
    }

    #[test]
    fn java_non_public_co_located_with_preceding_public() {
        let code = "public class A {}\nclass B {}\npublic class C {}\n";
        let files = split_top_level_units(code, &Language::Java).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files["A.java"].contains("class B"));
        assert!(!files["C.java"].contains("class B"));
    }

    #[test]
    fn java_braces_in_strings_and_comments_ignored() {
        let code = "public class A { String s = \"}{\"; // }\n/* } */ }\nclass B {}\n";
        let files = split_top_level_units(code, &Language::Java).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files["A.java"].contains("class B"));
    }

    #[test]
    fn java_no_units_is_an_error() {
        assert!(matches!(
            split_top_level_units("int x = 3;", &Language::Java).unwrap_err(),
            Error::NoTopLevelUnit
        ));
    }

    #[test]
    fn java_synthesis_emits_n_plus_test_files() {
        let code = "public class Foo { static int f() { return 1; } }\npublic class Bar {}\n";
        let test =
            "public class Check { public static void main(String[] a) { assert Foo.f() == 1; } }";
        let p = auto_problem(Language::Java, test);
        let prog = synthesize_auto_eval(code, &p).unwrap();
        assert_eq!(prog.files.len(), 3);
        assert!(prog.files.contains_key("Check.java"));
        assert_eq!(prog.entry_hint.as_deref(), Some("Check"));
    }

    #[test]
    fn java_entry_class_override_wins() {
        let code = "public class Foo {}";
        let test = "public class Check { public static void main(String[] a) {} }";
        let mut p = auto_problem(Language::Java, test);
        p.entry_class = Some("Custom".to_string());
        let prog = synthesize_auto_eval(code, &p).unwrap();
        assert_eq!(prog.entry_hint.as_deref(), Some("Custom"));
    }

    #[test]
    fn path_traversal_rejected() {
        let mut files = BTreeMap::new();
        files.insert("../evil.py".to_string(), "x".to_string());
        let program = TestProgram {
            files,
            language: Language::Python,
            needs_compile: false,
            run_stdin: None,
            entry_hint: None,
        };
        assert!(program.validate().is_err());
    }
}
