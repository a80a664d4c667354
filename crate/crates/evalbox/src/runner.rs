//! Declarative per-language runner profiles.
//!
//! A profile records how to lay out, compile, and run source for one
//! language. Command templates are argv vectors with placeholders:
//!
//! - `{file}`    conventional source file (e.g. `main.py`)
//! - `{sources}` every file matching the profile extension, expanded in place
//! - `{out}`     compiled artifact name
//! - `{entry}`   entry identifier from the test program (java class name)
//! - `{dir}`     absolute working directory
//! - `{memory_mb}` memory limit in MiB (for runtimes that take a heap flag)
//!
//! Profiles can be overridden or extended from a TOML file; additional
//! (plugin) languages are registered the same way at runtime.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::Language;

/// Session-mode driver flavor for `run_cells`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionKind {
    Python,
    Node,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunnerProfile {
    pub language: String,
    pub extension: String,
    /// Conventional single source file name.
    pub source_file: String,
    /// Compile argv template; absent for interpreted languages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile: Option<Vec<String>>,
    /// Run argv template.
    pub run: Vec<String>,
    /// Sequential-cell session support.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<SessionKind>,
    /// Extra stderr signatures that mark memory exhaustion for this runtime.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub oom_patterns: Vec<String>,
    /// Extra virtual address space granted on top of the memory limit, for
    /// runtimes that reserve large regions up front (V8).
    #[serde(default)]
    pub rlimit_as_slack_bytes: u64,
    /// Environment variables passed through the scrubbed environment so
    /// the toolchain can find itself (e.g. RUSTUP_HOME for rustup shims).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub env_passthrough: Vec<String>,
    /// Reserved: name of an isolated execution image for conflicting
    /// package versions. Accepted in profile files but not acted upon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isolation_image: Option<String>,
}

impl RunnerProfile {
    pub fn needs_compile(&self) -> bool {
        self.compile.is_some()
    }
}

#[derive(Debug, Deserialize)]
struct ProfileFile {
    #[serde(default)]
    profile: Vec<RunnerProfile>,
}

/// The profile registry: exactly one profile per language name.
#[derive(Debug, Clone)]
pub struct Registry {
    profiles: HashMap<String, RunnerProfile>,
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}

impl Registry {
    /// Registry with the built-in core profiles.
    pub fn builtin() -> Registry {
        let mut registry = Registry {
            profiles: HashMap::new(),
        };
        for profile in builtin_profiles() {
            registry.register(profile);
        }
        registry
    }

    /// Empty registry (plugin-only setups, tests).
    pub fn empty() -> Registry {
        Registry {
            profiles: HashMap::new(),
        }
    }

    /// Register or replace a profile. This is the plugin interface: any
    /// language name, including ones outside the core set, may be bound
    /// to a profile at runtime.
    pub fn register(&mut self, profile: RunnerProfile) {
        self.profiles.insert(profile.language.clone(), profile);
    }

    /// Merge profiles from a TOML file (`[[profile]]` tables) over the
    /// current contents.
    pub fn merge_toml_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed: ProfileFile = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("invalid profile file {}: {e}", path.display())))?;
        for profile in parsed.profile {
            self.register(profile);
        }
        Ok(())
    }

    pub fn get(&self, language: &Language) -> Option<&RunnerProfile> {
        self.profiles.get(language.name())
    }

    pub fn languages(&self) -> Vec<String> {
        let mut names: Vec<String> = self.profiles.keys().cloned().collect();
        names.sort();
        names
    }
}

fn argv(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|s| s.to_string()).collect()
}

fn builtin_profiles() -> Vec<RunnerProfile> {
    vec![
        RunnerProfile {
            language: "python".into(),
            extension: "py".into(),
            source_file: "main.py".into(),
            compile: None,
            run: argv(&["python3", "{file}"]),
            session: Some(SessionKind::Python),
            oom_patterns: vec!["MemoryError".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "cpp".into(),
            extension: "cpp".into(),
            source_file: "main.cpp".into(),
            compile: Some(argv(&[
                "g++",
                "-std=c++17",
                "-O1",
                "{sources}",
                "-o",
                "{out}",
            ])),
            run: argv(&["./{out}"]),
            session: None,
            oom_patterns: vec!["bad_alloc".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "javascript".into(),
            extension: "js".into(),
            source_file: "main.js".into(),
            compile: None,
            run: argv(&["node", "--max-old-space-size={memory_mb}", "{file}"]),
            session: Some(SessionKind::Node),
            oom_patterns: vec![
                "allocation failed".into(),
                "heap out of memory".into(),
                "Array buffer allocation failed".into(),
            ],
            // V8 reserves large virtual regions at startup
            rlimit_as_slack_bytes: 1024 * 1024 * 1024,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "typescript".into(),
            extension: "ts".into(),
            source_file: "main.ts".into(),
            compile: Some(argv(&[
                "tsc",
                "--target",
                "es2020",
                "--lib",
                "es2020,dom",
                "--types",
                "",
                "--module",
                "commonjs",
                "{sources}",
            ])),
            run: argv(&["node", "--max-old-space-size={memory_mb}", "main.js"]),
            session: None,
            oom_patterns: vec!["allocation failed".into(), "heap out of memory".into()],
            rlimit_as_slack_bytes: 1024 * 1024 * 1024,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "bash".into(),
            extension: "sh".into(),
            source_file: "main.sh".into(),
            compile: None,
            run: argv(&["bash", "{file}"]),
            session: None,
            oom_patterns: vec!["cannot allocate memory".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "perl".into(),
            extension: "pl".into(),
            source_file: "main.pl".into(),
            compile: None,
            run: argv(&["perl", "{file}"]),
            session: None,
            oom_patterns: vec!["Out of memory".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "rust".into(),
            extension: "rs".into(),
            source_file: "main.rs".into(),
            compile: Some(argv(&["rustc", "--edition=2021", "{file}", "-o", "{out}"])),
            run: argv(&["./{out}"]),
            session: None,
            oom_patterns: vec!["memory allocation of".into()],
            rlimit_as_slack_bytes: 0,
            // rustc is commonly a rustup shim that resolves the real
            // toolchain through these
            env_passthrough: vec!["RUSTUP_HOME".into(), "CARGO_HOME".into()],
            isolation_image: None,
        },
        RunnerProfile {
            language: "go".into(),
            extension: "go".into(),
            source_file: "main.go".into(),
            compile: Some(argv(&["go", "build", "-o", "{out}", "{sources}"])),
            run: argv(&["./{out}"]),
            session: None,
            oom_patterns: vec!["runtime: out of memory".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "java".into(),
            extension: "java".into(),
            source_file: "Main.java".into(),
            compile: Some(argv(&["javac", "{sources}"])),
            run: argv(&["java", "-Xmx{memory_mb}m", "{entry}"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryError".into()],
            rlimit_as_slack_bytes: 1024 * 1024 * 1024,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "csharp".into(),
            extension: "cs".into(),
            source_file: "main.cs".into(),
            compile: Some(argv(&["csc", "-out:{out}.exe", "{sources}"])),
            run: argv(&["mono", "{out}.exe"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryException".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "php".into(),
            extension: "php".into(),
            source_file: "main.php".into(),
            compile: None,
            run: argv(&["php", "{file}"]),
            session: None,
            oom_patterns: vec!["Allowed memory size".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "ruby".into(),
            extension: "rb".into(),
            source_file: "main.rb".into(),
            compile: None,
            run: argv(&["ruby", "{file}"]),
            session: None,
            oom_patterns: vec!["NoMemoryError".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "lua".into(),
            extension: "lua".into(),
            source_file: "main.lua".into(),
            compile: None,
            run: argv(&["lua", "{file}"]),
            session: None,
            oom_patterns: vec!["not enough memory".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "r".into(),
            extension: "r".into(),
            source_file: "main.r".into(),
            compile: None,
            run: argv(&["Rscript", "{file}"]),
            session: None,
            oom_patterns: vec!["cannot allocate".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "d".into(),
            extension: "d".into(),
            source_file: "main.d".into(),
            compile: Some(argv(&["dmd", "-of={out}", "{sources}"])),
            run: argv(&["./{out}"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryError".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "scala".into(),
            extension: "scala".into(),
            source_file: "Main.scala".into(),
            compile: Some(argv(&["scalac", "{sources}"])),
            run: argv(&["scala", "{entry}"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryError".into()],
            rlimit_as_slack_bytes: 1024 * 1024 * 1024,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "julia".into(),
            extension: "jl".into(),
            source_file: "main.jl".into(),
            compile: None,
            run: argv(&["julia", "{file}"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryError".into()],
            rlimit_as_slack_bytes: 0,
            env_passthrough: vec![],
            isolation_image: None,
        },
        RunnerProfile {
            language: "kotlin".into(),
            extension: "kt".into(),
            source_file: "main.kt".into(),
            compile: Some(argv(&[
                "kotlinc",
                "{sources}",
                "-include-runtime",
                "-d",
                "{out}.jar",
            ])),
            run: argv(&["java", "-jar", "{out}.jar"]),
            session: None,
            oom_patterns: vec!["OutOfMemoryError".into()],
            rlimit_as_slack_bytes: 1024 * 1024 * 1024,
            env_passthrough: vec![],
            isolation_image: None,
        },
    ]
}
