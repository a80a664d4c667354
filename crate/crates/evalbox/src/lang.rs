//! Language identifiers and fence-tag normalization.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Canonical language identifier.
///
/// The core set below each maps to exactly one runner profile in the
/// default registry. Additional languages can be registered at runtime
/// under `Language::Plugin` names (see [`crate::runner::Registry`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Language {
    Python,
    Cpp,
    CSharp,
    Go,
    Java,
    JavaScript,
    TypeScript,
    Php,
    Rust,
    Bash,
    Lua,
    R,
    Perl,
    D,
    Ruby,
    Scala,
    Julia,
    Kotlin,
    /// A runtime-registered language (e.g. `sql`, `html`).
    Plugin(String),
}

impl Language {
    pub const CORE: &'static [Language] = &[
        Language::Python,
        Language::Cpp,
        Language::CSharp,
        Language::Go,
        Language::Java,
        Language::JavaScript,
        Language::TypeScript,
        Language::Php,
        Language::Rust,
        Language::Bash,
        Language::Lua,
        Language::R,
        Language::Perl,
        Language::D,
        Language::Ruby,
        Language::Scala,
        Language::Julia,
        Language::Kotlin,
    ];

    /// The canonical lowercase name.
    pub fn name(&self) -> &str {
        match self {
            Language::Python => "python",
            Language::Cpp => "cpp",
            Language::CSharp => "csharp",
            Language::Go => "go",
            Language::Java => "java",
            Language::JavaScript => "javascript",
            Language::TypeScript => "typescript",
            Language::Php => "php",
            Language::Rust => "rust",
            Language::Bash => "bash",
            Language::Lua => "lua",
            Language::R => "r",
            Language::Perl => "perl",
            Language::D => "d",
            Language::Ruby => "ruby",
            Language::Scala => "scala",
            Language::Julia => "julia",
            Language::Kotlin => "kotlin",
            Language::Plugin(name) => name,
        }
    }

    /// Parse a canonical name. Unknown names become `Plugin` languages;
    /// whether a runner exists for them is decided by the registry.
    pub fn from_name(name: &str) -> Language {
        for lang in Self::CORE {
            if lang.name() == name {
                return lang.clone();
            }
        }
        Language::Plugin(name.to_string())
    }

    /// Whether this language has a separate compile phase before running.
    pub fn is_compiled(&self) -> bool {
        matches!(
            self,
            Language::Cpp
                | Language::CSharp
                | Language::Go
                | Language::Java
                | Language::TypeScript
                | Language::Rust
                | Language::D
                | Language::Scala
                | Language::Kotlin
        )
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Language> for String {
    fn from(lang: Language) -> String {
        lang.name().to_string()
    }
}

impl From<String> for Language {
    fn from(value: String) -> Self {
        Language::from_name(&value)
    }
}

/// Map a markdown fence tag to a canonical language, case-insensitively.
///
/// Returns `None` for tags absent from the alias table. Total: never fails.
pub fn normalize_language_tag(tag: &str) -> Option<Language> {
    let lower = tag.trim().to_ascii_lowercase();
    let lang = match lower.as_str() {
        "cpp" | "c++" | "cxx" => Language::Cpp,
        "js" | "node" => Language::JavaScript,
        "ts" => Language::TypeScript,
        "py" | "python3" => Language::Python,
        "sh" | "shell" => Language::Bash,
        "c#" | "cs" => Language::CSharp,
        "rs" => Language::Rust,
        "rb" => Language::Ruby,
        "kt" => Language::Kotlin,
        "pl" => Language::Perl,
        other => {
            return Language::CORE
                .iter()
                .find(|lang| lang.name() == other)
                .cloned()
        }
    };
    Some(lang)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_table_lookup() {
        assert_eq!(normalize_language_tag("C++"), Some(Language::Cpp));
        assert_eq!(normalize_language_tag("js"), Some(Language::JavaScript));
        assert_eq!(normalize_language_tag("brainfudge"), None);
    }

    #[test]
    fn canonical_names_normalize_to_themselves() {
        for lang in Language::CORE {
            assert_eq!(normalize_language_tag(lang.name()).as_ref(), Some(lang));
            assert_eq!(
                normalize_language_tag(&lang.name().to_uppercase()).as_ref(),
                Some(lang)
            );
        }
    }

    #[test]
    fn listed_aliases() {
        let pairs = [
            ("cxx", Language::Cpp),
            ("node", Language::JavaScript),
            ("ts", Language::TypeScript),
            ("py", Language::Python),
            ("python3", Language::Python),
            ("shell", Language::Bash),
            ("c#", Language::CSharp),
            ("cs", Language::CSharp),
            ("rs", Language::Rust),
            ("rb", Language::Ruby),
            ("kt", Language::Kotlin),
            ("pl", Language::Perl),
        ];
        for (tag, want) in pairs {
            assert_eq!(normalize_language_tag(tag), Some(want), "tag {tag}");
        }
    }

    #[test]
    fn name_round_trip() {
        for lang in Language::CORE {
            assert_eq!(&Language::from_name(lang.name()), lang);
        }
        assert_eq!(
            Language::from_name("sql"),
            Language::Plugin("sql".to_string())
        );
    }

    #[test]
    fn compiled_classification() {
        assert!(Language::Cpp.is_compiled());
        assert!(Language::Java.is_compiled());
        assert!(Language::TypeScript.is_compiled());
        assert!(!Language::Python.is_compiled());
        assert!(!Language::Bash.is_compiled());
    }

    #[test]
    fn serde_uses_canonical_names() {
        let json = serde_json::to_string(&Language::Cpp).unwrap();
        assert_eq!(json, "\"cpp\"");
        let back: Language = serde_json::from_str("\"javascript\"").unwrap();
        assert_eq!(back, Language::JavaScript);
    }
}
