use std::collections::BTreeMap;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("code diff is empty")]
pub struct EmptyDiff;

/// A unified-diff code change with its language tag and upstream metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeDiff {
    raw: String,
    pub language: Option<String>,
    /// Extra record fields (repo, commit, PR id, ...) carried through untouched.
    pub metadata: BTreeMap<String, Value>,
}

impl CodeDiff {
    pub fn new(raw: impl Into<String>) -> Result<Self, EmptyDiff> {
        let raw = raw.into();
        if raw.trim().is_empty() {
            return Err(EmptyDiff);
        }
        Ok(CodeDiff { raw, language: None, metadata: BTreeMap::new() })
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// Added and removed lines, with the leading `+`/`-` stripped.
    /// File headers (`+++`, `---`) are not changed lines.
    pub fn changed_lines(&self) -> impl Iterator<Item = &str> {
        self.raw.lines().filter_map(|line| {
            if line.starts_with("+++") || line.starts_with("---") {
                None
            } else {
                line.strip_prefix('+').or_else(|| line.strip_prefix('-'))
            }
        })
    }

    /// Hunk headers (`@@ ... @@`).
    pub fn hunk_headers(&self) -> impl Iterator<Item = &str> {
        self.raw.lines().filter(|l| l.starts_with("@@"))
    }
}
