//! Text prompt templates with `{name}` slots.
//!
//! Leading lines starting with `#` are file comments and are dropped.
//! Substitution is a single pass, so braces inside substituted values (code,
//! for instance) are never expanded again, and braces that do not name a
//! known slot are kept verbatim.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("prompt template is missing slot {{{0}}}")]
    MissingSlot(String),
    #[error("no value supplied for slot {{{0}}}")]
    UnfilledSlot(String),
    #[error("reading prompt template {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplate {
    text: String,
    slots: Vec<String>,
}

impl PromptTemplate {
    /// Parses `text` and checks that every slot in `required` appears.
    pub fn new(text: &str, required: &[&str]) -> Result<Self, PromptError> {
        let body: Vec<&str> = text.lines().skip_while(|l| l.starts_with('#')).collect();
        let text = body.join("\n");
        let slots: Vec<String> = pieces(&text)
            .into_iter()
            .filter_map(|p| match p {
                Piece::Slot(s) => Some(s.to_string()),
                Piece::Text(_) => None,
            })
            .collect();
        for r in required {
            if !slots.iter().any(|s| s == r) {
                return Err(PromptError::MissingSlot((*r).to_string()));
            }
        }
        Ok(PromptTemplate { text, slots })
    }

    pub fn load(path: &Path, required: &[&str]) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PromptError::Io { path: path.display().to_string(), source })?;
        Self::new(&text, required)
    }

    pub fn slots(&self) -> &[String] {
        &self.slots
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Fills slots from `values`; every slot in the template needs a value.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String, PromptError> {
        let map: BTreeMap<&str, &str> = values.iter().copied().collect();
        let mut out = String::with_capacity(self.text.len());
        for p in pieces(&self.text) {
            match p {
                Piece::Text(t) => out.push_str(t),
                Piece::Slot(name) => match map.get(name) {
                    Some(v) => out.push_str(v),
                    None => return Err(PromptError::UnfilledSlot(name.to_string())),
                },
            }
        }
        Ok(out)
    }
}

enum Piece<'a> {
    Text(&'a str),
    Slot(&'a str),
}

/// Splits on `{identifier}` occurrences; anything else stays text.
fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            let name_end = bytes[i + 1..]
                .iter()
                .position(|&b| !(b.is_ascii_lowercase() || b == b'_'))
                .map(|p| i + 1 + p);
            if let Some(end) = name_end {
                if end > i + 1 && bytes[end] == b'}' {
                    if start < i {
                        out.push(Piece::Text(&text[start..i]));
                    }
                    out.push(Piece::Slot(&text[i + 1..end]));
                    i = end + 1;
                    start = i;
                    continue;
                }
            }
        }
        i += 1;
    }
    if start < text.len() {
        out.push(Piece::Text(&text[start..]));
    }
    out
}
