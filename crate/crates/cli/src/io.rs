use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use secrev_core::jsonl;

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    jsonl::read_jsonl(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_records<T: Serialize>(path: &Path, header: Option<&Value>, records: &[T]) -> Result<()> {
    jsonl::write_jsonl(path, header, records).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// A per-entry failure line in an output file.
#[derive(Debug, Serialize)]
pub struct ErrorRecord<'a> {
    pub id: &'a str,
    pub error: String,
}
