//! JSON-lines reading and writing.
//!
//! A file may begin with a header object of the form `{"_header": {...}}`;
//! readers return it separately from the records.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub const HEADER_KEY: &str = "_header";

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Parse { path: String, line: usize, source: serde_json::Error },
    #[error("serializing record: {0}")]
    Serialize(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub struct JsonlFile<T> {
    pub header: Option<Value>,
    pub records: Vec<T>,
}

fn header_of(line: &str) -> Option<Value> {
    let v: Value = serde_json::from_str(line).ok()?;
    let obj = v.as_object()?;
    if obj.len() == 1 {
        obj.get(HEADER_KEY).cloned()
    } else {
        None
    }
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> Result<JsonlFile<T>, JsonlError> {
    parse_lines(text.lines().map(|l| Ok(l.to_string())), origin)
}

fn parse_lines<T: DeserializeOwned>(
    lines: impl Iterator<Item = io::Result<String>>,
    origin: &str,
) -> Result<JsonlFile<T>, JsonlError> {
    let mut header = None;
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|source| JsonlError::Io { path: origin.to_string(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        if idx == 0 {
            if let Some(h) = header_of(&line) {
                header = Some(h);
                continue;
            }
        }
        let record = serde_json::from_str(&line).map_err(|source| JsonlError::Parse {
            path: origin.to_string(),
            line: idx + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(JsonlFile { header, records })
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<JsonlFile<T>, JsonlError> {
    let origin = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| JsonlError::Io { path: origin.clone(), source })?;
    parse_lines(BufReader::new(file).lines(), &origin)
}

/// Records only; any header is dropped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, JsonlError> {
    Ok(read_jsonl_file(path)?.records)
}

/// Serializes records one per line, preceded by the header when given.
pub fn to_jsonl_string<T: Serialize>(header: Option<&Value>, records: &[T]) -> Result<String, JsonlError> {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(&serde_json::to_string(&serde_json::json!({ HEADER_KEY: h }))?);
        out.push('\n');
    }
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, header: Option<&Value>, records: &[T]) -> Result<(), JsonlError> {
    let text = to_jsonl_string(header, records)?;
    let origin = path.display().to_string();
    let mut f = fs::File::create(path).map_err(|source| JsonlError::Io { path: origin.clone(), source })?;
    f.write_all(text.as_bytes()).map_err(|source| JsonlError::Io { path: origin, source })
}
