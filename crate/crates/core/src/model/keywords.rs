use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::security_type::SecurityType;
use crate::text::normalize_text;

const DEFAULT_KEYWORDS: &str = include_str!("../../data/keywords.json");

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordEntry {
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub cwe_ids: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum KeywordError {
    #[error("keyword {phrase:?} is listed under both {first} and {second}")]
    DuplicatePhrase { phrase: String, first: SecurityType, second: SecurityType },
    #[error("Non-Issue must not carry keywords or CWE ids")]
    NonIssueNotEmpty,
    #[error("keyword {0:?} is not lowercase")]
    NotLowercase(String),
    #[error("keyword {0:?} has no content after normalization")]
    EmptyPhrase(String),
    #[error("malformed CWE id {0:?}")]
    BadCweId(String),
    #[error("reading keyword dictionary: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing keyword dictionary: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn is_cwe_id(s: &str) -> bool {
    s.strip_prefix("CWE-")
        .is_some_and(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
}

/// Security keyword phrases and CWE ids per type.
///
/// Iteration follows the canonical type order, and within a type the file
/// order of the phrases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<SecurityType, KeywordEntry>", into = "BTreeMap<SecurityType, KeywordEntry>")]
pub struct KeywordDictionary {
    entries: BTreeMap<SecurityType, KeywordEntry>,
}

impl KeywordDictionary {
    pub fn new(entries: BTreeMap<SecurityType, KeywordEntry>) -> Result<Self, KeywordError> {
        let mut seen: BTreeMap<Vec<String>, SecurityType> = BTreeMap::new();
        for (&ty, entry) in &entries {
            if ty == SecurityType::NonIssue
                && (!entry.keywords.is_empty() || !entry.cwe_ids.is_empty())
            {
                return Err(KeywordError::NonIssueNotEmpty);
            }
            for phrase in &entry.keywords {
                if phrase.to_lowercase() != *phrase {
                    return Err(KeywordError::NotLowercase(phrase.clone()));
                }
                let key = normalize_text(phrase);
                if key.is_empty() {
                    return Err(KeywordError::EmptyPhrase(phrase.clone()));
                }
                if let Some(&first) = seen.get(&key) {
                    if first != ty {
                        return Err(KeywordError::DuplicatePhrase {
                            phrase: phrase.clone(),
                            first,
                            second: ty,
                        });
                    }
                }
                seen.insert(key, ty);
            }
            if let Some(bad) = entry.cwe_ids.iter().find(|id| !is_cwe_id(id)) {
                return Err(KeywordError::BadCweId(bad.clone()));
            }
        }
        Ok(KeywordDictionary { entries })
    }

    /// The dictionary shipped with the crate (taxonomy keyword and CWE columns).
    pub fn builtin() -> Self {
        serde_json::from_str(DEFAULT_KEYWORDS).expect("builtin keyword dictionary is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, KeywordError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self, KeywordError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Keyword phrases for a type; empty for types without an entry.
    pub fn keywords(&self, ty: SecurityType) -> &[String] {
        self.entries.get(&ty).map(|e| e.keywords.as_slice()).unwrap_or(&[])
    }

    pub fn cwe_ids(&self, ty: SecurityType) -> &[String] {
        self.entries.get(&ty).map(|e| e.cwe_ids.as_slice()).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (SecurityType, &KeywordEntry)> {
        self.entries.iter().map(|(t, e)| (*t, e))
    }

    pub fn type_for_cwe(&self, cwe_id: &str) -> Option<SecurityType> {
        self.iter().find(|(_, e)| e.cwe_ids.iter().any(|c| c == cwe_id)).map(|(t, _)| t)
    }
}

impl TryFrom<BTreeMap<SecurityType, KeywordEntry>> for KeywordDictionary {
    type Error = KeywordError;

    fn try_from(entries: BTreeMap<SecurityType, KeywordEntry>) -> Result<Self, Self::Error> {
        KeywordDictionary::new(entries)
    }
}

impl From<KeywordDictionary> for BTreeMap<SecurityType, KeywordEntry> {
    fn from(d: KeywordDictionary) -> Self {
        d.entries
    }
}
