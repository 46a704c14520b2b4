use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::diff::{CodeDiff, EmptyDiff};
use super::review::ReviewComment;
use super::security_type::SecurityType;

/// How an entry entered the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Keyword,
    Embedding,
    NonIssue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EntryError {
    #[error(transparent)]
    EmptyDiff(#[from] EmptyDiff),
    #[error("entry {id}: source {origin:?} is inconsistent with security type {security_type}")]
    SourceMismatch { id: String, origin: Source, security_type: SecurityType },
    #[error("entry {id}: comment type {comment} differs from entry type {entry}")]
    CommentTypeMismatch { id: String, comment: SecurityType, entry: SecurityType },
    #[error("entry id is empty")]
    EmptyId,
}

/// One labelled record of the security review dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRecord", into = "DatasetRecord")]
pub struct DatasetEntry {
    pub id: String,
    pub diff: CodeDiff,
    pub raw_comment: Option<String>,
    pub comment: Option<ReviewComment>,
    pub security_type: SecurityType,
    pub source: Source,
    pub split: Option<Split>,
}

impl DatasetEntry {
    pub fn validate(&self) -> Result<(), EntryError> {
        if self.id.is_empty() {
            return Err(EntryError::EmptyId);
        }
        if (self.source == Source::NonIssue) != (self.security_type == SecurityType::NonIssue) {
            return Err(EntryError::SourceMismatch {
                id: self.id.clone(),
                origin: self.source,
                security_type: self.security_type,
            });
        }
        if let Some(c) = &self.comment {
            if c.security_type() != self.security_type {
                return Err(EntryError::CommentTypeMismatch {
                    id: self.id.clone(),
                    comment: c.security_type(),
                    entry: self.security_type,
                });
            }
        }
        Ok(())
    }

    /// Key used for duplicate detection.
    pub fn identity(&self) -> (&str, Option<&str>) {
        (self.diff.raw(), self.raw_comment.as_deref())
    }
}

/// JSON-lines layout of a dataset entry. Unknown keys land in `extra`.
#[derive(Serialize, Deserialize)]
struct DatasetRecord {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    diff: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comment_raw: Option<String>,
    security_type: Option<SecurityType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comment: Option<ReviewComment>,
    source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

impl TryFrom<DatasetRecord> for DatasetEntry {
    type Error = EntryError;

    fn try_from(r: DatasetRecord) -> Result<Self, Self::Error> {
        let mut diff = CodeDiff::new(r.diff)?;
        diff.language = r.lang;
        diff.metadata = r.extra;
        // Older files carry the type only inside the comment.
        let security_type = match (r.security_type, &r.comment) {
            (Some(t), _) => t,
            (None, Some(c)) => c.security_type(),
            (None, None) if r.source == Source::NonIssue => SecurityType::NonIssue,
            (None, None) => {
                return Err(EntryError::SourceMismatch {
                    id: r.id,
                    origin: r.source,
                    security_type: SecurityType::NonIssue,
                })
            }
        };
        let entry = DatasetEntry {
            id: r.id,
            diff,
            raw_comment: r.comment_raw,
            comment: r.comment,
            security_type,
            source: r.source,
            split: r.split,
        };
        entry.validate()?;
        Ok(entry)
    }
}

impl From<DatasetEntry> for DatasetRecord {
    fn from(e: DatasetEntry) -> Self {
        DatasetRecord {
            id: e.id,
            lang: e.diff.language.clone(),
            diff: e.diff.raw().to_string(),
            comment_raw: e.raw_comment,
            security_type: Some(e.security_type),
            comment: e.comment,
            source: e.source,
            split: e.split,
            extra: e.diff.metadata,
        }
    }
}

/// An unlabelled upstream record (diff plus optional reviewer comment), the
/// input to candidate collection. Accepts CodeReviewer key names
/// (`patch`, `msg`) as aliases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(alias = "patch")]
    pub diff: String,
    #[serde(default, alias = "msg", skip_serializing_if = "Option::is_none")]
    pub comment_raw: Option<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, Value>,
}

impl RawRecord {
    pub fn code_diff(&self) -> Result<CodeDiff, EmptyDiff> {
        let mut d = CodeDiff::new(self.diff.clone())?;
        d.language = self.lang.clone();
        d.metadata = self.extra.clone();
        Ok(d)
    }

    pub fn into_entry(
        self,
        security_type: SecurityType,
        source: Source,
    ) -> Result<DatasetEntry, EntryError> {
        let diff = self.code_diff()?;
        let comment = (security_type == SecurityType::NonIssue).then(ReviewComment::non_issue);
        let entry = DatasetEntry {
            id: self.id,
            diff,
            raw_comment: self.comment_raw,
            comment,
            security_type,
            source,
            split: None,
        };
        entry.validate()?;
        Ok(entry)
    }
}
