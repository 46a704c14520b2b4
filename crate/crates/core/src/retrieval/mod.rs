//! Template datastore with per-type BM25 retrieval.

mod bm25;

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::jsonl::{self, JsonlError};
use crate::model::{CodeDiff, EmptyDiff, ReviewComment, SecurityType};
use crate::text::normalize_text;

pub use bm25::{bm25_score, Bm25Params, CorpusStats};

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("duplicate template id {0}")]
    DuplicateTemplateId(String),
    #[error("template {0} is labelled Non-Issue")]
    NonIssueTemplate(String),
    #[error("template {id}: comment type {comment} differs from template type {template}")]
    CommentTypeMismatch { id: String, comment: SecurityType, template: SecurityType },
    #[error(transparent)]
    EmptyDiff(#[from] EmptyDiff),
    #[error("retrieval is only defined for issue types, got Non-Issue")]
    NonIssueQueryType,
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
}

/// A curated (diff, structured comment) exemplar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateRecord", into = "TemplateRecord")]
pub struct Template {
    pub id: String,
    pub security_type: SecurityType,
    pub diff: CodeDiff,
    pub comment: ReviewComment,
}

impl Template {
    pub fn new(
        id: impl Into<String>,
        diff: CodeDiff,
        comment: ReviewComment,
    ) -> Result<Self, RetrievalError> {
        let t = Template { id: id.into(), security_type: comment.security_type(), diff, comment };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), RetrievalError> {
        if self.security_type == SecurityType::NonIssue {
            return Err(RetrievalError::NonIssueTemplate(self.id.clone()));
        }
        if self.comment.security_type() != self.security_type {
            return Err(RetrievalError::CommentTypeMismatch {
                id: self.id.clone(),
                comment: self.comment.security_type(),
                template: self.security_type,
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TemplateRecord {
    id: String,
    security_type: SecurityType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    diff: String,
    comment: ReviewComment,
}

impl TryFrom<TemplateRecord> for Template {
    type Error = RetrievalError;

    fn try_from(r: TemplateRecord) -> Result<Self, Self::Error> {
        let mut diff = CodeDiff::new(r.diff)?;
        diff.language = r.lang;
        let t = Template { id: r.id, security_type: r.security_type, diff, comment: r.comment };
        t.validate()?;
        Ok(t)
    }
}

impl From<Template> for TemplateRecord {
    fn from(t: Template) -> Self {
        TemplateRecord {
            id: t.id,
            security_type: t.security_type,
            lang: t.diff.language.clone(),
            diff: t.diff.raw().to_string(),
            comment: t.comment,
        }
    }
}

/// A retrieval hit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored<'a> {
    pub template: &'a Template,
    pub score: f64,
}

/// Immutable template store. Each type partition carries its own corpus
/// statistics, since a query is only ever scored against one partition.
#[derive(Debug, Clone)]
pub struct TemplateStore {
    templates: Vec<Template>,
    docs: Vec<Vec<String>>,
    partitions: BTreeMap<SecurityType, Vec<usize>>,
    stats: BTreeMap<SecurityType, CorpusStats>,
    params: Bm25Params,
}

impl TemplateStore {
    pub fn build(templates: Vec<Template>) -> Result<Self, RetrievalError> {
        Self::with_params(templates, Bm25Params::default())
    }

    pub fn with_params(mut templates: Vec<Template>, params: Bm25Params) -> Result<Self, RetrievalError> {
        let mut seen = HashSet::new();
        for t in &templates {
            t.validate()?;
            if !seen.insert(t.id.clone()) {
                return Err(RetrievalError::DuplicateTemplateId(t.id.clone()));
            }
        }
        templates.sort_by(|a, b| a.id.cmp(&b.id));
        let docs: Vec<Vec<String>> = templates.iter().map(|t| normalize_text(t.diff.raw())).collect();
        let mut partitions: BTreeMap<SecurityType, Vec<usize>> = BTreeMap::new();
        for (i, t) in templates.iter().enumerate() {
            partitions.entry(t.security_type).or_default().push(i);
        }
        let stats = partitions
            .iter()
            .map(|(&ty, idx)| (ty, CorpusStats::from_docs(idx.iter().map(|&i| docs[i].as_slice()))))
            .collect();
        Ok(TemplateStore { templates, docs, partitions, stats, params })
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        Self::build(jsonl::read_jsonl(path)?)
    }

    /// Templates sorted by id.
    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    /// Template ids per type, ascending.
    pub fn per_type_index(&self) -> BTreeMap<SecurityType, Vec<&str>> {
        self.partitions
            .iter()
            .map(|(&ty, idx)| (ty, idx.iter().map(|&i| self.templates[i].id.as_str()).collect()))
            .collect()
    }

    pub fn stats(&self, ty: SecurityType) -> Option<&CorpusStats> {
        self.stats.get(&ty)
    }

    /// Top `k` templates of `ty` for the diff, by BM25 score descending,
    /// then template id ascending.
    pub fn retrieve(&self, diff: &CodeDiff, ty: SecurityType, k: usize) -> Result<Vec<Scored<'_>>, RetrievalError> {
        self.retrieve_tokens(&normalize_text(diff.raw()), ty, k)
    }

    pub fn retrieve_tokens(&self, query: &[String], ty: SecurityType, k: usize) -> Result<Vec<Scored<'_>>, RetrievalError> {
        if ty == SecurityType::NonIssue {
            return Err(RetrievalError::NonIssueQueryType);
        }
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let (Some(idx), Some(stats)) = (self.partitions.get(&ty), self.stats.get(&ty)) else {
            return Ok(Vec::new());
        };
        // partition indices are already in id order, so a stable sort on
        // score alone leaves ties in ascending id
        let mut hits: Vec<Scored<'_>> = idx
            .iter()
            .map(|&i| Scored {
                template: &self.templates[i],
                score: bm25_score(query, &self.docs[i], stats, self.params),
            })
            .collect();
        hits.sort_by(|a, b| b.score.total_cmp(&a.score));
        hits.truncate(k);
        Ok(hits)
    }
}
