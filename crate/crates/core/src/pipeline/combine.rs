use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::EntryError;
use crate::model::{DatasetEntry, RawRecord, SecurityType, Source};

use super::MatchCandidate;

const BUILTIN_MERGE_MAP: &str = include_str!("../../data/merge_map.json");

#[derive(Debug, thiserror::Error)]
pub enum CombineError {
    #[error("merge map has no target for {0}")]
    UnmappedType(SecurityType),
    #[error("merge map sends issue type {0} to Non-Issue")]
    MergesIntoNonIssue(SecurityType),
    #[error("non-issue pool has {available} records, {needed} requested")]
    InsufficientNonIssuePool { needed: usize, available: usize },
    #[error("candidate refers to unknown record {0}")]
    UnknownEntry(String),
    #[error("duplicate entry id {0}")]
    DuplicateId(String),
    #[error(transparent)]
    Entry(#[from] EntryError),
    #[error("merge map: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Rewrites matched types into the final taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MergeMap(BTreeMap<SecurityType, SecurityType>);

impl MergeMap {
    pub fn new(map: BTreeMap<SecurityType, SecurityType>) -> Result<Self, CombineError> {
        for (&from, &to) in &map {
            if from.is_issue() && !to.is_issue() {
                return Err(CombineError::MergesIntoNonIssue(from));
            }
        }
        Ok(MergeMap(map))
    }

    pub fn identity() -> Self {
        MergeMap(SecurityType::ALL.iter().map(|&t| (t, t)).collect())
    }

    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_MERGE_MAP).expect("bundled merge map is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, CombineError> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn load(path: &Path) -> Result<Self, CombineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CombineError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn apply(&self, ty: SecurityType) -> Result<SecurityType, CombineError> {
        self.0.get(&ty).copied().ok_or(CombineError::UnmappedType(ty))
    }
}

/// Builds the labelled dataset from judged candidates.
///
/// Candidates with a negative verdict are skipped. Entries are unique by
/// (diff, raw comment); keyword hits are taken before embedding hits, so a
/// collision keeps the keyword-sourced copy, and within one source the
/// earliest candidate wins. The first `non_issue_count` pool records by
/// sorted id are appended as Non-Issue entries. Output is sorted by id.
pub fn combine_and_balance(
    keyword_hits: &[MatchCandidate],
    embedding_hits: &[MatchCandidate],
    records: &HashMap<String, RawRecord>,
    non_issue_pool: &[RawRecord],
    merge_map: &MergeMap,
    non_issue_count: usize,
) -> Result<Vec<DatasetEntry>, CombineError> {
    if non_issue_count > non_issue_pool.len() {
        return Err(CombineError::InsufficientNonIssuePool {
            needed: non_issue_count,
            available: non_issue_pool.len(),
        });
    }
    let mut seen: HashSet<(String, Option<String>)> = HashSet::new();
    let mut ids: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    let hits = keyword_hits
        .iter()
        .map(|c| (c, Source::Keyword))
        .chain(embedding_hits.iter().map(|c| (c, Source::Embedding)));
    for (c, source) in hits {
        if c.verdict == Some(false) {
            continue;
        }
        let record = records.get(&c.entry_id).ok_or_else(|| CombineError::UnknownEntry(c.entry_id.clone()))?;
        let ty = merge_map.apply(c.matched_type)?;
        if !seen.insert((record.diff.clone(), record.comment_raw.clone())) {
            continue;
        }
        if !ids.insert(record.id.clone()) {
            return Err(CombineError::DuplicateId(record.id.clone()));
        }
        out.push(record.clone().into_entry(ty, source)?);
    }
    let mut pool: Vec<&RawRecord> = non_issue_pool.iter().collect();
    pool.sort_by(|a, b| a.id.cmp(&b.id));
    for record in pool.into_iter().take(non_issue_count) {
        if !ids.insert(record.id.clone()) {
            return Err(CombineError::DuplicateId(record.id.clone()));
        }
        out.push(record.clone().into_entry(SecurityType::NonIssue, Source::NonIssue)?);
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}
