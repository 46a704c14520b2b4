//! Dataset construction: candidate collection, judging, combination,
//! refinement into structured comments, and stratified splitting.

mod combine;
mod embedding;
mod judge;
mod keyword;
mod refine;
mod split;

use serde::{Deserialize, Serialize};

use crate::model::SecurityType;

pub use combine::{combine_and_balance, CombineError, MergeMap};
pub use embedding::{
    cosine_similarity, embed_text, embedding_match, CweDescription, DimensionMismatch, Embedding,
    EmbeddingError, EmbeddingMatcher, WordVectorTable, DEFAULT_THRESHOLD,
};
pub use judge::{judge_candidates, parse_verdict, Judge, JudgeError, JudgeOutcome, JUDGE_SLOTS};
pub use keyword::{keyword_match, KeywordMatcher};
pub use refine::{refine_entries, Exemplar, RefineError, Refiner, REFINE_SLOTS};
pub use split::{split_dataset, SplitError, SplitHeader, SplitSizes};

/// Number of model calls made for one judgement or refinement before giving up.
pub const DEFAULT_ATTEMPTS: u32 = 3;

/// Why a candidate was proposed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Keyword { phrase: String },
    Embedding { cwe_id: String, similarity: f64 },
}

/// A (record, security type) pairing proposed by one of the matchers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub entry_id: String,
    pub matched_type: SecurityType,
    pub evidence: Evidence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
}

impl MatchCandidate {
    pub fn is_keyword(&self) -> bool {
        matches!(self.evidence, Evidence::Keyword { .. })
    }
}
