use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::client::{run_bounded, ChatClient, ClientError, Sampling};
use crate::model::{parse_review, DatasetEntry, ReviewComment, SecurityType};
use crate::prompt::{PromptError, PromptTemplate};

use super::DEFAULT_ATTEMPTS;

const DEFAULT_PROMPT: &str = include_str!("../../data/prompts/refine.txt");
const DEFAULT_EXEMPLAR: &str = include_str!("../../data/refine_exemplar.json");

pub const REFINE_SLOTS: [&str; 6] =
    ["exemplar_diff", "exemplar_raw", "exemplar_comment", "diff", "raw_comment", "security_type"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RefineError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("entry {id}: no parseable structured comment after {attempts} attempt(s)")]
    UnparseableRefinement { id: String, attempts: u32, last: String },
    #[error("entry {id}: model kept producing {got} instead of {expected}")]
    TypeDrift { id: String, expected: SecurityType, got: SecurityType },
    #[error("entry {0} has no raw comment to refine")]
    MissingRawComment(String),
    #[error("{0}")]
    Prompt(String),
}

impl From<PromptError> for RefineError {
    fn from(e: PromptError) -> Self {
        RefineError::Prompt(e.to_string())
    }
}

/// The fixed one-shot example shown to the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub diff: String,
    pub raw_comment: String,
    pub comment: ReviewComment,
}

impl Exemplar {
    pub fn builtin() -> Self {
        serde_json::from_str(DEFAULT_EXEMPLAR).expect("bundled exemplar is valid")
    }

    pub fn load(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}

pub struct Refiner<C> {
    client: C,
    prompt: PromptTemplate,
    exemplar: Exemplar,
    pub attempts: u32,
    pub sampling: Sampling,
}

impl<C: ChatClient> Refiner<C> {
    pub fn new(client: C) -> Self {
        let prompt = PromptTemplate::new(DEFAULT_PROMPT, &REFINE_SLOTS).expect("bundled refine prompt is valid");
        Refiner { client, prompt, exemplar: Exemplar::builtin(), attempts: DEFAULT_ATTEMPTS, sampling: Sampling::Greedy }
    }

    pub fn with_prompt(mut self, prompt: PromptTemplate) -> Self {
        self.prompt = prompt;
        self
    }

    pub fn with_exemplar(mut self, exemplar: Exemplar) -> Self {
        self.exemplar = exemplar;
        self
    }

    /// Produces a structured comment of the entry's own type. Responses that
    /// fail to parse or name another type are retried.
    pub fn refine(&self, entry: &DatasetEntry) -> Result<ReviewComment, RefineError> {
        if entry.security_type == SecurityType::NonIssue {
            return Ok(ReviewComment::non_issue());
        }
        let raw = entry.raw_comment.as_deref().ok_or_else(|| RefineError::MissingRawComment(entry.id.clone()))?;
        let exemplar_comment = self.exemplar.comment.render();
        let user = self.prompt.render(&[
            ("exemplar_diff", &self.exemplar.diff),
            ("exemplar_raw", &self.exemplar.raw_comment),
            ("exemplar_comment", &exemplar_comment),
            ("diff", entry.diff.raw()),
            ("raw_comment", raw),
            ("security_type", entry.security_type.display_name()),
        ])?;
        let request = self.sampling.request(user);
        let attempts = self.attempts.max(1);
        let mut drift = None;
        let mut last = String::new();
        for _ in 0..attempts {
            last = self.client.chat(&request)?;
            match parse_review(&last) {
                Ok(c) if c.security_type() == entry.security_type => return Ok(c),
                Ok(c) => drift = Some(c.security_type()),
                Err(_) => {}
            }
        }
        Err(match drift {
            Some(got) => RefineError::TypeDrift { id: entry.id.clone(), expected: entry.security_type, got },
            None => RefineError::UnparseableRefinement { id: entry.id.clone(), attempts, last },
        })
    }
}

/// Refines a batch; results line up with `entries`.
pub fn refine_entries<C: ChatClient>(
    entries: &[DatasetEntry],
    refiner: &Refiner<C>,
    concurrency: usize,
) -> Vec<Result<DatasetEntry, RefineError>> {
    run_bounded(entries, concurrency, |e| {
        let comment = refiner.refine(e)?;
        Ok(DatasetEntry { comment: Some(comment), ..e.clone() })
    })
}
