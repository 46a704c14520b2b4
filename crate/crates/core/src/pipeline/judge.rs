use std::collections::HashMap;

use crate::client::{run_bounded, ChatClient, ClientError, Sampling};
use crate::model::RawRecord;
use crate::prompt::{PromptError, PromptTemplate};

use super::{MatchCandidate, DEFAULT_ATTEMPTS};

const DEFAULT_PROMPT: &str = include_str!("../../data/prompts/judge.txt");

pub const JUDGE_SLOTS: [&str; 3] = ["diff", "comment", "security_type"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgeError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("candidate {entry_id}: no yes/no verdict after {attempts} attempt(s); last response {last:?}")]
    MalformedVerdict { entry_id: String, attempts: u32, last: String },
    #[error("candidate refers to unknown or comment-less record {0}")]
    UnknownEntry(String),
    #[error("{0}")]
    Prompt(String),
}

impl From<PromptError> for JudgeError {
    fn from(e: PromptError) -> Self {
        JudgeError::Prompt(e.to_string())
    }
}

/// Reads a verdict from the first whitespace-delimited token: `yes` or `no`,
/// ignoring case and surrounding punctuation.
pub fn parse_verdict(response: &str) -> Option<bool> {
    let first = response.split_whitespace().next()?;
    let word = first.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    match word.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

pub struct Judge<C> {
    client: C,
    prompt: PromptTemplate,
    pub attempts: u32,
    pub sampling: Sampling,
}

impl<C: ChatClient> Judge<C> {
    pub fn new(client: C) -> Self {
        let prompt = PromptTemplate::new(DEFAULT_PROMPT, &JUDGE_SLOTS).expect("bundled judge prompt is valid");
        Judge { client, prompt, attempts: DEFAULT_ATTEMPTS, sampling: Sampling::Greedy }
    }

    pub fn with_prompt(mut self, prompt: PromptTemplate) -> Self {
        self.prompt = prompt;
        self
    }

    /// Asks the model whether `record`'s comment raises an issue of the
    /// candidate's type.
    pub fn judge(&self, candidate: &MatchCandidate, record: &RawRecord) -> Result<bool, JudgeError> {
        let comment = record
            .comment_raw
            .as_deref()
            .ok_or_else(|| JudgeError::UnknownEntry(record.id.clone()))?;
        let user = self.prompt.render(&[
            ("diff", &record.diff),
            ("comment", comment),
            ("security_type", candidate.matched_type.display_name()),
        ])?;
        let request = self.sampling.request(user);
        let mut last = String::new();
        for _ in 0..self.attempts.max(1) {
            last = self.client.chat(&request)?;
            if let Some(v) = parse_verdict(&last) {
                return Ok(v);
            }
        }
        Err(JudgeError::MalformedVerdict {
            entry_id: candidate.entry_id.clone(),
            attempts: self.attempts.max(1),
            last,
        })
    }
}

/// Result of judging a batch of candidates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct JudgeOutcome {
    /// Every successfully judged candidate with its verdict set, input order.
    pub judged: Vec<MatchCandidate>,
    pub failures: Vec<(MatchCandidate, JudgeError)>,
}

impl JudgeOutcome {
    /// Candidates with a positive verdict.
    pub fn retained(&self) -> Vec<MatchCandidate> {
        self.judged.iter().filter(|c| c.verdict == Some(true)).cloned().collect()
    }
}

pub fn judge_candidates<C: ChatClient>(
    candidates: &[MatchCandidate],
    records: &HashMap<String, RawRecord>,
    judge: &Judge<C>,
    concurrency: usize,
) -> JudgeOutcome {
    let results = run_bounded(candidates, concurrency, |c| {
        let record = records.get(&c.entry_id).ok_or_else(|| JudgeError::UnknownEntry(c.entry_id.clone()))?;
        judge.judge(c, record)
    });
    let mut out = JudgeOutcome::default();
    for (c, r) in candidates.iter().zip(results) {
        match r {
            Ok(v) => out.judged.push(MatchCandidate { verdict: Some(v), ..c.clone() }),
            Err(e) => out.failures.push((c.clone(), e)),
        }
    }
    out
}
