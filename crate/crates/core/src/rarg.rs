//! Two-stage retrieval-augmented review generation.
//!
//! Stage one reviews the bare diff. If it predicts an issue, the closest
//! template of that type is retrieved and stage two rewrites the review with
//! the template as an example. The stage-one security type is kept in the
//! final comment no matter what stage two answers.

use serde::{Deserialize, Serialize};

use crate::client::{run_bounded, ChatClient, ClientError, Sampling};
use crate::model::{parse_review, CodeDiff, ReviewComment, SecurityType};
use crate::prompt::{PromptError, PromptTemplate};
use crate::retrieval::{RetrievalError, Template, TemplateStore};

const INITIAL_PROMPT: &str = include_str!("../data/prompts/review_initial.txt");
const FINAL_PROMPT: &str = include_str!("../data/prompts/review_final.txt");

pub const INITIAL_SLOTS: [&str; 1] = ["diff"];
pub const FINAL_SLOTS: [&str; 3] = ["diff", "template_diff", "template_comment"];
pub const DEFAULT_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initial,
    Final,
}

#[derive(Debug, thiserror::Error)]
pub enum RargError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("{stage:?} stage: no parseable review after {attempts} attempt(s); last response {last:?}")]
    UnparseableReview { stage: Stage, attempts: u32, last: String },
    #[error("template {template_id} has type {template}, initial review has {initial}")]
    TemplateTypeMismatch { template_id: String, template: SecurityType, initial: SecurityType },
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RargTrace {
    pub initial_comment: ReviewComment,
    pub predicted_type: SecurityType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retrieved_template_id: Option<String>,
    pub final_comment: ReviewComment,
}

pub struct Rarg<C> {
    client: C,
    initial_prompt: PromptTemplate,
    final_prompt: PromptTemplate,
    pub attempts: u32,
    pub sampling: Sampling,
}

impl<C: ChatClient> Rarg<C> {
    pub fn new(client: C) -> Self {
        Rarg {
            client,
            initial_prompt: PromptTemplate::new(INITIAL_PROMPT, &INITIAL_SLOTS).expect("bundled prompt is valid"),
            final_prompt: PromptTemplate::new(FINAL_PROMPT, &FINAL_SLOTS).expect("bundled prompt is valid"),
            attempts: DEFAULT_ATTEMPTS,
            sampling: Sampling::Greedy,
        }
    }

    pub fn with_prompts(mut self, initial: PromptTemplate, fin: PromptTemplate) -> Self {
        self.initial_prompt = initial;
        self.final_prompt = fin;
        self
    }

    fn ask<T>(&self, stage: Stage, user: String, accept: impl Fn(ReviewComment) -> Option<T>) -> Result<T, RargError> {
        let request = self.sampling.request(user);
        let attempts = self.attempts.max(1);
        let mut last = String::new();
        for _ in 0..attempts {
            last = self.client.chat(&request)?;
            if let Some(out) = parse_review(&last).ok().and_then(&accept) {
                return Ok(out);
            }
        }
        Err(RargError::UnparseableReview { stage, attempts, last })
    }

    pub fn generate_initial(&self, diff: &CodeDiff) -> Result<ReviewComment, RargError> {
        let user = self.initial_prompt.render(&[("diff", diff.raw())])?;
        self.ask(Stage::Initial, user, Some)
    }

    /// Stage two. The answer's security type is replaced by the initial
    /// one; an answer that cannot carry it (a bare Non-Issue line) counts as
    /// unparseable.
    pub fn generate_final(
        &self,
        diff: &CodeDiff,
        template: &Template,
        initial: &ReviewComment,
    ) -> Result<ReviewComment, RargError> {
        let ty = initial.security_type();
        if template.security_type != ty {
            return Err(RargError::TemplateTypeMismatch {
                template_id: template.id.clone(),
                template: template.security_type,
                initial: ty,
            });
        }
        let template_comment = template.comment.render();
        let user = self.final_prompt.render(&[
            ("diff", diff.raw()),
            ("template_diff", template.diff.raw()),
            ("template_comment", &template_comment),
            ("security_type", ty.display_name()),
        ])?;
        self.ask(Stage::Final, user, |c| c.with_security_type(ty).ok())
    }

    pub fn review(&self, diff: &CodeDiff, store: &TemplateStore) -> Result<RargTrace, RargError> {
        let initial = self.generate_initial(diff)?;
        let predicted = initial.security_type();
        let mut trace = RargTrace {
            final_comment: initial.clone(),
            initial_comment: initial,
            predicted_type: predicted,
            retrieved_template_id: None,
        };
        if predicted == SecurityType::NonIssue {
            return Ok(trace);
        }
        let Some(hit) = store.retrieve(diff, predicted, 1)?.into_iter().next() else {
            return Ok(trace);
        };
        trace.final_comment = self.generate_final(diff, hit.template, &trace.initial_comment)?;
        trace.retrieved_template_id = Some(hit.template.id.clone());
        Ok(trace)
    }

    /// Reviews many diffs; results line up with the input.
    pub fn review_batch(
        &self,
        diffs: &[CodeDiff],
        store: &TemplateStore,
        concurrency: usize,
    ) -> Vec<Result<RargTrace, RargError>> {
        run_bounded(diffs, concurrency, |d| self.review(d, store))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::client::stub::ScriptedClient;

    const VALIDATION: &str = "Security Type: Input Validation\nDescription: d\nImpact: i\nAdvice: a";
    const CONCURRENCY: &str = "Security Type: Concurrency\nDescription: shared\nImpact: race\nAdvice: lock";

    fn diff() -> CodeDiff {
        CodeDiff::new("+counter += 1\n+spawn(worker)").unwrap()
    }

    fn template(id: &str, ty: SecurityType, code: &str) -> Template {
        Template::new(id, CodeDiff::new(code).unwrap(), ReviewComment::new(ty, "td", "ti", "ta").unwrap()).unwrap()
    }

    #[test]
    fn initial_stage() {
        let c = ScriptedClient::new([VALIDATION]);
        let r = Rarg::new(&c).generate_initial(&diff()).unwrap();
        assert_eq!(r.security_type(), SecurityType::InputValidation);
        assert!(c.requests()[0].user.contains("+spawn(worker)"));

        let c = ScriptedClient::new(["Security Type: Non-Issue"]);
        assert_eq!(Rarg::new(&c).generate_initial(&diff()).unwrap(), ReviewComment::non_issue());

        let c = ScriptedClient::new(["prose", "prose", "prose"]);
        let err = Rarg::new(&c).generate_initial(&diff()).unwrap_err();
        assert!(matches!(err, RargError::UnparseableReview { stage: Stage::Initial, attempts: 3, .. }));
    }

    #[test]
    fn final_stage_forces_type() {
        let initial = parse_review(CONCURRENCY).unwrap();
        let t = template("t1", SecurityType::Concurrency, "+x += 1");
        let c = ScriptedClient::new([VALIDATION]);
        let out = Rarg::new(&c).generate_final(&diff(), &t, &initial).unwrap();
        assert_eq!(out.security_type(), SecurityType::Concurrency);
        assert_eq!(out.description(), "d");
        let sent = &c.requests()[0].user;
        assert!(sent.contains("Description: td") && sent.contains("+x += 1"));

        let wrong = template("t2", SecurityType::InputValidation, "+y");
        let err = Rarg::new(&c).generate_final(&diff(), &wrong, &initial).unwrap_err();
        assert!(matches!(err, RargError::TemplateTypeMismatch { .. }));
    }

    #[test]
    fn review_paths() {
        let store = TemplateStore::build(vec![
            template("c1", SecurityType::Concurrency, "+counter += 1"),
            template("v1", SecurityType::InputValidation, "+counter += 1\n+spawn(worker)"),
        ])
        .unwrap();

        let c = ScriptedClient::new(["Security Type: Non-Issue"]);
        let t = Rarg::new(&c).review(&diff(), &store).unwrap();
        assert_eq!(t.retrieved_template_id, None);
        assert_eq!(t.final_comment, t.initial_comment);
        assert_eq!(c.requests().len(), 1);

        let c = ScriptedClient::new([CONCURRENCY, VALIDATION]);
        let t = Rarg::new(&c).review(&diff(), &store).unwrap();
        assert_eq!(t.retrieved_template_id.as_deref(), Some("c1"));
        assert_eq!(t.final_comment.security_type(), SecurityType::Concurrency);

        let empty = TemplateStore::build(vec![template("v1", SecurityType::InputValidation, "+x")]).unwrap();
        let c = ScriptedClient::new([CONCURRENCY]);
        let t = Rarg::new(&c).review(&diff(), &empty).unwrap();
        assert_eq!(t.retrieved_template_id, None);
        assert_eq!(t.final_comment, t.initial_comment);
    }

    #[test]
    fn bare_non_issue_in_stage_two_is_retried() {
        let initial = parse_review(CONCURRENCY).unwrap();
        let t = template("t1", SecurityType::Concurrency, "+x");
        let c = ScriptedClient::new(["Security Type: Non-Issue", CONCURRENCY]);
        let out = Rarg::new(&c).generate_final(&diff(), &t, &initial).unwrap();
        assert_eq!(out, initial);
    }
}
