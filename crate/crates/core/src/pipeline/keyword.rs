use crate::model::{KeywordDictionary, RawRecord, SecurityType};
use crate::text::{contains_phrase, normalize_text};

use super::{Evidence, MatchCandidate};

/// Dictionary phrases pre-normalized for repeated matching.
#[derive(Debug, Clone)]
pub struct KeywordMatcher {
    phrases: Vec<(SecurityType, String, Vec<String>)>,
}

impl KeywordMatcher {
    pub fn new(dict: &KeywordDictionary) -> Self {
        let phrases = dict
            .iter()
            .flat_map(|(ty, entry)| {
                entry.keywords.iter().map(move |p| (ty, p.clone(), normalize_text(p)))
            })
            .filter(|(_, _, norm)| !norm.is_empty())
            .collect();
        KeywordMatcher { phrases }
    }

    /// At most one candidate per type: the first phrase of that type, in
    /// dictionary order, found in the comment.
    pub fn match_comment(&self, entry_id: &str, comment: &str) -> Vec<MatchCandidate> {
        let tokens = normalize_text(comment);
        let mut out: Vec<MatchCandidate> = Vec::new();
        for (ty, phrase, norm) in &self.phrases {
            if out.iter().any(|c| c.matched_type == *ty) {
                continue;
            }
            if contains_phrase(&tokens, norm) {
                out.push(MatchCandidate {
                    entry_id: entry_id.to_string(),
                    matched_type: *ty,
                    evidence: Evidence::Keyword { phrase: phrase.clone() },
                    verdict: None,
                });
            }
        }
        out
    }

    /// Runs over records that carry a reviewer comment.
    pub fn collect(&self, records: &[RawRecord]) -> Vec<MatchCandidate> {
        records
            .iter()
            .filter_map(|r| r.comment_raw.as_deref().map(|c| self.match_comment(&r.id, c)))
            .flatten()
            .collect()
    }
}

pub fn keyword_match(entry_id: &str, comment: &str, dict: &KeywordDictionary) -> Vec<MatchCandidate> {
    KeywordMatcher::new(dict).match_comment(entry_id, comment)
}
