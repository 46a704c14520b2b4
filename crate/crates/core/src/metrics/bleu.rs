//! Sentence-level BLEU-4.
//!
//! Texts are lowercased and punctuation is split into separate tokens before
//! whitespace tokenization. Modified n-gram precisions for n = 1..4 are
//! combined by geometric mean and scaled by the brevity penalty. When an
//! order n >= 2 has no matching n-gram its precision becomes
//! `1 / (candidate n-grams + 1)` (add-one smoothing); a zero unigram
//! precision still yields 0.

use std::collections::HashMap;

pub const MAX_ORDER: usize = 4;

/// Lowercase, split punctuation off as its own token, split on whitespace.
/// Letters, digits and `_` form words.
pub fn bleu_tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and total candidate n-grams for one order.
fn modified_precision(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let cand = ngram_counts(candidate, n);
    let refc = ngram_counts(reference, n);
    let matches = cand
        .iter()
        .map(|(gram, &c)| c.min(refc.get(gram).copied().unwrap_or(0)))
        .sum();
    (matches, candidate.len().saturating_sub(n - 1))
}

pub fn brevity_penalty(candidate_len: usize, reference_len: usize) -> f64 {
    if candidate_len == 0 {
        0.0
    } else if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    }
}

/// BLEU-4 over pre-tokenized text, on [0, 100].
pub fn bleu4_tokens(candidate: &[String], reference: &[String]) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let (matches, total) = modified_precision(candidate, reference, n);
        let precision = if matches > 0 {
            matches as f64 / total as f64
        } else if n == 1 {
            return 0.0;
        } else {
            1.0 / (total as f64 + 1.0)
        };
        log_sum += precision.ln();
    }
    let score = brevity_penalty(candidate.len(), reference.len()) * (log_sum / MAX_ORDER as f64).exp();
    (100.0 * score).clamp(0.0, 100.0)
}

/// BLEU-4 of `candidate` against `reference`, on [0, 100].
pub fn bleu4(candidate: &str, reference: &str) -> f64 {
    bleu4_tokens(&bleu_tokens(candidate), &bleu_tokens(reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_splits_punctuation() {
        assert_eq!(bleu_tokens("Check user_input, NOW!"), ["check", "user_input", ",", "now", "!"]);
    }

    #[test]
    fn identical_is_100() {
        let s = "the query string is built from raw user input";
        assert!((bleu4(s, s) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn disjoint_is_zero() {
        assert!(bleu4("a b c", "x y z").abs() < 1e-6);
    }

    #[test]
    fn empty_candidate_is_zero() {
        assert_eq!(bleu4("", "some reference"), 0.0);
        assert_eq!(bleu4("", ""), 0.0);
    }

    #[test]
    fn case_insensitive() {
        let a = bleu4("The Cat sat on the mat", "the cat sat on a mat");
        let b = bleu4("the cat sat on the mat", "THE CAT SAT ON A MAT");
        assert_eq!(a, b);
    }

    #[test]
    fn short_candidate_is_penalized() {
        assert!(bleu4("the cat", "the cat sat on the mat") < bleu4("the cat sat on the", "the cat sat on the mat"));
    }
}
