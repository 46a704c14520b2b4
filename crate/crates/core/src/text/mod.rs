//! Text normalization shared by keyword matching, SecureBLEU keyword
//! extraction, embedding lookup and BM25 retrieval.

use std::collections::HashSet;

pub mod porter;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

// Porter stemming is not idempotent on its own output ("agreed" -> "agre"
// -> "agr"), so tokens are stemmed until they stop changing. Each pass
// never lengthens a word, so this terminates quickly; the cap is a backstop.
const MAX_STEM_PASSES: usize = 8;

fn stem_to_fixpoint(token: &str) -> String {
    let mut current = token.to_string();
    for _ in 0..MAX_STEM_PASSES {
        let next = porter::stem(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Lowercases and replaces every character that is neither alphanumeric nor
/// whitespace with a space, then splits on whitespace.
pub fn clean_words(text: &str) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

/// Lowercase, strip punctuation, split on whitespace, Porter-stem.
pub fn normalize_text(text: &str) -> Vec<String> {
    clean_words(text).iter().map(|w| stem_to_fixpoint(w)).collect()
}

/// English stop-word list used by the embedding path.
#[derive(Debug, Clone)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn builtin() -> Self {
        Self::from_lines(DEFAULT_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_lines(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A word kept by [`normalize_without_stopwords`]: its surface form and stem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub surface: String,
    pub stem: String,
}

/// Normalization for the embedding path: stop words are removed before
/// stemming.
pub fn normalize_without_stopwords(text: &str, stopwords: &StopWords) -> Vec<Word> {
    clean_words(text)
        .into_iter()
        .filter(|w| !stopwords.contains(w))
        .map(|surface| {
            let stem = stem_to_fixpoint(&surface);
            Word { surface, stem }
        })
        .collect()
}

/// True if some contiguous window of `haystack` holds exactly the tokens of
/// `phrase`. Order inside the window is not significant, so
/// "injected sql" contains the phrase "sql injection".
pub fn contains_phrase(haystack: &[String], phrase: &[String]) -> bool {
    if phrase.is_empty() || phrase.len() > haystack.len() {
        return false;
    }
    if phrase.len() == 1 {
        return haystack.contains(&phrase[0]);
    }
    let mut want: Vec<&str> = phrase.iter().map(String::as_str).collect();
    want.sort_unstable();
    haystack.windows(phrase.len()).any(|window| {
        let mut got: Vec<&str> = window.iter().map(String::as_str).collect();
        got.sort_unstable();
        got == want
    })
}
