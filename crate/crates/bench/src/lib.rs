//! Seeded workloads shared by the criterion benches.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secrev_core::retrieval::{Template, TemplateStore};
use secrev_core::{CodeDiff, KeywordDictionary, ReviewComment, SecurityType};

const WORDS: &[&str] = &[
    "the", "value", "buffer", "request", "user", "lock", "thread", "query", "input", "session", "token",
    "file", "handle", "error", "exception", "memory", "length", "check", "before", "after", "call", "return",
];

fn sentence(rng: &mut ChaCha8Rng, phrases: &[String], len: usize) -> String {
    let mut words: Vec<String> = (0..len).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
    if let Some(p) = phrases.choose(rng) {
        let at = rng.random_range(0..=words.len());
        words.insert(at, p.clone());
    }
    words.join(" ")
}

/// `n` (prediction, reference) pairs of issue comments; predictions share
/// roughly half their words with the reference.
pub fn comment_pairs(n: usize, seed: u64) -> Vec<(ReviewComment, ReviewComment)> {
    let dict = KeywordDictionary::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let ty = *SecurityType::ISSUES.choose(&mut rng).unwrap();
            let kw = dict.keywords(ty);
            let mut fields = || [sentence(&mut rng, kw, 20), sentence(&mut rng, kw, 12), sentence(&mut rng, kw, 15)];
            let [d, i, a] = fields();
            let reference = ReviewComment::new(ty, d.clone(), i, a).unwrap();
            let [_, i2, a2] = fields();
            let pred = ReviewComment::new(ty, d, i2, a2).unwrap();
            (pred, reference)
        })
        .collect()
}

/// A template store with `per_type` templates of each issue type.
pub fn template_store(per_type: usize, seed: u64) -> TemplateStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut templates = Vec::new();
    for ty in SecurityType::ISSUES {
        for k in 0..per_type {
            let diff = code_diff(&mut rng, 40);
            let comment = ReviewComment::new(ty, "d", "i", "a").unwrap();
            templates.push(Template::new(format!("{}-{k:05}", ty.index()), diff, comment).unwrap());
        }
    }
    TemplateStore::build(templates).unwrap()
}

/// A random diff of `lines` added lines.
pub fn code_diff(rng: &mut ChaCha8Rng, lines: usize) -> CodeDiff {
    let text: Vec<String> = (0..lines)
        .map(|_| {
            let a = WORDS.choose(rng).unwrap();
            let b = WORDS.choose(rng).unwrap();
            format!("+    {a}_{} = {b}({a}, {})", rng.random_range(0..50), rng.random_range(0..10))
        })
        .collect();
    CodeDiff::new(text.join("\n")).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
