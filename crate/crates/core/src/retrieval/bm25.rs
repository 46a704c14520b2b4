use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// Document count, document frequencies and mean length of one corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub avg_len: f64,
    pub df: HashMap<String, usize>,
}

impl CorpusStats {
    pub fn from_docs<'a>(docs: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut stats = CorpusStats::default();
        let mut total_len = 0usize;
        for doc in docs {
            stats.doc_count += 1;
            total_len += doc.len();
            let mut uniq: Vec<&String> = doc.iter().collect();
            uniq.sort_unstable();
            uniq.dedup();
            for t in uniq {
                *stats.df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        if stats.doc_count > 0 {
            stats.avg_len = total_len as f64 / stats.doc_count as f64;
        }
        stats
    }

    /// `ln((N - df + 0.5) / (df + 0.5) + 1)`, always positive.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.doc_count as f64;
        let df = self.df.get(term).copied().unwrap_or(0) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }
}

/// Okapi BM25. Repeated query terms contribute once per occurrence.
pub fn bm25_score(query: &[String], doc: &[String], stats: &CorpusStats, params: Bm25Params) -> f64 {
    if doc.is_empty() || query.is_empty() {
        return 0.0;
    }
    let mut tf: HashMap<&str, usize> = HashMap::new();
    for t in doc {
        *tf.entry(t.as_str()).or_insert(0) += 1;
    }
    let norm = if stats.avg_len > 0.0 { doc.len() as f64 / stats.avg_len } else { 1.0 };
    let denom_base = params.k1 * (1.0 - params.b + params.b * norm);
    let mut score = 0.0;
    for q in query {
        let Some(&f) = tf.get(q.as_str()) else { continue };
        let f = f as f64;
        score += stats.idf(q) * f * (params.k1 + 1.0) / (f + denom_base);
    }
    score
}
