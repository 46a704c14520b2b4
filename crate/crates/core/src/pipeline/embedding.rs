use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::is_cwe_id;
use crate::model::SecurityType;
use crate::text::{normalize_without_stopwords, StopWords};

use super::{Evidence, MatchCandidate};

pub const DEFAULT_THRESHOLD: f64 = 0.70;

const BUILTIN_ANCHORS: &str = include_str!("../../data/cwe_anchors.json");

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("word vector file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("vector for {token:?} has length {got}, expected {expected}")]
    WrongLength { token: String, expected: usize, got: usize },
    #[error("anchor {cwe_id}: {message}")]
    BadAnchor { cwe_id: String, message: String },
    #[error("anchor file: {0}")]
    AnchorJson(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("vector dimensions differ: {0} vs {1}")]
pub struct DimensionMismatch(pub usize, pub usize);

/// Word vectors keyed by lowercase token.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl WordVectorTable {
    pub fn new(dim: usize) -> Self {
        WordVectorTable { dim, vectors: HashMap::new() }
    }

    /// Inserts a vector; the token is lowercased. An existing entry for the
    /// same lowercase token is kept.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dim {
            return Err(EmbeddingError::WrongLength {
                token: token.to_string(),
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.vectors.entry(token.to_lowercase()).or_insert(vector);
        Ok(())
    }

    /// Parses word2vec text format: a `<count> <dim>` header line, then one
    /// `<token> <f1> ... <fdim>` line per word.
    pub fn from_word2vec_text(reader: impl BufRead) -> Result<Self, EmbeddingError> {
        let mut lines = reader.lines().enumerate();
        let format = |line: usize, message: String| EmbeddingError::Format { line: line + 1, message };
        let io = |e: std::io::Error| EmbeddingError::Io { path: "<reader>".into(), source: e };
        let (_, header) = lines.next().ok_or_else(|| format(0, "empty file".into()))?;
        let header = header.map_err(io)?;
        let mut parts = header.split_whitespace();
        let (Some(count), Some(dim), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format(0, format!("expected \"<count> <dim>\", got {header:?}")));
        };
        let count: usize = count.parse().map_err(|_| format(0, format!("bad count {count:?}")))?;
        let dim: usize = dim.parse().map_err(|_| format(0, format!("bad dimension {dim:?}")))?;
        if dim == 0 {
            return Err(format(0, "dimension must be positive".into()));
        }
        let mut table = WordVectorTable::new(dim);
        for (i, line) in lines {
            let line = line.map_err(io)?;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let vector = fields
                .map(|f| f.parse::<f64>().map_err(|_| format(i, format!("bad number {f:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            if vector.len() != dim {
                return Err(format(i, format!("{} values for {token:?}, expected {dim}", vector.len())));
            }
            table.insert(token, vector)?;
        }
        if table.len() > count {
            return Err(format(0, format!("header declares {count} words, file has {}", table.len())));
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let file = std::fs::File::open(path)
            .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
        Self::from_word2vec_text(std::io::BufReader::new(file))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }
}

/// A text embedding; `oov` is set when no token had a vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub oov: bool,
}

/// Mean vector of the in-vocabulary words of `text` after stop-word removal.
/// Each word is looked up by its surface form first, then by its stem.
pub fn embed_text(text: &str, table: &WordVectorTable, stopwords: &StopWords) -> Embedding {
    let mut sum = vec![0.0; table.dim()];
    let mut n = 0usize;
    for word in normalize_without_stopwords(text, stopwords) {
        if let Some(v) = table.get(&word.surface).or_else(|| table.get(&word.stem)) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n == 0 {
        return Embedding { vector: sum, oov: true };
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    Embedding { vector: sum, oov: false }
}

/// Cosine similarity, clamped to [-1, 1]; 0 when either vector is zero.
pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, DimensionMismatch> {
    if u.len() != v.len() {
        return Err(DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// A CWE category description used as a semantic anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CweDescription {
    pub cwe_id: String,
    #[serde(alias = "category_text")]
    pub text: String,
    #[serde(rename = "type", alias = "mapped_type")]
    pub mapped_type: SecurityType,
}

impl CweDescription {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |message: &str| EmbeddingError::BadAnchor { cwe_id: self.cwe_id.clone(), message: message.into() };
        if !is_cwe_id(&self.cwe_id) {
            return Err(bad("malformed CWE id"));
        }
        if self.mapped_type == SecurityType::NonIssue {
            return Err(bad("anchors cannot map to Non-Issue"));
        }
        Ok(())
    }

    pub fn builtin() -> Vec<CweDescription> {
        Self::from_json(BUILTIN_ANCHORS).expect("bundled anchor file is valid")
    }

    pub fn from_json(json: &str) -> Result<Vec<CweDescription>, EmbeddingError> {
        let anchors: Vec<CweDescription> = serde_json::from_str(json)?;
        anchors.iter().try_for_each(CweDescription::validate)?;
        Ok(anchors)
    }

    pub fn load(path: &Path) -> Result<Vec<CweDescription>, EmbeddingError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| EmbeddingError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// Anchors embedded once, matched against many comments.
pub struct EmbeddingMatcher<'a> {
    table: &'a WordVectorTable,
    stopwords: StopWords,
    anchors: Vec<(CweDescription, Vec<f64>)>,
    threshold: f64,
}

impl<'a> EmbeddingMatcher<'a> {
    /// Anchors whose text has no in-vocabulary word are dropped.
    pub fn new(anchors: &[CweDescription], table: &'a WordVectorTable, stopwords: StopWords, threshold: f64) -> Self {
        let anchors = anchors
            .iter()
            .filter_map(|a| {
                let e = embed_text(&a.text, table, &stopwords);
                (!e.oov).then(|| (a.clone(), e.vector))
            })
            .collect();
        EmbeddingMatcher { table, stopwords, anchors, threshold }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.len()
    }

    /// One candidate per type whose best anchor similarity strictly exceeds
    /// the threshold, in canonical type order. Ties between anchors of one
    /// type keep the earlier anchor.
    pub fn match_comment(&self, entry_id: &str, comment: &str) -> Vec<MatchCandidate> {
        let e = embed_text(comment, self.table, &self.stopwords);
        if e.oov {
            return Vec::new();
        }
        let mut best: [Option<(&str, f64)>; 8] = [None; 8];
        for (anchor, v) in &self.anchors {
            let sim = cosine_similarity(&e.vector, v).expect("table vectors share one dimension");
            if sim <= self.threshold {
                continue;
            }
            let slot = &mut best[anchor.mapped_type.index()];
            if slot.is_none_or(|(_, s)| sim > s) {
                *slot = Some((&anchor.cwe_id, sim));
            }
        }
        SecurityType::ALL
            .iter()
            .filter_map(|&ty| {
                best[ty.index()].map(|(cwe_id, similarity)| MatchCandidate {
                    entry_id: entry_id.to_string(),
                    matched_type: ty,
                    evidence: Evidence::Embedding { cwe_id: cwe_id.to_string(), similarity },
                    verdict: None,
                })
            })
            .collect()
    }

    pub fn collect(&self, records: &[crate::model::RawRecord]) -> Vec<MatchCandidate> {
        records
            .iter()
            .filter_map(|r| r.comment_raw.as_deref().map(|c| self.match_comment(&r.id, c)))
            .flatten()
            .collect()
    }
}

/// Convenience wrapper using the bundled stop-word list.
pub fn embedding_match(
    entry_id: &str,
    comment: &str,
    anchors: &[CweDescription],
    table: &WordVectorTable,
    threshold: f64,
) -> Vec<MatchCandidate> {
    EmbeddingMatcher::new(anchors, table, StopWords::builtin(), threshold).match_comment(entry_id, comment)
}
