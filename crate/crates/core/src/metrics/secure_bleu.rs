//! SecureBLEU: a field-weighted BLEU term (exact match on the security type,
//! BLEU-4 on description, impact and advice) blended with a security
//! keyword coverage term.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bleu::bleu4;
use crate::model::{KeywordDictionary, ReviewComment, ReviewField, SecurityType};
use crate::text::{contains_phrase, normalize_text};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum WeightsError {
    #[error("{0} weights must sum to 1 (got {1})")]
    BadSum(&'static str, f64),
    #[error("weight {0} is negative or not finite")]
    Negative(String),
    #[error("lambda must lie in [0, 1] (got {0})")]
    BadLambda(f64),
    #[error("reading weights: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing weights: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuWeights {
    pub st: f64,
    pub d: f64,
    pub i: f64,
    pub a: f64,
}

impl BleuWeights {
    pub fn get(&self, field: ReviewField) -> f64 {
        match field {
            ReviewField::SecurityType => self.st,
            ReviewField::Description => self.d,
            ReviewField::Impact => self.i,
            ReviewField::Advice => self.a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeywordWeights {
    pub d: f64,
    pub i: f64,
    pub a: f64,
}

impl KeywordWeights {
    pub fn get(&self, field: ReviewField) -> f64 {
        match field {
            ReviewField::SecurityType => 0.0,
            ReviewField::Description => self.d,
            ReviewField::Impact => self.i,
            ReviewField::Advice => self.a,
        }
    }
}

/// Per-field weights for both terms plus the blend factor `lambda`
/// (`final = lambda * score_bleu + (1 - lambda) * score_keywords`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldWeightsWire", into = "FieldWeightsWire")]
pub struct FieldWeights {
    bleu: BleuWeights,
    keyword: KeywordWeights,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldWeightsWire {
    bleu: BleuWeights,
    keyword: KeywordWeights,
    lambda: f64,
}

impl TryFrom<FieldWeightsWire> for FieldWeights {
    type Error = WeightsError;
    fn try_from(w: FieldWeightsWire) -> Result<Self, WeightsError> {
        FieldWeights::new(w.bleu, w.keyword, w.lambda)
    }
}

impl From<FieldWeights> for FieldWeightsWire {
    fn from(w: FieldWeights) -> Self {
        FieldWeightsWire { bleu: w.bleu, keyword: w.keyword, lambda: w.lambda }
    }
}

impl Default for FieldWeights {
    fn default() -> Self {
        let third = 1.0 / 3.0;
        FieldWeights {
            bleu: BleuWeights { st: 0.25, d: 0.25, i: 0.25, a: 0.25 },
            keyword: KeywordWeights { d: third, i: third, a: third },
            lambda: 0.5,
        }
    }
}

impl FieldWeights {
    pub fn new(bleu: BleuWeights, keyword: KeywordWeights, lambda: f64) -> Result<Self, WeightsError> {
        let named = [
            ("bleu.st", bleu.st),
            ("bleu.d", bleu.d),
            ("bleu.i", bleu.i),
            ("bleu.a", bleu.a),
            ("keyword.d", keyword.d),
            ("keyword.i", keyword.i),
            ("keyword.a", keyword.a),
        ];
        if let Some((name, _)) = named.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(WeightsError::Negative(name.to_string()));
        }
        let bleu_sum = bleu.st + bleu.d + bleu.i + bleu.a;
        if (bleu_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(WeightsError::BadSum("bleu", bleu_sum));
        }
        let kw_sum = keyword.d + keyword.i + keyword.a;
        if (kw_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(WeightsError::BadSum("keyword", kw_sum));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(WeightsError::BadLambda(lambda));
        }
        Ok(FieldWeights { bleu, keyword, lambda })
    }

    pub fn load(path: &Path) -> Result<Self, WeightsError> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn bleu(&self) -> &BleuWeights {
        &self.bleu
    }

    pub fn keyword(&self) -> &KeywordWeights {
        &self.keyword
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self, WeightsError> {
        FieldWeights::new(self.bleu, self.keyword, lambda)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SecureBleuError {
    #[error("reference comment is Non-Issue; it has no text to score against")]
    ReferenceIsNonIssue,
}

/// Breakdown of one SecureBLEU evaluation. Map keys are the short field
/// keys `st`, `d`, `i`, `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    #[serde(rename = "final")]
    pub final_score: f64,
    pub score_bleu: f64,
    pub score_keywords: f64,
    pub lambda: f64,
    pub per_field_bleu: BTreeMap<String, f64>,
    pub per_field_keyword_ratio: BTreeMap<String, f64>,
    pub reference_keywords: BTreeMap<String, Vec<String>>,
    pub matched_keywords: BTreeMap<String, Vec<String>>,
}

impl ScoreReport {
    /// Final score under a different blend factor.
    pub fn final_with_lambda(&self, lambda: f64) -> f64 {
        combine(self.score_bleu, self.score_keywords, lambda)
    }
}

/// `lambda * score_bleu + (1 - lambda) * score_keywords`.
pub fn combine(score_bleu: f64, score_keywords: f64, lambda: f64) -> f64 {
    lambda * score_bleu + (1.0 - lambda) * score_keywords
}

/// Phrases (each counted once) whose normalized tokens occur in `text`.
/// Phrases that normalize identically are treated as one; the first
/// spelling is reported.
pub fn extract_keywords<S: AsRef<str>>(text: &str, phrases: &[S]) -> Vec<String> {
    let haystack = normalize_text(text);
    if haystack.is_empty() {
        return Vec::new();
    }
    let mut seen: Vec<Vec<String>> = Vec::new();
    let mut found = Vec::new();
    for phrase in phrases {
        let normalized = normalize_text(phrase.as_ref());
        if normalized.is_empty() || seen.contains(&normalized) {
            continue;
        }
        if contains_phrase(&haystack, &normalized) {
            found.push(phrase.as_ref().to_string());
        }
        seen.push(normalized);
    }
    found
}

/// Scores a predicted review against a reference review.
///
/// Keyword lists come from the reference comment's security type. A
/// prediction of Non-Issue scores 0.
pub fn secure_bleu(
    pred: &ReviewComment,
    reference: &ReviewComment,
    dict: &KeywordDictionary,
    weights: &FieldWeights,
) -> Result<ScoreReport, SecureBleuError> {
    if reference.security_type() == SecurityType::NonIssue {
        return Err(SecureBleuError::ReferenceIsNonIssue);
    }
    let phrases = dict.keywords(reference.security_type());
    let mut report = ScoreReport {
        final_score: 0.0,
        score_bleu: 0.0,
        score_keywords: 0.0,
        lambda: weights.lambda,
        per_field_bleu: BTreeMap::new(),
        per_field_keyword_ratio: BTreeMap::new(),
        reference_keywords: BTreeMap::new(),
        matched_keywords: BTreeMap::new(),
    };
    for field in ReviewField::TEXT {
        report
            .reference_keywords
            .insert(field.key().into(), extract_keywords(reference.field(field), phrases));
    }

    if pred.security_type() == SecurityType::NonIssue {
        for field in ReviewField::ALL {
            report.per_field_bleu.insert(field.key().into(), 0.0);
        }
        for field in ReviewField::TEXT {
            report.per_field_keyword_ratio.insert(field.key().into(), 0.0);
            report.matched_keywords.insert(field.key().into(), Vec::new());
        }
        return Ok(report);
    }

    let mut score_bleu = 0.0;
    for field in ReviewField::ALL {
        let score = match field {
            ReviewField::SecurityType if pred.security_type() == reference.security_type() => 100.0,
            ReviewField::SecurityType => 0.0,
            _ => bleu4(pred.field(field), reference.field(field)),
        };
        score_bleu += weights.bleu.get(field) * score;
        report.per_field_bleu.insert(field.key().into(), score);
    }

    let mut keyword_sum = 0.0;
    for field in ReviewField::TEXT {
        let ref_keywords = &report.reference_keywords[field.key()];
        let matched = extract_keywords(pred.field(field), ref_keywords);
        let ratio = if ref_keywords.is_empty() {
            0.0
        } else {
            matched.len() as f64 / ref_keywords.len() as f64
        };
        keyword_sum += weights.keyword.get(field) * ratio;
        report.per_field_keyword_ratio.insert(field.key().into(), ratio);
        report.matched_keywords.insert(field.key().into(), matched);
    }

    report.score_bleu = score_bleu.clamp(0.0, 100.0);
    report.score_keywords = (100.0 * keyword_sum).clamp(0.0, 100.0);
    report.final_score = combine(report.score_bleu, report.score_keywords, weights.lambda);
    Ok(report)
}
