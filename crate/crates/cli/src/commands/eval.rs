use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use secrev_core::metrics::{bleu4, classification_report, secure_bleu, ClassificationReport, FieldWeights, ScoreReport};
use secrev_core::{parse_review, DatasetEntry, KeywordDictionary, ReviewComment, SecurityType};

use super::{keywords, weights};
use crate::args::EvalArgs;
use crate::config::RunConfig;
use crate::io::{read_records, write_json};
use crate::Outcome;

/// A prediction line. Review traces are accepted as is (`final_comment`);
/// a free-text `review` is parsed.
#[derive(Debug, Clone, Deserialize)]
pub(crate) struct Prediction {
    pub id: String,
    #[serde(default, alias = "final_comment")]
    pub comment: Option<ReviewComment>,
    #[serde(default)]
    pub review: Option<String>,
    #[serde(default)]
    pub error: Option<String>,
}

impl Prediction {
    fn resolve(&self) -> Result<ReviewComment, String> {
        if let Some(c) = &self.comment {
            return Ok(c.clone());
        }
        if let Some(text) = &self.review {
            return parse_review(text).map_err(|e| e.to_string());
        }
        Err(self.error.clone().unwrap_or_else(|| "prediction has no comment".into()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct IdMismatch {
    pub missing_predictions: Vec<String>,
    pub unknown_predictions: Vec<String>,
    pub duplicate_predictions: Vec<String>,
    pub duplicate_references: Vec<String>,
}

impl IdMismatch {
    fn is_empty(&self) -> bool {
        self.missing_predictions.is_empty()
            && self.unknown_predictions.is_empty()
            && self.duplicate_predictions.is_empty()
            && self.duplicate_references.is_empty()
    }
}

impl fmt::Display for IdMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prediction and reference ids do not align")?;
        let groups = [
            ("no prediction for", &self.missing_predictions),
            ("no reference for", &self.unknown_predictions),
            ("duplicate prediction ids", &self.duplicate_predictions),
            ("duplicate reference ids", &self.duplicate_references),
        ];
        for (label, ids) in groups {
            if !ids.is_empty() {
                write!(f, "; {label}: {}", ids.join(", "))?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for IdMismatch {}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> (BTreeSet<&'a str>, Vec<String>) {
    let mut seen = BTreeSet::new();
    let mut dup = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            dup.insert(id.to_string());
        }
    }
    (seen, dup.into_iter().collect())
}

fn align(preds: &[Prediction], refs: &[DatasetEntry]) -> Result<(), IdMismatch> {
    let (p, duplicate_predictions) = duplicates(preds.iter().map(|p| p.id.as_str()));
    let (r, duplicate_references) = duplicates(refs.iter().map(|r| r.id.as_str()));
    let m = IdMismatch {
        missing_predictions: r.difference(&p).map(|s| s.to_string()).collect(),
        unknown_predictions: p.difference(&r).map(|s| s.to_string()).collect(),
        duplicate_predictions,
        duplicate_references,
    };
    if m.is_empty() {
        Ok(())
    } else {
        Err(m)
    }
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct PairScore {
    pub id: String,
    pub reference_type: SecurityType,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_type: Option<SecurityType>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secure_bleu: Option<ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct GenerationSummary {
    pub bleu4: f64,
    pub secure_bleu: f64,
    pub score_bleu: f64,
    pub score_keywords: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub(crate) struct EvalReport {
    pub pairs: usize,
    pub generation_pairs: usize,
    pub entry_errors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationSummary>,
    pub per_pair: Vec<PairScore>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

/// Scores every pair in reference order. Predictions without a usable
/// comment are reported per pair and left out of every aggregate.
pub(crate) fn evaluate(
    preds: &[Prediction],
    refs: &[DatasetEntry],
    dict: &KeywordDictionary,
    weights: &FieldWeights,
) -> Result<EvalReport> {
    align(preds, refs)?;
    let by_id: HashMap<&str, &Prediction> = preds.iter().map(|p| (p.id.as_str(), p)).collect();
    let mut per_pair = Vec::with_capacity(refs.len());
    let mut detection_pairs = Vec::new();
    for r in refs {
        let reference = r.comment.as_ref().with_context(|| format!("reference {} has no structured comment", r.id))?;
        let mut score = PairScore {
            id: r.id.clone(),
            reference_type: reference.security_type(),
            predicted_type: None,
            bleu4: None,
            secure_bleu: None,
            error: None,
        };
        match by_id[r.id.as_str()].resolve() {
            Err(e) => score.error = Some(e),
            Ok(pred) => {
                score.predicted_type = Some(pred.security_type());
                detection_pairs.push((pred.security_type(), reference.security_type()));
                if reference.security_type().is_issue() {
                    score.bleu4 = Some(bleu4(&pred.render(), &reference.render()));
                    score.secure_bleu = Some(secure_bleu(&pred, reference, dict, weights)?);
                }
            }
        }
        per_pair.push(score);
    }
    let detection = if detection_pairs.is_empty() { None } else { Some(classification_report(&detection_pairs)?) };
    let scored: Vec<&PairScore> = per_pair.iter().filter(|p| p.secure_bleu.is_some()).collect();
    let generation = (!scored.is_empty()).then(|| {
        let sb = || scored.iter().map(|p| p.secure_bleu.as_ref().unwrap());
        GenerationSummary {
            bleu4: mean(scored.iter().map(|p| p.bleu4.unwrap())),
            secure_bleu: mean(sb().map(|s| s.final_score)),
            score_bleu: mean(sb().map(|s| s.score_bleu)),
            score_keywords: mean(sb().map(|s| s.score_keywords)),
            lambda: weights.lambda(),
        }
    });
    Ok(EvalReport {
        pairs: refs.len(),
        generation_pairs: scored.len(),
        entry_errors: per_pair.iter().filter(|p| p.error.is_some()).count(),
        detection,
        generation,
        per_pair,
    })
}

pub(crate) fn summary(report: &EvalReport) -> String {
    let mut s = format!("pairs {} (generation {}, errors {})\n", report.pairs, report.generation_pairs, report.entry_errors);
    if let Some(d) = &report.detection {
        s += &format!(
            "detection   precision {:.2}  recall {:.2}  f1 {:.2}  accuracy {:.2}\n",
            d.precision, d.recall, d.f1, d.accuracy
        );
    }
    if let Some(g) = &report.generation {
        s += &format!(
            "generation  bleu4 {:.2}  secure_bleu {:.2}  (bleu term {:.2}, keyword term {:.2}, lambda {})\n",
            g.bleu4, g.secure_bleu, g.score_bleu, g.score_keywords, g.lambda
        );
    }
    s
}

pub(crate) fn load_pairs(pred: &std::path::Path, reference: &std::path::Path) -> Result<(Vec<Prediction>, Vec<DatasetEntry>)> {
    Ok((read_records(pred)?, read_records(reference)?))
}

pub(super) fn run(args: &EvalArgs, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let (preds, refs) = load_pairs(&args.pred, &args.reference)?;
    let report = evaluate(&preds, &refs, &keywords(config)?, &weights(config)?)?;
    if let Some(path) = &config.output {
        write_json(path, &report)?;
    }
    write!(out, "{}", summary(&report))?;
    Ok(Outcome { entry_errors: report.entry_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use secrev_core::{CodeDiff, Source};

    fn entry(id: &str, c: ReviewComment) -> DatasetEntry {
        DatasetEntry {
            id: id.into(),
            diff: CodeDiff::new("+x = 1").unwrap(),
            raw_comment: None,
            security_type: c.security_type(),
            comment: Some(c),
            source: Source::Keyword,
            split: None,
        }
    }

    fn pred(id: &str, c: Option<ReviewComment>) -> Prediction {
        Prediction { id: id.into(), comment: c, review: None, error: None }
    }

    fn sql() -> ReviewComment {
        ReviewComment::new(
            SecurityType::InputValidation,
            "The query concatenates user input, a sql injection risk.",
            "An attacker can exploit the sql injection to read the database.",
            "Use parameterized queries to stop sql injection.",
        )
        .unwrap()
    }

    #[test]
    fn identical_predictions_score_full_marks() {
        let refs = vec![entry("a", sql()), entry("b", ReviewComment::non_issue())];
        let preds = vec![pred("a", Some(sql())), pred("b", Some(ReviewComment::non_issue()))];
        let r = evaluate(&preds, &refs, &KeywordDictionary::builtin(), &FieldWeights::default()).unwrap();
        assert_eq!(r.generation_pairs, 1);
        let g = r.generation.unwrap();
        assert!((g.bleu4 - 100.0).abs() < 1e-9);
        assert!((g.secure_bleu - 100.0).abs() < 1e-6);
        assert_eq!(r.detection.unwrap().accuracy, 100.0);
    }

    #[test]
    fn mismatch_lists_offenders() {
        let refs = vec![entry("a", sql()), entry("b", sql())];
        let preds = vec![pred("a", Some(sql())), pred("a", Some(sql())), pred("c", Some(sql()))];
        let e = evaluate(&preds, &refs, &KeywordDictionary::builtin(), &FieldWeights::default()).unwrap_err();
        let m = e.downcast_ref::<IdMismatch>().unwrap();
        assert_eq!(m.missing_predictions, ["b"]);
        assert_eq!(m.unknown_predictions, ["c"]);
        assert_eq!(m.duplicate_predictions, ["a"]);
    }

    #[test]
    fn unusable_prediction_is_an_entry_error() {
        let refs = vec![entry("a", sql()), entry("b", sql())];
        let preds = vec![pred("a", Some(sql())), pred("b", None)];
        let r = evaluate(&preds, &refs, &KeywordDictionary::builtin(), &FieldWeights::default()).unwrap();
        assert_eq!(r.entry_errors, 1);
        assert_eq!(r.generation_pairs, 1);
    }
}
