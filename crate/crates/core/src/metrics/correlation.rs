//! Pearson correlation and the SecureBLEU blend-factor sweep.

use serde::{Deserialize, Serialize};

use super::secure_bleu::ScoreReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrelationError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("lambda {0} is outside [0, 1]")]
    BadLambda(f64),
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, CorrelationError> {
    if xs.len() != ys.len() {
        return Err(CorrelationError::DegenerateInput("length mismatch"));
    }
    if xs.len() < 2 {
        return Err(CorrelationError::DegenerateInput("fewer than two observations"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::DegenerateInput("constant series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub r: f64,
}

/// The blend factors 0.2, 0.3, ..., 0.8.
pub fn default_lambdas() -> Vec<f64> {
    (2..=8).map(|k| k as f64 / 10.0).collect()
}

/// Recomputes each pair's final score under every `lambda` and correlates
/// it with the human scores.
pub fn weight_sweep(
    reports: &[ScoreReport],
    human_scores: &[f64],
    lambdas: &[f64],
) -> Result<Vec<SweepRow>, CorrelationError> {
    if reports.len() != human_scores.len() {
        return Err(CorrelationError::DegenerateInput("length mismatch"));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(CorrelationError::BadLambda(lambda));
            }
            let finals: Vec<f64> = reports.iter().map(|r| r.final_with_lambda(lambda)).collect();
            Ok(SweepRow { lambda, r: pearson(&finals, human_scores)? })
        })
        .collect()
}

/// Row with the highest correlation; the earliest row wins ties.
pub fn best_row(rows: &[SweepRow]) -> Option<SweepRow> {
    rows.iter().copied().fold(None, |best, row| match best {
        Some(b) if b.r >= row.r => Some(b),
        _ => Some(row),
    })
}
