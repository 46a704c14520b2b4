//! Evaluation metrics for generated security reviews.

mod bleu;
mod classification;
mod correlation;
mod secure_bleu;

pub use bleu::{bleu4, bleu4_tokens, bleu_tokens, brevity_penalty, MAX_ORDER};
pub use classification::{
    classification_report, ClassMetrics, ClassificationError, ClassificationReport, ConfusionMatrix,
};
pub use correlation::{best_row, default_lambdas, pearson, weight_sweep, CorrelationError, SweepRow};
pub use secure_bleu::{
    combine, extract_keywords, secure_bleu, BleuWeights, FieldWeights, KeywordWeights, ScoreReport,
    SecureBleuError, WeightsError,
};
