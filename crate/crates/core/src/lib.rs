//! Security-focused code review toolkit.
//!
//! * [`model`]: review comments, taxonomy, dataset records
//! * [`text`]: normalization and Porter stemming
//! * [`metrics`]: BLEU-4, SecureBLEU, detection metrics, Pearson correlation
//! * [`pipeline`]: candidate collection, judging, combination, refinement, splits
//! * [`retrieval`]: BM25 template datastore
//! * [`client`]: chat-completion client with retries and bounded concurrency
//! * [`rarg`]: two-stage retrieval-augmented review generation
//! * [`sa_loss`]: secure-aware token weighting and loss

pub mod client;
pub mod jsonl;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod prompt;
pub mod rarg;
pub mod retrieval;
pub mod sa_loss;
pub mod text;

pub use model::{
    parse_review, render_review, CodeDiff, DatasetEntry, KeywordDictionary, ReviewComment,
    ReviewField, SecurityType, Source, Split,
};
