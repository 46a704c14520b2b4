//! Domain types shared across the toolkit.

mod dataset;
mod diff;
mod keywords;
mod review;
mod security_type;

pub use dataset::{DatasetEntry, EntryError, RawRecord, Source, Split};
pub use diff::{CodeDiff, EmptyDiff};
pub use keywords::{is_cwe_id, KeywordDictionary, KeywordEntry, KeywordError};
pub use review::{parse_review, render_review, ReviewComment, ReviewError, ReviewField};
pub use security_type::{SecurityType, UnknownSecurityType};
