//! Secure-aware token weighting for review-generation training.
//!
//! Tokens of a rendered review that name an identifier from the diff's
//! changed lines (I_V) or spell the security type (I_ST) are upweighted:
//! `w_t = 1 + alpha * [t in I_V] + beta * [t in I_ST]`, and the loss is
//! `-sum_t w_t * log p(x_t | x_<t)`. Masks are exported with their token
//! strings so an external trainer can map them onto its own subword pieces.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::jsonl::{self, JsonlError};
use crate::model::{CodeDiff, DatasetEntry, ReviewComment, ReviewField, SecurityType};

pub const DEFAULT_ALPHA: f64 = 2.0;
pub const DEFAULT_BETA: f64 = 5.0;
pub const MASK_FORMAT: &str = "secrev-weight-mask";
pub const MASK_VERSION: u32 = 1;

/// Keywords of C, C++, C#, Go, Java, JavaScript, PHP, Python and Ruby,
/// plus common literals. Never treated as identifiers.
const LANGUAGE_KEYWORDS: &[&str] = &[
    "False", "None", "True", "__FILE__", "__LINE__", "abstract", "alias", "and", "as", "assert", "async",
    "auto", "await", "base", "begin", "bool", "boolean", "break", "byte", "case", "catch", "chan", "char",
    "checked", "class", "const", "const_cast", "constexpr", "continue", "decimal", "def", "default",
    "defer", "defined", "del", "delegate", "delete", "do", "double", "dynamic_cast", "echo", "elif",
    "else", "elseif", "elsif", "end", "ensure", "enum", "event", "except", "explicit", "export",
    "extends", "extern", "fallthrough", "false", "final", "finally", "fixed", "float", "fn", "for",
    "foreach", "friend", "from", "func", "function", "global", "go", "goto", "if", "implements", "import",
    "in", "include", "inline", "instanceof", "int", "interface", "internal", "is", "lambda", "let",
    "lock", "long", "map", "module", "mutable", "namespace", "new", "next", "nil", "nonlocal", "not",
    "null", "nullptr", "object", "operator", "or", "out", "override", "package", "params", "pass",
    "private", "protected", "public", "raise", "range", "readonly", "redo", "ref", "register",
    "reinterpret_cast", "require", "rescue", "retry", "return", "sbyte", "sealed", "select", "self",
    "short", "signed", "sizeof", "static", "static_cast", "strictfp", "string", "struct", "super",
    "switch", "synchronized", "template", "then", "this", "throw", "throws", "trait", "transient",
    "true", "try", "type", "typedef", "typeid", "typename", "typeof", "uint", "ulong", "undef",
    "union", "unless", "unsafe", "unsigned", "until", "use", "using", "var", "virtual", "void",
    "volatile", "when", "where", "while", "with", "xor", "yield",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SaLossError {
    #[error("index {index} is out of range for {len} tokens")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{logprobs} log-probabilities for {tokens} tokens")]
    LengthMismatch { logprobs: usize, tokens: usize },
    #[error("no Security Type field spelling {0} in the token sequence")]
    TypeNotFoundInSequence(SecurityType),
    #[error("log-probability {value} at position {index} is not <= 0")]
    InvalidLogProb { index: usize, value: f64 },
    #[error("coefficient {name} = {value} must be finite and >= 0")]
    InvalidCoefficient { name: &'static str, value: f64 },
    #[error("token sequence is empty")]
    EmptySequence,
}

/// Splits on whitespace; runs of letters, digits and `_` are tokens and
/// every other character is a token of its own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            out.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            out.push(c.to_string());
        }
    }
    if !word.is_empty() {
        out.push(word);
    }
    out
}

/// Tokens of a serialized review, each tagged with the field whose body it
/// belongs to (`None` for labels and text outside any field).
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub fields: Vec<Option<ReviewField>>,
    pub origin: String,
}

impl TokenSequence {
    pub fn from_comment(comment: &ReviewComment) -> Self {
        Self::from_text(&comment.render())
    }

    /// Tokenizes line by line. A line opening with a field label and `:`
    /// starts that field; the body runs until the next label line.
    pub fn from_text(text: &str) -> Self {
        let label_tokens: Vec<(ReviewField, Vec<String>)> =
            ReviewField::ALL.iter().map(|&f| (f, tokenize(f.label()))).collect();
        let mut tokens = Vec::new();
        let mut fields = Vec::new();
        let mut current = None;
        for line in text.lines() {
            let line_tokens = tokenize(line);
            let label = label_tokens.iter().find(|(_, lt)| {
                line_tokens.len() > lt.len()
                    && line_tokens[lt.len()] == ":"
                    && line_tokens.iter().zip(lt).all(|(a, b)| a.eq_ignore_ascii_case(b))
            });
            let mut body_start = 0;
            if let Some((field, lt)) = label {
                current = Some(*field);
                body_start = lt.len() + 1;
            }
            for (i, t) in line_tokens.into_iter().enumerate() {
                fields.push(if i < body_start { None } else { current });
                tokens.push(t);
            }
        }
        TokenSequence { tokens, fields, origin: text.to_string() }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Identifier lexemes on the diff's added and removed lines, minus
/// language keywords.
pub fn diff_identifiers(diff: &CodeDiff) -> BTreeSet<String> {
    let keywords: HashSet<&str> = LANGUAGE_KEYWORDS.iter().copied().collect();
    let mut out = BTreeSet::new();
    for line in diff.changed_lines() {
        let mut run = String::new();
        for c in line.chars().chain(std::iter::once(' ')) {
            if c.is_ascii_alphanumeric() || c == '_' {
                run.push(c);
                continue;
            }
            if run.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') && !keywords.contains(run.as_str()) {
                out.insert(run.clone());
            }
            run.clear();
        }
    }
    out
}

/// I_V: positions in description, impact and advice whose token is exactly
/// an identifier from the diff's changed lines.
pub fn identify_value_tokens(diff: &CodeDiff, seq: &TokenSequence) -> BTreeSet<usize> {
    let ids = diff_identifiers(diff);
    seq.tokens
        .iter()
        .zip(&seq.fields)
        .enumerate()
        .filter(|(_, (t, f))| matches!(f, Some(f) if *f != ReviewField::SecurityType) && ids.contains(t.as_str()))
        .map(|(i, _)| i)
        .collect()
}

/// I_ST: the tokens of the Security Type field, which must spell `st`.
pub fn identify_type_tokens(seq: &TokenSequence, st: SecurityType) -> Result<BTreeSet<usize>, SaLossError> {
    let idx: Vec<usize> = (0..seq.len()).filter(|&i| seq.fields[i] == Some(ReviewField::SecurityType)).collect();
    let spelled: Vec<&str> = idx.iter().map(|&i| seq.tokens[i].as_str()).collect();
    if idx.is_empty() || spelled != tokenize(st.display_name()) {
        return Err(SaLossError::TypeNotFoundInSequence(st));
    }
    Ok(idx.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMask {
    pub weights: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub iv_indices: BTreeSet<usize>,
    pub ist_indices: BTreeSet<usize>,
}

impl WeightMask {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn check_coefficient(name: &'static str, value: f64) -> Result<(), SaLossError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SaLossError::InvalidCoefficient { name, value })
    }
}

/// Weights `1 + alpha * [t in iv] + beta * [t in ist]`; overlap adds both.
pub fn build_weight_mask(
    len: usize,
    iv: &BTreeSet<usize>,
    ist: &BTreeSet<usize>,
    alpha: f64,
    beta: f64,
) -> Result<WeightMask, SaLossError> {
    check_coefficient("alpha", alpha)?;
    check_coefficient("beta", beta)?;
    if let Some(&index) = iv.iter().chain(ist).find(|&&i| i >= len) {
        return Err(SaLossError::IndexOutOfRange { index, len });
    }
    let weights = (0..len)
        .map(|t| {
            let mut w = 1.0;
            if iv.contains(&t) {
                w += alpha;
            }
            if ist.contains(&t) {
                w += beta;
            }
            w
        })
        .collect();
    Ok(WeightMask { weights, alpha, beta, iv_indices: iv.clone(), ist_indices: ist.clone() })
}

/// Per-token log-probabilities, each `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenLogProbs(Vec<f64>);

impl TokenLogProbs {
    pub fn new(values: Vec<f64>) -> Result<Self, SaLossError> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v <= 0.0)) {
            return Err(SaLossError::InvalidLogProb { index, value });
        }
        Ok(TokenLogProbs(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `-sum_t w_t * logp_t`.
pub fn sa_loss(logprobs: &TokenLogProbs, mask: &WeightMask) -> Result<f64, SaLossError> {
    if logprobs.0.len() != mask.weights.len() {
        return Err(SaLossError::LengthMismatch { logprobs: logprobs.0.len(), tokens: mask.weights.len() });
    }
    Ok(-compensated_sum(logprobs.0.iter().zip(&mask.weights).map(|(l, w)| w * l)))
}

// Neumaier summation: keeps long sequences within a couple of ulps of the
// exact sum of the products.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// [`sa_loss`] divided by the token count, for reporting.
pub fn sa_loss_mean(logprobs: &TokenLogProbs, mask: &WeightMask) -> Result<f64, SaLossError> {
    if mask.weights.is_empty() {
        return Err(SaLossError::EmptySequence);
    }
    Ok(sa_loss(logprobs, mask)? / mask.weights.len() as f64)
}

/// Tokens and weight mask for one structured review of `diff`.
pub fn mask_for(diff: &CodeDiff, comment: &ReviewComment, alpha: f64, beta: f64) -> Result<(TokenSequence, WeightMask), SaLossError> {
    let seq = TokenSequence::from_comment(comment);
    let iv = identify_value_tokens(diff, &seq);
    let ist = identify_type_tokens(&seq, comment.security_type())?;
    let mask = build_weight_mask(seq.len(), &iv, &ist, alpha, beta)?;
    Ok((seq, mask))
}

/// One line of a mask file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaskRecord {
    Mask {
        id: String,
        tokens: Vec<String>,
        weights: Vec<f64>,
        alpha: f64,
        beta: f64,
        iv: Vec<usize>,
        ist: Vec<usize>,
    },
    Error {
        id: String,
        error: String,
    },
}

impl MaskRecord {
    pub fn is_error(&self) -> bool {
        matches!(self, MaskRecord::Error { .. })
    }
}

pub fn mask_header(alpha: f64, beta: f64) -> Value {
    json!({"format": MASK_FORMAT, "version": MASK_VERSION, "alpha": alpha, "beta": beta})
}

/// One record per entry, ordered by id. Entries that cannot be masked get
/// an error record instead of aborting the batch.
pub fn export_masks(entries: &[DatasetEntry], alpha: f64, beta: f64) -> Result<Vec<MaskRecord>, SaLossError> {
    check_coefficient("alpha", alpha)?;
    check_coefficient("beta", beta)?;
    let mut sorted: Vec<&DatasetEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(sorted
        .into_iter()
        .map(|e| {
            let Some(comment) = &e.comment else {
                return MaskRecord::Error { id: e.id.clone(), error: "entry has no structured comment".into() };
            };
            match mask_for(&e.diff, comment, alpha, beta) {
                Ok((seq, mask)) => MaskRecord::Mask {
                    id: e.id.clone(),
                    tokens: seq.tokens,
                    weights: mask.weights,
                    alpha,
                    beta,
                    iv: mask.iv_indices.into_iter().collect(),
                    ist: mask.ist_indices.into_iter().collect(),
                },
                Err(err) => MaskRecord::Error { id: e.id.clone(), error: err.to_string() },
            }
        })
        .collect())
}

/// Serialized mask file: header line then one record per line.
pub fn masks_to_jsonl(records: &[MaskRecord], alpha: f64, beta: f64) -> Result<String, JsonlError> {
    jsonl::to_jsonl_string(Some(&mask_header(alpha, beta)), records)
}
