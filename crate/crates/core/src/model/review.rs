//! Structured security review comments and their labeled-block text form.
//!
//! A block looks like
//!
//! ```text
//! Security Type: Input Validation
//! Description: ...
//! Impact: ...
//! Advice: ...
//! ```
//!
//! Labels are matched case-insensitively at the start of a line and must
//! appear in the order above. A field body runs until the next label or the
//! end of the block, so bodies may span several lines. Non-Issue comments
//! render as the single `Security Type` line.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::security_type::{SecurityType, UnknownSecurityType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReviewField {
    SecurityType,
    Description,
    Impact,
    Advice,
}

impl ReviewField {
    pub const ALL: [ReviewField; 4] = [
        ReviewField::SecurityType,
        ReviewField::Description,
        ReviewField::Impact,
        ReviewField::Advice,
    ];

    /// The three free-text fields.
    pub const TEXT: [ReviewField; 3] =
        [ReviewField::Description, ReviewField::Impact, ReviewField::Advice];

    pub fn label(self) -> &'static str {
        match self {
            ReviewField::SecurityType => "Security Type",
            ReviewField::Description => "Description",
            ReviewField::Impact => "Impact",
            ReviewField::Advice => "Advice",
        }
    }

    /// Short key used in weight files and reports.
    pub fn key(self) -> &'static str {
        match self {
            ReviewField::SecurityType => "st",
            ReviewField::Description => "d",
            ReviewField::Impact => "i",
            ReviewField::Advice => "a",
        }
    }
}

impl fmt::Display for ReviewField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReviewError {
    #[error("missing field {0}")]
    MissingField(ReviewField),
    #[error("field {0} is empty")]
    EmptyField(ReviewField),
    #[error(transparent)]
    UnknownSecurityType(#[from] UnknownSecurityType),
    #[error("field {0} appears more than once")]
    DuplicateField(ReviewField),
    #[error("field {0} is out of order")]
    OutOfOrder(ReviewField),
    #[error("a Non-Issue comment cannot carry {0} text")]
    NonIssueWithBody(ReviewField),
}

/// A structured security review: type, description, impact and advice.
///
/// Non-Issue comments have empty text fields; every other type has all three
/// text fields non-empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ReviewCommentWire", into = "ReviewCommentWire")]
pub struct ReviewComment {
    security_type: SecurityType,
    description: String,
    impact: String,
    advice: String,
}

impl ReviewComment {
    pub fn new(
        security_type: SecurityType,
        description: impl Into<String>,
        impact: impl Into<String>,
        advice: impl Into<String>,
    ) -> Result<Self, ReviewError> {
        let comment = ReviewComment {
            security_type,
            description: description.into(),
            impact: impact.into(),
            advice: advice.into(),
        };
        for field in ReviewField::TEXT {
            let blank = comment.field(field).trim().is_empty();
            if security_type == SecurityType::NonIssue && !comment.field(field).is_empty() {
                return Err(ReviewError::NonIssueWithBody(field));
            }
            if security_type != SecurityType::NonIssue && blank {
                return Err(ReviewError::EmptyField(field));
            }
        }
        Ok(comment)
    }

    pub fn non_issue() -> Self {
        ReviewComment {
            security_type: SecurityType::NonIssue,
            description: String::new(),
            impact: String::new(),
            advice: String::new(),
        }
    }

    pub fn security_type(&self) -> SecurityType {
        self.security_type
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn impact(&self) -> &str {
        &self.impact
    }

    pub fn advice(&self) -> &str {
        &self.advice
    }

    /// Text of a field; the security type field yields its display name.
    pub fn field(&self, field: ReviewField) -> &str {
        match field {
            ReviewField::SecurityType => self.security_type.display_name(),
            ReviewField::Description => &self.description,
            ReviewField::Impact => &self.impact,
            ReviewField::Advice => &self.advice,
        }
    }

    /// Replaces the security type, re-checking the field invariants.
    pub fn with_security_type(self, security_type: SecurityType) -> Result<Self, ReviewError> {
        ReviewComment::new(security_type, self.description, self.impact, self.advice)
    }

    pub fn render(&self) -> String {
        render_review(self)
    }
}

impl fmt::Display for ReviewComment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_review(self))
    }
}

#[derive(Serialize, Deserialize)]
struct ReviewCommentWire {
    security_type: SecurityType,
    #[serde(default)]
    description: String,
    #[serde(default)]
    impact: String,
    #[serde(default)]
    advice: String,
}

impl TryFrom<ReviewCommentWire> for ReviewComment {
    type Error = ReviewError;

    fn try_from(w: ReviewCommentWire) -> Result<Self, Self::Error> {
        ReviewComment::new(w.security_type, w.description, w.impact, w.advice)
    }
}

impl From<ReviewComment> for ReviewCommentWire {
    fn from(c: ReviewComment) -> Self {
        ReviewCommentWire {
            security_type: c.security_type,
            description: c.description,
            impact: c.impact,
            advice: c.advice,
        }
    }
}

/// Emits the canonical labeled block. No trailing newline.
pub fn render_review(comment: &ReviewComment) -> String {
    let mut out = format!(
        "{}: {}",
        ReviewField::SecurityType.label(),
        comment.security_type.display_name()
    );
    if comment.security_type.is_issue() {
        for field in ReviewField::TEXT {
            out.push('\n');
            out.push_str(field.label());
            out.push_str(": ");
            out.push_str(comment.field(field));
        }
    }
    out
}

// Returns the field and the remainder of the line after "<label>:".
fn match_label(line: &str) -> Option<(ReviewField, &str)> {
    let trimmed = line.trim_start();
    for field in ReviewField::ALL {
        let label = field.label();
        let Some(head) = trimmed.get(..label.len()) else {
            continue;
        };
        if !head.eq_ignore_ascii_case(label) {
            continue;
        }
        if let Some(rest) = trimmed[label.len()..].trim_start_matches([' ', '\t']).strip_prefix(':')
        {
            return Some((field, rest));
        }
    }
    None
}

/// Parses a labeled block. Lines before the first label are ignored.
pub fn parse_review(text: &str) -> Result<ReviewComment, ReviewError> {
    let mut bodies: [Option<String>; 4] = Default::default();
    let mut current: Option<ReviewField> = None;
    let mut last_index: Option<usize> = None;

    for line in text.lines() {
        if let Some((field, rest)) = match_label(line) {
            let idx = field as usize;
            if bodies[idx].is_some() {
                return Err(ReviewError::DuplicateField(field));
            }
            if last_index.is_some_and(|last| idx < last) {
                return Err(ReviewError::OutOfOrder(field));
            }
            last_index = Some(idx);
            bodies[idx] = Some(rest.to_string());
            current = Some(field);
        } else if let Some(field) = current {
            let body = bodies[field as usize].as_mut().expect("current field has a body");
            body.push('\n');
            body.push_str(line);
        }
    }

    let st_text = bodies[0].take().ok_or(ReviewError::MissingField(ReviewField::SecurityType))?;
    let security_type: SecurityType = st_text.trim().parse()?;
    if security_type == SecurityType::NonIssue {
        return Ok(ReviewComment::non_issue());
    }

    let mut text_fields = Vec::with_capacity(3);
    for field in ReviewField::TEXT {
        let body = bodies[field as usize].take().ok_or(ReviewError::MissingField(field))?;
        let body = body.trim();
        if body.is_empty() {
            return Err(ReviewError::EmptyField(field));
        }
        text_fields.push(body.to_string());
    }
    let advice = text_fields.pop().expect("three fields");
    let impact = text_fields.pop().expect("three fields");
    let description = text_fields.pop().expect("three fields");
    ReviewComment::new(security_type, description, impact, advice)
}
