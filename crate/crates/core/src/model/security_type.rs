use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The eight-way security taxonomy: seven issue categories plus `NonIssue`.
///
/// Variant order is the canonical ordering used for dictionary iteration,
/// confusion-matrix indexing and report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SecurityType {
    ExceptionHandling,
    Concurrency,
    InputValidation,
    AccessControlAndInformationSecurity,
    ResourceManagement,
    StateManagement,
    TypeAndDataHandling,
    NonIssue,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown security type {0:?}")]
pub struct UnknownSecurityType(pub String);

impl SecurityType {
    pub const ALL: [SecurityType; 8] = [
        SecurityType::ExceptionHandling,
        SecurityType::Concurrency,
        SecurityType::InputValidation,
        SecurityType::AccessControlAndInformationSecurity,
        SecurityType::ResourceManagement,
        SecurityType::StateManagement,
        SecurityType::TypeAndDataHandling,
        SecurityType::NonIssue,
    ];

    /// The seven categories that describe an actual issue.
    pub const ISSUES: [SecurityType; 7] = [
        SecurityType::ExceptionHandling,
        SecurityType::Concurrency,
        SecurityType::InputValidation,
        SecurityType::AccessControlAndInformationSecurity,
        SecurityType::ResourceManagement,
        SecurityType::StateManagement,
        SecurityType::TypeAndDataHandling,
    ];

    pub fn display_name(self) -> &'static str {
        match self {
            SecurityType::ExceptionHandling => "Exception Handling",
            SecurityType::Concurrency => "Concurrency",
            SecurityType::InputValidation => "Input Validation",
            SecurityType::AccessControlAndInformationSecurity => {
                "Access Control and Information Security"
            }
            SecurityType::ResourceManagement => "Resource Management",
            SecurityType::StateManagement => "State Management",
            SecurityType::TypeAndDataHandling => "Type and Data Handling",
            SecurityType::NonIssue => "Non-Issue",
        }
    }

    /// Position in [`SecurityType::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<SecurityType> {
        Self::ALL.get(index).copied()
    }

    pub fn is_issue(self) -> bool {
        self != SecurityType::NonIssue
    }
}

// Lowercase alphanumerics only, so "Non-Issue", "non issue" and "NonIssue"
// all collapse to the same key.
fn fold(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl FromStr for SecurityType {
    type Err = UnknownSecurityType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = fold(s);
        if key.is_empty() {
            return Err(UnknownSecurityType(s.trim().to_string()));
        }
        Self::ALL
            .iter()
            .copied()
            .find(|t| fold(t.display_name()) == key)
            .ok_or_else(|| UnknownSecurityType(s.trim().to_string()))
    }
}

impl fmt::Display for SecurityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl Serialize for SecurityType {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.display_name())
    }
}

impl<'de> Deserialize<'de> for SecurityType {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
