//! Fixed keyword rule and the all-positive baseline.

use serde::{Deserialize, Serialize};

use crate::features::{tokenize, TokenizerConfig};

pub const KEYWORDS: [&str; 12] = [
    "option",
    "recommendation",
    "proposal",
    "suggest",
    "suggestion",
    "discuss",
    "discussion",
    "upcoming",
    "alternative",
    "frank",
    "candid",
    "ongoing",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordModel;

impl KeywordModel {
    /// Positive iff some unstemmed token is exactly one of the keywords.
    pub fn predict(&self, text: &str) -> bool {
        tokenize(text, &TokenizerConfig::default())
            .iter()
            .any(|t| KEYWORDS.contains(&t.as_str()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllOnes;

impl AllOnes {
    pub fn predict(&self, _text: &str) -> bool {
        true
    }
}
