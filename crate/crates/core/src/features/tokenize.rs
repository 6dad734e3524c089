use serde::{Deserialize, Serialize};

use super::porter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Stemmer {
    #[default]
    None,
    Porter,
}

/// Lowercased maximal runs of alphanumeric characters; no stop words and no
/// minimum length, so numerals such as "30" survive as terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub stemmer: Stemmer,
}

impl TokenizerConfig {
    pub fn new(stemmer: Stemmer) -> Self {
        TokenizerConfig { stemmer }
    }
}

pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    if config.stemmer == Stemmer::Porter {
        for tok in &mut out {
            *tok = porter::stem(tok);
        }
    }
    out
}
