//! Word-level B/I/O tagging of privileged spans and the mapping between
//! tag sequences and paragraph labels.

pub mod crf;
pub mod tagger;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use crf::{extract_features, train_crf, CrfModel};
pub use tagger::{BioParams, BioTagger};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    B,
    I,
    O,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::B, Tag::I, Tag::O];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Tag {
        Tag::ALL[i]
    }

    pub fn is_privileged(self) -> bool {
        self != Tag::O
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::B => "B",
            Tag::I => "I",
            Tag::O => "O",
        })
    }
}

/// Minimum percentage of B/I tokens for a paragraph to count as privileged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct OverlapThreshold(u8);

impl OverlapThreshold {
    pub fn new(percent: u8) -> Result<OverlapThreshold> {
        if percent == 0 || percent > 100 || percent % 10 != 0 {
            return Err(Error::InvalidHyperParameter(format!(
                "overlap must be one of 10, 20, ..., 100; got {percent}"
            )));
        }
        Ok(OverlapThreshold(percent))
    }

    pub fn percent(self) -> u8 {
        self.0
    }

    pub fn all() -> Vec<OverlapThreshold> {
        (1..=10).map(|k| OverlapThreshold(k * 10)).collect()
    }
}

impl TryFrom<u8> for OverlapThreshold {
    type Error = Error;
    fn try_from(p: u8) -> Result<Self> {
        OverlapThreshold::new(p)
    }
}

impl From<OverlapThreshold> for u8 {
    fn from(o: OverlapThreshold) -> u8 {
        o.0
    }
}

/// One document as a token sequence with per-paragraph spans.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioSequence {
    pub tokens: Vec<String>,
    /// Half-open `[start, end)` token ranges, one per paragraph, in order.
    pub paragraph_spans: Vec<(usize, usize)>,
    pub labels: Vec<Tag>,
}

/// True when no I starts the sequence or follows an O.
pub fn is_valid_bio(labels: &[Tag]) -> bool {
    let mut prev = Tag::O;
    for &t in labels {
        if t == Tag::I && prev == Tag::O {
            return false;
        }
        prev = t;
    }
    true
}

/// Builds the gold tagging of a document: each maximal run of privileged
/// paragraphs is one span whose first token is B and the rest I.
pub fn paragraphs_to_bio(paragraph_tokens: &[Vec<String>], labels: &[bool]) -> Result<BioSequence> {
    if paragraph_tokens.len() != labels.len() {
        return Err(Error::Alignment {
            left: paragraph_tokens.len(),
            right: labels.len(),
        });
    }
    if paragraph_tokens.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut tokens = Vec::new();
    let mut spans = Vec::with_capacity(labels.len());
    let mut tags = Vec::new();
    let mut in_span = false;
    for (toks, &privileged) in paragraph_tokens.iter().zip(labels) {
        if toks.is_empty() {
            return Err(Error::InvalidSpan(format!("paragraph {} has no tokens", spans.len())));
        }
        let start = tokens.len();
        for _ in toks {
            tags.push(match (privileged, in_span) {
                (false, _) => Tag::O,
                (true, false) => Tag::B,
                (true, true) => Tag::I,
            });
            in_span = privileged;
        }
        tokens.extend(toks.iter().cloned());
        spans.push((start, tokens.len()));
    }
    Ok(BioSequence {
        tokens,
        paragraph_spans: spans,
        labels: tags,
    })
}

fn check_spans(len: usize, spans: &[(usize, usize)]) -> Result<()> {
    let mut expected = 0;
    for &(s, e) in spans {
        if s != expected || e > len {
            return Err(Error::InvalidSpan(format!("spans do not partition 0..{len}")));
        }
        if e <= s {
            return Err(Error::InvalidSpan(format!("zero-length span at {s}")));
        }
        expected = e;
    }
    if expected != len {
        return Err(Error::InvalidSpan(format!("spans cover 0..{expected}, sequence has {len}")));
    }
    Ok(())
}

/// Percentage of B/I tokens in each span.
pub fn privileged_fractions(labels: &[Tag], spans: &[(usize, usize)]) -> Result<Vec<f64>> {
    check_spans(labels.len(), spans)?;
    Ok(spans
        .iter()
        .map(|&(s, e)| {
            let hits = labels[s..e].iter().filter(|t| t.is_privileged()).count();
            100.0 * hits as f64 / (e - s) as f64
        })
        .collect())
}

/// A paragraph is privileged iff its B/I percentage is at least the overlap.
pub fn bio_to_paragraph(labels: &[Tag], spans: &[(usize, usize)], overlap: OverlapThreshold) -> Result<Vec<bool>> {
    Ok(privileged_fractions(labels, spans)?
        .into_iter()
        .map(|f| meets_overlap(f, overlap))
        .collect())
}

/// The guard absorbs float error in percentages such as 100·3/10.
pub fn meets_overlap(percent: f64, overlap: OverlapThreshold) -> bool {
    percent + 1e-9 >= f64::from(overlap.percent())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Tag::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn adjacent_privileged_paragraphs_merge() {
        let paras = vec![toks(&["a", "b"]), toks(&["c", "d"]), toks(&["e", "f"]), toks(&["g", "h"])];
        let seq = paragraphs_to_bio(&paras, &[false, true, true, false]).unwrap();
        assert_eq!(seq.labels, [O, O, B, I, I, I, O, O]);
        assert_eq!(seq.paragraph_spans, [(0, 2), (2, 4), (4, 6), (6, 8)]);
        assert!(is_valid_bio(&seq.labels));
    }

    #[test]
    fn simple_cases() {
        let seq = paragraphs_to_bio(&[toks(&["a", "b"]), toks(&["c"])], &[false, false]).unwrap();
        assert_eq!(seq.labels, [O, O, O]);
        let seq = paragraphs_to_bio(&[toks(&["we", "suggest", "x"])], &[true]).unwrap();
        assert_eq!(seq.labels, [B, I, I]);
        assert!(matches!(paragraphs_to_bio(&[], &[]), Err(Error::EmptySequence)));
    }

    #[test]
    fn overlap_is_inclusive() {
        let o = |p| OverlapThreshold::new(p).unwrap();
        assert_eq!(bio_to_paragraph(&[B, I, O, O], &[(0, 4)], o(50)).unwrap(), [true]);
        assert_eq!(bio_to_paragraph(&[O, O, O], &[(0, 3)], o(10)).unwrap(), [false]);
        assert_eq!(bio_to_paragraph(&[I, I, I], &[(0, 3)], o(100)).unwrap(), [true]);
        // 3 of 10 is exactly 30%.
        let labels = [B, I, I, O, O, O, O, O, O, O];
        assert_eq!(bio_to_paragraph(&labels, &[(0, 10)], o(30)).unwrap(), [true]);
        assert_eq!(bio_to_paragraph(&labels, &[(0, 10)], o(40)).unwrap(), [false]);
    }

    #[test]
    fn bad_spans() {
        let o = OverlapThreshold::new(50).unwrap();
        assert!(matches!(bio_to_paragraph(&[O, O], &[(0, 0), (0, 2)], o), Err(Error::InvalidSpan(_))));
        assert!(matches!(bio_to_paragraph(&[O, O], &[(0, 1)], o), Err(Error::InvalidSpan(_))));
        assert!(OverlapThreshold::new(0).is_err());
        assert!(OverlapThreshold::new(55).is_err());
        assert_eq!(OverlapThreshold::all().len(), 10);
    }

    #[test]
    fn valid_bio() {
        assert!(is_valid_bio(&[B, I, O, B]));
        assert!(!is_valid_bio(&[I]));
        assert!(!is_valid_bio(&[B, O, I]));
    }
}
