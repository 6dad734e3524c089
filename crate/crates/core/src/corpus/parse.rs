//! The annotated-document text format.
//!
//! A document is a sequence of paragraphs, each introduced by a marker line
//! whose trimmed content is one of `D1//`, `D0//`, `0//`, `T0//` or `E0//`.
//! Everything up to the next marker (or end of file) is the paragraph body.

use std::collections::BTreeMap;

use super::types::{Batch, Custodian, Document, Label, Paragraph, Reviewer, Topic};
use crate::error::{Error, Result};

/// Metadata for one annotated file, normally taken from a manifest record.
#[derive(Debug, Clone)]
pub struct DocMeta {
    /// Where the text came from; used in error messages only.
    pub source: String,
    pub batch: Batch,
    pub custodian: Custodian,
    pub file_name: String,
    pub topic: Topic,
    pub reviewer: Reviewer,
    pub doc_ordinal: usize,
}

/// Something that looks like a marker but is not one of the known codes,
/// e.g. `X1//` or `D2//`.
fn looks_like_marker(trimmed: &str) -> bool {
    match trimmed.strip_suffix("//") {
        Some(head) => {
            !head.is_empty()
                && head.len() <= 3
                && head.chars().all(|c| c.is_ascii_alphanumeric())
        }
        None => false,
    }
}

pub fn parse_annotated_document(raw_text: &str, meta: &DocMeta) -> Result<Document> {
    let malformed = |line: Option<usize>, reason: String| Error::MalformedDocument {
        file: meta.source.clone(),
        line,
        reason,
    };

    let mut blocks: Vec<(Label, usize, Vec<&str>)> = Vec::new();
    for (idx, line) in raw_text.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if let Some(label) = Label::from_marker(trimmed) {
            blocks.push((label, lineno, Vec::new()));
            continue;
        }
        if looks_like_marker(trimmed) {
            return Err(malformed(
                Some(lineno),
                format!("unknown marker {trimmed:?}"),
            ));
        }
        match blocks.last_mut() {
            Some((_, _, body)) => body.push(line),
            None if trimmed.is_empty() => {}
            None => {
                return Err(malformed(
                    Some(lineno),
                    "text before the first marker".to_string(),
                ))
            }
        }
    }
    if blocks.is_empty() {
        return Err(malformed(None, "no label marker found".to_string()));
    }

    let doc_id = Document::make_id(meta.batch, &meta.file_name, meta.doc_ordinal);
    let mut paragraphs = Vec::with_capacity(blocks.len());
    for (ordinal, (label, lineno, body)) in blocks.into_iter().enumerate() {
        let start = body.iter().position(|l| !l.trim().is_empty());
        let end = body.iter().rposition(|l| !l.trim().is_empty());
        let text = match (start, end) {
            (Some(s), Some(e)) => body[s..=e].join("\n"),
            _ => {
                return Err(malformed(
                    Some(lineno),
                    "marker is not followed by any text".to_string(),
                ))
            }
        };
        let mut labels = BTreeMap::new();
        labels.insert(meta.reviewer, label);
        paragraphs.push(Paragraph {
            id: format!("{doc_id}/{ordinal}"),
            text,
            ordinal,
            labels,
        });
    }

    Ok(Document {
        id: doc_id,
        batch: meta.batch,
        custodian: meta.custodian,
        file_name: meta.file_name.clone(),
        topic: meta.topic,
        paragraphs,
    })
}

/// Writes a document back in marker format using `reviewer`'s labels.
///
/// Paragraphs without a label from `reviewer` are skipped.
pub fn serialize_document(doc: &Document, reviewer: Reviewer) -> String {
    let mut out = String::new();
    for p in &doc.paragraphs {
        if let Some(label) = p.label(reviewer) {
            out.push_str(label.marker());
            out.push('\n');
            out.push_str(&p.text);
            out.push('\n');
        }
    }
    out
}
