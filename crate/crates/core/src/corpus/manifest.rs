//! Line-delimited JSON manifest describing a collection.
//!
//! Each non-blank line that does not start with `#` is either a document
//! record
//!
//! ```text
//! {"path": "K1/superfund-03.txt", "batch": "K1", "custodian": "Kagan",
//!  "file_name": "Superfund", "topic": "Superfund", "reviewer": "A"}
//! ```
//!
//! or an expected paragraph count for a batch:
//!
//! ```text
//! {"expect": {"batch": "K1", "paragraphs": 523}}
//! ```
//!
//! Relative paths resolve against the manifest's directory. The optional
//! `doc` field gives the document ordinal within its file; when omitted it is
//! the number of earlier records with the same batch, file name and reviewer.
//! The same document annotated by several reviewers appears once per
//! reviewer with the same ordinal.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::types::{Batch, Custodian, Reviewer, Topic};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub path: PathBuf,
    pub batch: String,
    pub custodian: String,
    pub file_name: String,
    pub topic: String,
    pub reviewer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCount {
    pub batch: String,
    pub paragraphs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifestRecord {
    Expect { expect: ExpectedCount },
    Document(DocumentRecord),
}

/// A document record with every field validated.
#[derive(Debug, Clone)]
pub struct ResolvedRecord {
    pub line: usize,
    pub path: PathBuf,
    pub batch: Batch,
    pub custodian: Custodian,
    pub file_name: String,
    pub topic: Topic,
    pub reviewer: Reviewer,
    pub doc_ordinal: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub documents: Vec<ResolvedRecord>,
    pub expected: Vec<(Batch, usize)>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Manifest::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Manifest> {
        let mut manifest = Manifest::default();
        let mut next_ordinal: HashMap<(Batch, String, Reviewer), usize> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let record: ManifestRecord = serde_json::from_str(trimmed).map_err(|e| Error::Manifest {
                line,
                reason: e.to_string(),
            })?;
            let bad = |e: Error| Error::Manifest {
                line,
                reason: e.to_string(),
            };
            match record {
                ManifestRecord::Expect { expect } => {
                    let batch: Batch = expect.batch.parse().map_err(bad)?;
                    manifest.expected.push((batch, expect.paragraphs));
                }
                ManifestRecord::Document(rec) => {
                    let batch: Batch = rec.batch.parse().map_err(bad)?;
                    let custodian: Custodian = rec.custodian.parse().map_err(bad)?;
                    let topic: Topic = rec.topic.parse().map_err(bad)?;
                    let reviewer: Reviewer = rec.reviewer.parse().map_err(bad)?;
                    if batch.custodian() != custodian {
                        return Err(Error::Manifest {
                            line,
                            reason: format!("batch {batch} belongs to custodian {:?}, not {custodian:?}", batch.custodian()),
                        });
                    }
                    let counter = next_ordinal
                        .entry((batch, rec.file_name.clone(), reviewer))
                        .or_insert(0);
                    let doc_ordinal = rec.doc.unwrap_or(*counter);
                    *counter = (*counter).max(doc_ordinal + 1);
                    let path = if rec.path.is_absolute() {
                        rec.path.clone()
                    } else {
                        base.join(&rec.path)
                    };
                    manifest.documents.push(ResolvedRecord {
                        line,
                        path,
                        batch,
                        custodian,
                        file_name: rec.file_name,
                        topic,
                        reviewer,
                        doc_ordinal,
                    });
                }
            }
        }
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_record_kinds() {
        let text = r#"
# comment
{"path": "a.txt", "batch": "K2", "custodian": "Kagan", "file_name": "Kids Executive Order", "topic": "Kids", "reviewer": "A"}
{"path": "b.txt", "batch": "K2", "custodian": "Kagan", "file_name": "Kids Executive Order", "topic": "Kids", "reviewer": "A"}
{"path": "a-b.txt", "batch": "K2", "custodian": "Kagan", "file_name": "Kids Executive Order", "topic": "Kids", "reviewer": "B", "doc": 0}
{"expect": {"batch": "K2", "paragraphs": 447}}
"#;
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.documents.len(), 3);
        assert_eq!(m.documents[0].doc_ordinal, 0);
        assert_eq!(m.documents[1].doc_ordinal, 1);
        assert_eq!(m.documents[2].doc_ordinal, 0);
        assert_eq!(m.documents[0].path, PathBuf::from("/data/a.txt"));
        assert_eq!(m.expected, vec![(Batch::K2, 447)]);
    }

    #[test]
    fn rejects_custodian_mismatch() {
        let text = r#"{"path": "a.txt", "batch": "R4", "custodian": "Kagan", "file_name": "x", "topic": "Fathers", "reviewer": "A"}"#;
        let err = Manifest::parse(text, Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Manifest { line: 1, .. }));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Manifest::parse("{not json", Path::new(".")).is_err());
        let bad_batch = r#"{"path": "a.txt", "batch": "Z9", "custodian": "Kagan", "file_name": "x", "topic": "Kids", "reviewer": "A"}"#;
        assert!(Manifest::parse(bad_batch, Path::new(".")).is_err());
    }
}
