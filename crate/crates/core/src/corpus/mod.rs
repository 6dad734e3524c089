//! The annotated collection: parsing, loading and slicing into datasets.

mod manifest;
mod parse;
mod types;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use manifest::{DocumentRecord, ExpectedCount, Manifest, ManifestRecord, ResolvedRecord};
pub use parse::{parse_annotated_document, serialize_document, DocMeta};
pub use types::{
    binarize, Batch, Custodian, Document, Label, LabelScope, Paragraph, Reviewer, Topic,
};

use crate::error::{Error, Result};

/// A loaded collection. Immutable once built.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub reviewers: BTreeSet<Reviewer>,
    pub paragraph_counts: BTreeMap<Batch, usize>,
}

impl Corpus {
    /// Builds a corpus from already-parsed documents, merging per-reviewer
    /// copies of the same document and checking the collection invariants.
    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Corpus> {
        let mut documents: Vec<Document> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            match index.get(&doc.id) {
                None => {
                    index.insert(doc.id.clone(), documents.len());
                    documents.push(doc);
                }
                Some(&i) => merge_reviewer_copy(&mut documents[i], doc)?,
            }
        }

        let mut corpus = Corpus {
            documents,
            ..Default::default()
        };
        for doc in &corpus.documents {
            if doc.batch.custodian() != doc.custodian {
                return Err(Error::Integrity(format!(
                    "document {} in batch {} has custodian {:?}",
                    doc.id, doc.batch, doc.custodian
                )));
            }
            for (k, p) in doc.paragraphs.iter().enumerate() {
                if p.ordinal != k {
                    return Err(Error::Integrity(format!("paragraph {} has ordinal {} at position {k}", p.id, p.ordinal)));
                }
                if p.text.trim().is_empty() {
                    return Err(Error::Integrity(format!("paragraph {} is empty", p.id)));
                }
                if doc.batch != Batch::E5 && p.labels.values().any(|&l| l == Label::E0) {
                    return Err(Error::Integrity(format!(
                        "paragraph {} carries E0 outside batch E5",
                        p.id
                    )));
                }
                corpus.reviewers.extend(p.labels.keys().copied());
            }
            *corpus.paragraph_counts.entry(doc.batch).or_insert(0) += doc.paragraphs.len();
        }
        Ok(corpus)
    }

    pub fn total_paragraphs(&self) -> usize {
        self.paragraph_counts.values().sum()
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn paragraphs(&self) -> impl Iterator<Item = (&Document, &Paragraph)> {
        self.documents
            .iter()
            .flat_map(|d| d.paragraphs.iter().map(move |p| (d, p)))
    }

    /// Content hash over every document, paragraph text and label.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for doc in &self.documents {
            h.update(doc.id.as_bytes());
            h.update([0u8]);
            h.update(doc.topic.name().as_bytes());
            for p in &doc.paragraphs {
                h.update([1u8]);
                h.update(p.text.as_bytes());
                for (r, l) in &p.labels {
                    h.update([2u8]);
                    h.update(r.as_str().as_bytes());
                    h.update(l.as_str().as_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }

    /// Paragraph count of each topic among the paragraphs selected by the
    /// given filter.
    pub fn topic_counts(&self, dataset: &DataSet) -> BTreeMap<Topic, usize> {
        let topics: HashMap<&str, Topic> = self.documents.iter().map(|d| (d.id.as_str(), d.topic)).collect();
        let mut out = BTreeMap::new();
        for ex in &dataset.examples {
            if let Some(t) = topics.get(ex.document_id.as_str()) {
                *out.entry(*t).or_insert(0) += 1;
            }
        }
        out
    }
}

fn merge_reviewer_copy(existing: &mut Document, doc: Document) -> Result<()> {
    if existing.paragraphs.len() != doc.paragraphs.len() {
        return Err(Error::Integrity(format!(
            "document {}: reviewer copies disagree on paragraph count ({} vs {})",
            doc.id,
            existing.paragraphs.len(),
            doc.paragraphs.len()
        )));
    }
    if existing.topic != doc.topic || existing.custodian != doc.custodian {
        return Err(Error::Integrity(format!(
            "document {}: reviewer copies disagree on metadata",
            doc.id
        )));
    }
    for (old, new) in existing.paragraphs.iter_mut().zip(doc.paragraphs) {
        if old.text != new.text {
            return Err(Error::Integrity(format!(
                "paragraph {}: reviewer copies disagree on text",
                old.id
            )));
        }
        for (reviewer, label) in new.labels {
            if old.labels.insert(reviewer, label).is_some() {
                return Err(Error::DuplicateDocument(format!(
                    "{} (reviewer {reviewer} listed twice)",
                    existing.id
                )));
            }
        }
    }
    Ok(())
}

/// Loads every document listed in the manifest at `manifest_path`.
pub fn load_collection(manifest_path: &Path) -> Result<Corpus> {
    let manifest = Manifest::read(manifest_path)?;
    load_from_manifest(&manifest)
}

pub fn load_from_manifest(manifest: &Manifest) -> Result<Corpus> {
    let mut docs = Vec::with_capacity(manifest.documents.len());
    for rec in &manifest.documents {
        let raw = std::fs::read_to_string(&rec.path).map_err(|e| Error::io(&rec.path, e))?;
        let meta = DocMeta {
            source: rec.path.display().to_string(),
            batch: rec.batch,
            custodian: rec.custodian,
            file_name: rec.file_name.clone(),
            topic: rec.topic,
            reviewer: rec.reviewer,
            doc_ordinal: rec.doc_ordinal,
        };
        docs.push(parse_annotated_document(&raw, &meta)?);
    }
    let corpus = Corpus::from_documents(docs)?;
    for &(batch, expected) in &manifest.expected {
        let got = corpus.paragraph_counts.get(&batch).copied().unwrap_or(0);
        if got != expected {
            return Err(Error::Integrity(format!(
                "batch {batch}: manifest expects {expected} paragraphs, loaded {got}"
            )));
        }
    }
    Ok(corpus)
}

/// One binary-labelled paragraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub paragraph_id: String,
    pub document_id: String,
    pub ordinal: usize,
    pub text: String,
    pub label: bool,
}

/// Binary-labelled paragraphs in corpus order (documents in load order,
/// paragraphs by ordinal).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSet {
    pub examples: Vec<Example>,
}

impl DataSet {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.examples.iter().map(|e| e.text.as_str()).collect()
    }

    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label).count()
    }

    pub fn subset(&self, indices: &[usize]) -> DataSet {
        DataSet {
            examples: indices.iter().map(|&i| self.examples[i].clone()).collect(),
        }
    }

    pub fn concat(&self, other: &DataSet) -> DataSet {
        let mut examples = self.examples.clone();
        examples.extend(other.examples.iter().cloned());
        DataSet { examples }
    }

    /// Groups example indices by document, keeping first-appearance order
    /// of documents and ordinal order within each.
    pub fn document_groups(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<&str> = Vec::new();
        let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, ex) in self.examples.iter().enumerate() {
            groups
                .entry(ex.document_id.as_str())
                .or_insert_with(|| {
                    order.push(ex.document_id.as_str());
                    Vec::new()
                })
                .push(i);
        }
        order
            .into_iter()
            .map(|d| {
                let mut g = groups.remove(d).unwrap_or_default();
                g.sort_by_key(|&i| self.examples[i].ordinal);
                g
            })
            .collect()
    }

    /// Tab-separated `id, label, text` rows for audit; tabs, newlines and
    /// backslashes in the text are escaped.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id\tlabel\ttext")?;
        for ex in &self.examples {
            let text = ex
                .text
                .replace('\\', "\\\\")
                .replace('\t', "\\t")
                .replace('\n', "\\n")
                .replace('\r', "\\r");
            writeln!(w, "{}\t{}\t{}", ex.paragraph_id, u8::from(ex.label), text)?;
        }
        Ok(())
    }
}

/// Selects every paragraph of the given batches labelled by `reviewer`
/// whose label is in scope.
pub fn select(
    corpus: &Corpus,
    batches: &[Batch],
    reviewer: Reviewer,
    scope: LabelScope,
) -> Result<DataSet> {
    for &batch in batches {
        let docs: Vec<&Document> = corpus.documents.iter().filter(|d| d.batch == batch).collect();
        let annotated = docs
            .iter()
            .flat_map(|d| d.paragraphs.iter())
            .filter(|p| p.labels.contains_key(&reviewer))
            .count();
        let total: usize = docs.iter().map(|d| d.paragraphs.len()).sum();
        if annotated == 0 || annotated != total {
            return Err(Error::MissingAnnotation {
                reviewer: reviewer.to_string(),
                batch: batch.to_string(),
            });
        }
    }
    Ok(select_where(corpus, reviewer, scope, |d| batches.contains(&d.batch)))
}

/// Selects in-scope paragraphs labelled by `reviewer` in documents accepted
/// by `filter`. Paragraphs without a label from `reviewer` are skipped.
pub fn select_where(
    corpus: &Corpus,
    reviewer: Reviewer,
    scope: LabelScope,
    filter: impl Fn(&Document) -> bool,
) -> DataSet {
    let mut examples = Vec::new();
    for doc in corpus.documents.iter().filter(|d| filter(d)) {
        for p in &doc.paragraphs {
            let Some(label) = p.label(reviewer) else { continue };
            if let Some(bin) = binarize(label, scope) {
                examples.push(Example {
                    paragraph_id: p.id.clone(),
                    document_id: doc.id.clone(),
                    ordinal: p.ordinal,
                    text: p.text.clone(),
                    label: bin,
                });
            }
        }
    }
    DataSet { examples }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(batch: Batch, file: &str, ord: usize, reviewer: Reviewer, body: &str) -> Document {
        let meta = DocMeta {
            source: "mem".into(),
            batch,
            custodian: batch.custodian(),
            file_name: file.into(),
            topic: Topic::Kids,
            reviewer,
            doc_ordinal: ord,
        };
        parse_annotated_document(body, &meta).unwrap()
    }

    #[test]
    fn merges_reviewer_copies() {
        let a = doc(Batch::K2, "f", 0, Reviewer::A, "D1//\nx\nT0//\ny\n");
        let b = doc(Batch::K2, "f", 0, Reviewer::B, "D0//\nx\nD0//\ny\n");
        let c = Corpus::from_documents([a, b]).unwrap();
        assert_eq!(c.documents.len(), 1);
        assert_eq!(c.paragraph_counts[&Batch::K2], 2);
        let p = &c.documents[0].paragraphs[0];
        assert_eq!(p.label(Reviewer::A), Some(Label::D1));
        assert_eq!(p.label(Reviewer::B), Some(Label::D0));
        assert_eq!(c.reviewers.len(), 2);
    }

    #[test]
    fn duplicate_reviewer_copy_rejected() {
        let a = doc(Batch::K2, "f", 0, Reviewer::A, "D1//\nx\n");
        let err = Corpus::from_documents([a.clone(), a]).unwrap_err();
        assert!(matches!(err, Error::DuplicateDocument(_)));
    }

    #[test]
    fn e0_outside_e5_rejected() {
        let a = doc(Batch::K1, "f", 0, Reviewer::A, "E0//\nx\n");
        assert!(matches!(Corpus::from_documents([a]).unwrap_err(), Error::Integrity(_)));
    }

    #[test]
    fn select_scopes_and_missing_reviewer() {
        let a = doc(Batch::K1, "f", 0, Reviewer::A, "T0//\nhdr\nD1//\nx\nD0//\ny\n");
        let e = doc(Batch::E5, "g", 0, Reviewer::A, "E0//\nz\n");
        let c = Corpus::from_documents([a, e]).unwrap();

        let d0 = select(&c, &[Batch::K1], Reviewer::A, LabelScope::D0).unwrap();
        assert_eq!(d0.labels(), vec![true, false]);
        let d0t0 = select(&c, &[Batch::K1, Batch::E5], Reviewer::A, LabelScope::D0T0).unwrap();
        assert_eq!(d0t0.len(), 3);
        let all = select(&c, &[Batch::K1, Batch::E5], Reviewer::A, LabelScope::D0T0E0).unwrap();
        assert_eq!(all.len(), 4);
        assert_eq!(all.positives(), 1);

        let err = select(&c, &[Batch::K1], Reviewer::B, LabelScope::D0).unwrap_err();
        assert!(matches!(err, Error::MissingAnnotation { .. }));
        let err = select(&c, &[Batch::K2], Reviewer::A, LabelScope::D0).unwrap_err();
        assert!(matches!(err, Error::MissingAnnotation { .. }));
    }

    #[test]
    fn empty_corpus() {
        let c = Corpus::from_documents(Vec::new()).unwrap();
        assert_eq!(c.total_paragraphs(), 0);
        assert!(c.documents.is_empty());
    }

    #[test]
    fn tsv_escapes() {
        let ds = DataSet {
            examples: vec![Example {
                paragraph_id: "K1/f/0/0".into(),
                document_id: "K1/f/0".into(),
                ordinal: 0,
                text: "a\tb\nc".into(),
                label: true,
            }],
        };
        let mut buf = Vec::new();
        ds.write_tsv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id\tlabel\ttext\nK1/f/0/0\t1\ta\\tb\\nc\n");
    }

    #[test]
    fn document_groups_follow_ordinals() {
        let a = doc(Batch::K1, "f", 0, Reviewer::A, "D1//\nx\nD0//\ny\nD1//\nz\n");
        let b = doc(Batch::K1, "f", 1, Reviewer::A, "D1//\nw\n");
        let c = Corpus::from_documents([a, b]).unwrap();
        let ds = select(&c, &[Batch::K1], Reviewer::A, LabelScope::D0).unwrap();
        let shuffled = ds.subset(&[3, 2, 0, 1]);
        let groups = shuffled.document_groups();
        assert_eq!(groups, vec![vec![0], vec![2, 3, 1]]);
    }
}
