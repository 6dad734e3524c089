//! Seeded synthetic collections with the batch, reviewer and label layout of
//! the real one. Used by tests, demos and the end-to-end pipeline check when
//! the annotated collection is not available.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    serialize_document, Batch, Corpus, Document, DocumentRecord, ExpectedCount, Label, ManifestRecord, Paragraph,
    Reviewer, Topic,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Fraction of each batch's published paragraph count.
    pub scale: f64,
    pub seed: u64,
    /// Probability that reviewer A's label disagrees with the latent class.
    pub label_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            scale: 0.1,
            seed: 7,
            label_noise: 0.08,
        }
    }
}

const CUES: &[&str] = &[
    "recommend", "option", "options", "proposal", "suggest", "consider", "alternative", "draft", "idea", "think",
    "should", "propose", "approach", "weigh", "concern", "might", "perhaps", "recommendation", "discuss", "counter",
];
const FACTS: &[&str] = &[
    "meeting", "scheduled", "attached", "today", "committee", "announced", "signed", "released", "report", "memo",
    "press", "statement", "schedule", "office", "hearing", "date", "event", "copy", "fax", "received",
];
const FILLER: &[&str] = &[
    "the", "of", "and", "to", "a", "in", "for", "on", "with", "that", "this", "is", "we", "be", "are", "it", "as",
    "by", "at", "from",
];
const CLOSINGS: &[&str] = &["Thanks.", "Thank you", "Best regards", "See you then", "Call me at 456-7890", "Cheers"];
const HEADERS: &[&str] = &["From:", "Sent:", "To:", "Cc:", "Subject:", "Date:", "Received:"];

fn topic_words(t: Topic) -> &'static [&'static str] {
    match t {
        Topic::Drugs => &["drug", "cocaine", "treatment", "enforcement"],
        Topic::Health => &["health", "insurance", "medicare", "coverage"],
        Topic::TaxProposals => &["tax", "credit", "deduction", "revenue"],
        Topic::Welfare => &["welfare", "work", "benefits", "reform"],
        Topic::ChildSupport => &["support", "enforcement", "paternity", "collections"],
        Topic::Service => &["service", "volunteers", "corps", "national"],
        Topic::MiscellaneousEmails => &["email", "message", "note", "update"],
        Topic::Disability => &["disability", "access", "ada", "accommodation"],
        Topic::Education => &["education", "schools", "teachers", "standards"],
        Topic::Budget => &["budget", "funding", "appropriations", "cuts"],
        Topic::Kids => &["kids", "children", "youth", "care"],
        Topic::Environment => &["environment", "pollution", "epa", "cleanup"],
        Topic::SocialSecurity => &["social", "security", "retirement", "trust"],
        Topic::Fathers => &["fathers", "fatherhood", "responsible", "dads"],
        Topic::Family => &["family", "leave", "parents", "home"],
        Topic::Superfund => &["superfund", "sites", "liability", "waste"],
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str], count: std::ops::Range<usize>, out: &mut Vec<&'a str>) {
    for _ in 0..rng.random_range(count) {
        out.push(words.choose(rng).copied().unwrap_or("the"));
    }
}

/// Text for a paragraph of latent class `privileged`.
fn paragraph_text(rng: &mut ChaCha8Rng, topic: Topic, privileged: bool) -> String {
    let mut words = Vec::new();
    pick(rng, FILLER, 6..14, &mut words);
    pick(rng, topic_words(topic), 1..4, &mut words);
    if privileged {
        pick(rng, CUES, 2..5, &mut words);
        pick(rng, FACTS, 0..2, &mut words);
    } else {
        pick(rng, FACTS, 2..5, &mut words);
        if rng.random_bool(0.3) {
            pick(rng, CUES, 1..2, &mut words);
        }
    }
    words.shuffle(rng);
    let mut s = words.join(" ");
    s.push('.');
    s
}

/// Reviewer A's privileged share per batch.
fn prevalence(batch: Batch) -> f64 {
    match batch {
        Batch::K2 => 0.4,
        Batch::R4 => 0.25,
        Batch::E5 => 0.3,
        _ => 0.33,
    }
}

fn flip(rng: &mut ChaCha8Rng, label: Label, to_priv: f64, to_not: f64) -> Label {
    match label {
        Label::D0 if rng.random_bool(to_priv) => Label::D1,
        Label::D1 if rng.random_bool(to_not) => Label::D0,
        l => l,
    }
}

/// Generates a collection with reviewer A on every batch and reviewers B and
/// AB on K2. Batch sizes are the published counts times `scale` (at least 12).
pub fn synthetic_corpus(cfg: &SynthConfig) -> Result<Corpus> {
    if !(cfg.scale > 0.0 && cfg.scale <= 1.0) {
        return Err(Error::Config(format!("scale {} outside (0, 1]", cfg.scale)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut docs = Vec::new();
    for batch in Batch::ALL {
        let target = ((batch.published_paragraphs() as f64 * cfg.scale).round() as usize).max(12);
        let mut made = 0;
        let mut file_no = 0;
        while made < target {
            let topic = *Topic::ALL.choose(&mut rng).unwrap_or(&Topic::Drugs);
            let file_name = format!("{} {file_no}", topic.name());
            file_no += 1;
            for doc_ordinal in 0..rng.random_range(1..4usize) {
                if made >= target {
                    break;
                }
                let len = rng.random_range(2..8usize).min(target - made);
                let doc_id = Document::make_id(batch, &file_name, doc_ordinal);
                let mut paragraphs = Vec::with_capacity(len);
                for ordinal in 0..len {
                    let privileged = rng.random_bool(prevalence(batch));
                    let (label, text) = if !privileged && batch == Batch::E5 && rng.random_bool(0.4) {
                        let mut w = vec![*HEADERS.choose(&mut rng).unwrap_or(&"From:")];
                        pick(&mut rng, FILLER, 3..4, &mut w);
                        (Label::E0, w.join(" "))
                    } else if !privileged && rng.random_bool(0.12) {
                        (Label::T0, CLOSINGS.choose(&mut rng).unwrap_or(&"Thanks.").to_string())
                    } else {
                        let text = paragraph_text(&mut rng, topic, privileged);
                        let latent = if privileged { Label::D1 } else { Label::D0 };
                        (flip(&mut rng, latent, cfg.label_noise, cfg.label_noise), text)
                    };
                    let mut labels = BTreeMap::new();
                    labels.insert(Reviewer::A, label);
                    if batch == Batch::K2 {
                        let b = flip(&mut rng, label, 0.25, 0.04);
                        let ab = if rng.random_bool(0.1) { label } else { b };
                        labels.insert(Reviewer::B, b);
                        labels.insert(Reviewer::AB, ab);
                    }
                    paragraphs.push(Paragraph {
                        id: format!("{doc_id}/{ordinal}"),
                        text,
                        ordinal,
                        labels,
                    });
                }
                made += len;
                docs.push(Document {
                    id: doc_id,
                    batch,
                    custodian: batch.custodian(),
                    file_name: file_name.clone(),
                    topic,
                    paragraphs,
                });
            }
        }
    }
    Corpus::from_documents(docs)
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

/// Writes one marker-format file per document and reviewer plus a manifest
/// with expected batch counts. Returns the manifest path.
pub fn write_collection(corpus: &Corpus, dir: &Path) -> Result<PathBuf> {
    let mut lines = Vec::new();
    for doc in &corpus.documents {
        let ordinal: usize = doc
            .id
            .rsplit('/')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Integrity(format!("document id {} has no ordinal", doc.id)))?;
        for reviewer in doc.reviewers() {
            let rel = PathBuf::from(doc.batch.as_str()).join(format!(
                "{}-{ordinal}-{}.txt",
                slug(&doc.file_name),
                reviewer.as_str().to_ascii_lowercase()
            ));
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::write(&path, serialize_document(doc, reviewer)).map_err(|e| Error::io(&path, e))?;
            lines.push(ManifestRecord::Document(DocumentRecord {
                path: rel,
                batch: doc.batch.as_str().to_string(),
                custodian: format!("{:?}", doc.custodian),
                file_name: doc.file_name.clone(),
                topic: doc.topic.name().to_string(),
                reviewer: reviewer.as_str().to_string(),
                doc: Some(ordinal),
            }));
        }
    }
    for (batch, &n) in &corpus.paragraph_counts {
        lines.push(ManifestRecord::Expect {
            expect: ExpectedCount {
                batch: batch.as_str().to_string(),
                paragraphs: n,
            },
        });
    }
    let mut text = String::new();
    for l in &lines {
        text.push_str(&serde_json::to_string(l)?);
        text.push('\n');
    }
    let manifest = dir.join("manifest.jsonl");
    fs::write(&manifest, text).map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_collection;

    #[test]
    fn layout_and_determinism() {
        let cfg = SynthConfig::default();
        let c = synthetic_corpus(&cfg).unwrap();
        assert_eq!(c.paragraph_counts[&Batch::K1], 52);
        assert_eq!(c.paragraph_counts[&Batch::E5], 29);
        assert_eq!(c.reviewers.len(), 3);
        assert_eq!(c.content_hash(), synthetic_corpus(&cfg).unwrap().content_hash());
    }

    #[test]
    fn written_collection_reloads() {
        let c = synthetic_corpus(&SynthConfig {
            scale: 0.05,
            ..SynthConfig::default()
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_collection(&c, dir.path()).unwrap();
        let back = load_collection(&manifest).unwrap();
        assert_eq!(back.content_hash(), c.content_hash());
    }
}
