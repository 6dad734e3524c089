#![allow(dead_code)]

use std::collections::BTreeMap;

use delib_core::corpus::{Batch, Corpus, Document, Paragraph, Topic};
use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const POSITIVE: &[&str] = &[
    "recommend", "propose", "draft", "option", "suggest", "consider", "alternative", "should",
];
pub const NEGATIVE: &[&str] = &[
    "meeting", "schedule", "attached", "thanks", "lunch", "room", "call", "friday",
];

/// `docs` documents of `per_doc` paragraphs; paragraph k of every document
/// is positive when `positive(doc, k)`. Returns the corpus and the truth in
/// corpus order.
pub fn toy_corpus(
    seed: u64,
    docs: usize,
    per_doc: usize,
    positive: impl Fn(usize, usize) -> bool,
) -> (Corpus, Vec<(String, bool)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth = Vec::new();
    let mut out = Vec::new();
    for d in 0..docs {
        let id = Document::make_id(Batch::K1, &format!("toy{d:02}.txt"), 0);
        let paragraphs = (0..per_doc)
            .map(|k| {
                let pos = positive(d, k);
                let words = if pos { POSITIVE } else { NEGATIVE };
                let text: Vec<&str> = (0..6).map(|_| *words.choose(&mut rng).unwrap()).collect();
                let pid = format!("{id}/{k}");
                truth.push((pid.clone(), pos));
                Paragraph {
                    id: pid,
                    text: text.join(" "),
                    ordinal: k,
                    labels: BTreeMap::new(),
                }
            })
            .collect();
        out.push(Document {
            id,
            batch: Batch::K1,
            custodian: Batch::K1.custodian(),
            file_name: format!("toy{d:02}.txt"),
            topic: Topic::ALL[d % Topic::ALL.len()],
            paragraphs,
        });
    }
    (Corpus::from_documents(out).unwrap(), truth)
}
