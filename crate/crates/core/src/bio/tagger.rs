//! Paragraph classification through document-level tagging.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{meets_overlap, paragraphs_to_bio, privileged_fractions, train_crf, CrfModel, OverlapThreshold, Tag};
use crate::corpus::DataSet;
use crate::error::Result;
use crate::features::{tokenize, TokenizerConfig};

/// Stand-in token for paragraphs with no alphanumeric content, so every
/// paragraph owns at least one position. The tokenizer never emits it.
pub const EMPTY_PARAGRAPH: &str = "<empty>";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BioParams {
    pub c1: f64,
    pub c2: f64,
    pub overlap: OverlapThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BioTagger {
    pub crf: CrfModel,
    pub overlap: OverlapThreshold,
}

pub fn paragraph_tokens(text: &str) -> Vec<String> {
    let toks = tokenize(text, &TokenizerConfig::default());
    if toks.is_empty() {
        vec![EMPTY_PARAGRAPH.to_string()]
    } else {
        toks
    }
}

/// One token sequence per document, paragraphs in ordinal order, with the
/// example index of each paragraph.
struct DocSeq {
    examples: Vec<usize>,
    paragraphs: Vec<Vec<String>>,
}

fn documents(data: &DataSet) -> Vec<DocSeq> {
    data.document_groups()
        .into_iter()
        .map(|examples| DocSeq {
            paragraphs: examples.iter().map(|&i| paragraph_tokens(&data.examples[i].text)).collect(),
            examples,
        })
        .collect()
}

/// Gold tag sequences for every document of `data`.
pub fn training_sequences(data: &DataSet) -> Result<Vec<(Vec<String>, Vec<Tag>)>> {
    documents(data)
        .into_iter()
        .map(|d| {
            let labels: Vec<bool> = d.examples.iter().map(|&i| data.examples[i].label).collect();
            let seq = paragraphs_to_bio(&d.paragraphs, &labels)?;
            Ok((seq.tokens, seq.labels))
        })
        .collect()
}

pub fn train_tagger_crf(data: &DataSet, c1: f64, c2: f64) -> Result<CrfModel> {
    train_crf(&training_sequences(data)?, c1, c2)
}

/// Percentage of tokens tagged B or I in each example's paragraph, aligned
/// with `data.examples`.
pub fn privileged_percentages(crf: &CrfModel, data: &DataSet) -> Vec<f64> {
    let docs = documents(data);
    let per_doc: Vec<Vec<f64>> = docs
        .par_iter()
        .map(|d| {
            let mut tokens = Vec::new();
            let mut spans = Vec::with_capacity(d.paragraphs.len());
            for p in &d.paragraphs {
                let start = tokens.len();
                tokens.extend(p.iter().cloned());
                spans.push((start, tokens.len()));
            }
            let tags = crf.viterbi(&tokens);
            privileged_fractions(&tags, &spans).expect("spans built from non-empty paragraphs")
        })
        .collect();
    let mut out = vec![0.0; data.len()];
    for (d, fr) in docs.iter().zip(per_doc) {
        for (&i, f) in d.examples.iter().zip(fr) {
            out[i] = f;
        }
    }
    out
}

impl BioTagger {
    pub fn train(data: &DataSet, params: BioParams) -> Result<BioTagger> {
        Ok(BioTagger {
            crf: train_tagger_crf(data, params.c1, params.c2)?,
            overlap: params.overlap,
        })
    }

    /// (label, score) per example; the score is the B/I fraction in [0, 1].
    pub fn predict(&self, data: &DataSet) -> Vec<(bool, f64)> {
        privileged_percentages(&self.crf, data)
            .into_iter()
            .map(|p| (meets_overlap(p, self.overlap), p / 100.0))
            .collect()
    }
}
