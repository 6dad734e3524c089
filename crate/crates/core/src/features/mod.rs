//! Tokenization, stemming, vocabulary construction and vectorization.

pub mod porter;
mod tokenize;

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use tokenize::{tokenize, Stemmer, TokenizerConfig};

use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVec {
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl SparseVec {
    /// Builds from unsorted (index, value) pairs, summing duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> SparseVec {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in pairs {
            *map.entry(i).or_insert(0.0) += v;
        }
        SparseVec {
            indices: map.keys().copied().collect(),
            values: map.values().copied().collect(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter().map(|(i, v)| v * dense[i as usize]).sum()
    }

    pub fn dot(&self, other: &SparseVec) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, k: f64) -> SparseVec {
        SparseVec {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    pub fn get(&self, index: u32) -> f64 {
        self.indices
            .binary_search(&index)
            .map(|p| self.values[p])
            .unwrap_or(0.0)
    }
}

/// A paragraph's feature vector.
pub type FeatureVector = SparseVec;

/// Term index fixed by the training paragraphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub tokenizer: TokenizerConfig,
    pub use_idf: bool,
    /// Terms in index order (lexicographic).
    pub terms: Vec<String>,
    /// Paragraph-level document frequency, aligned with `terms`.
    pub document_frequency: Vec<u32>,
    pub n_train_docs: usize,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(train_paragraphs: &[S], tokenizer: TokenizerConfig, use_idf: bool) -> Result<Vocabulary> {
        let mut df: BTreeMap<String, u32> = BTreeMap::new();
        for text in train_paragraphs {
            let mut toks = tokenize(text.as_ref(), &tokenizer);
            toks.sort_unstable();
            toks.dedup();
            for t in toks {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let (terms, document_frequency): (Vec<String>, Vec<u32>) = df.into_iter().unzip();
        let mut vocab = Vocabulary {
            tokenizer,
            use_idf,
            terms,
            document_frequency,
            n_train_docs: train_paragraphs.len(),
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        Ok(vocab)
    }

    /// Restores the lookup table after deserialization.
    pub fn rebuild_index(&mut self) {
        self.index = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Option<u32> {
        self.index_of(term).map(|i| self.document_frequency[i as usize])
    }

    /// ln((1 + n) / (1 + df)) + 1
    pub fn idf(&self, index: u32) -> f64 {
        let n = self.n_train_docs as f64;
        let df = f64::from(self.document_frequency[index as usize]);
        ((1.0 + n) / (1.0 + df)).ln() + 1.0
    }

    /// Raw term counts, or L2-normalized count·idf weights when `use_idf`.
    /// Out-of-vocabulary tokens are dropped.
    pub fn vectorize(&self, text: &str) -> FeatureVector {
        let counts = tokenize(text, &self.tokenizer)
            .into_iter()
            .filter_map(|t| self.index_of(&t))
            .map(|i| (i, 1.0));
        let v = SparseVec::from_pairs(counts);
        if !self.use_idf {
            return v;
        }
        let weighted = SparseVec {
            values: v.iter().map(|(i, c)| c * self.idf(i)).collect(),
            indices: v.indices,
        };
        let norm = weighted.l2_norm();
        if norm > 0.0 {
            weighted.scaled(1.0 / norm)
        } else {
            weighted
        }
    }

    pub fn vectorize_all<S: AsRef<str>>(&self, texts: &[S]) -> Vec<FeatureVector> {
        texts.iter().map(|t| self.vectorize(t.as_ref())).collect()
    }

    /// SHA-256 over the tokenizer settings and every (term, index, df) row.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?}|{}|{}\n", self.tokenizer.stemmer, self.use_idf, self.n_train_docs).as_bytes());
        for (i, (t, df)) in self.terms.iter().zip(&self.document_frequency).enumerate() {
            h.update(format!("{t}\t{i}\t{df}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// `term<TAB>index<TAB>df` rows.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "term\tindex\tdf")?;
        for (i, (t, df)) in self.terms.iter().zip(&self.document_frequency).enumerate() {
            writeln!(w, "{t}\t{i}\t{df}")?;
        }
        Ok(())
    }
}
