//! Paragraph classifiers over feature vectors, and weight introspection.

pub mod keyword;
pub mod lr;
pub mod svm;

pub use keyword::{AllOnes, KeywordModel, KEYWORDS};
pub use lr::{sigmoid, train_lr, LogisticObjective, LrModel};
pub use svm::{solve_dual, train_svm, DualSolution, Gram, Kernel, SvmModel, SvmWeights};

use crate::features::Vocabulary;

/// The `k` terms with the largest and the `k` with the smallest weights.
/// Equal weights fall back to term order; `k` beyond the vocabulary size
/// truncates.
pub fn top_weights(model: &LrModel, vocab: &Vocabulary, k: usize) -> (Vec<(String, f64)>, Vec<(String, f64)>) {
    let mut idx: Vec<usize> = (0..vocab.len().min(model.weights.len())).collect();
    let w = &model.weights;
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then_with(|| vocab.terms[a].cmp(&vocab.terms[b])));
    let positive = idx.iter().take(k).map(|&i| (vocab.terms[i].clone(), w[i])).collect();
    idx.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then_with(|| vocab.terms[a].cmp(&vocab.terms[b])));
    let negative = idx.iter().take(k).map(|&i| (vocab.terms[i].clone(), w[i])).collect();
    (positive, negative)
}
