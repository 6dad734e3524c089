//! L2-regularized logistic regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVec;
use crate::optim::{minimize, MinimizeConfig, Objective, Trace};

pub const MAX_ITER: usize = 1000;
pub const REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Predict positive iff σ(w·x + b) ≥ threshold.
    pub threshold: f64,
    pub c: f64,
}

impl LrModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn probability(&self, x: &SparseVec) -> f64 {
        sigmoid(self.decision(x))
    }

    /// Returns (label, score).
    pub fn predict(&self, x: &SparseVec) -> (bool, f64) {
        let score = self.probability(x);
        (score >= self.threshold, score)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^t) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// (1/2)‖w‖² + C Σ log(1 + exp(−yᵢ(w·xᵢ + b))), parameters laid out as
/// `[w_0 .. w_{d-1}, b]`; the bias is not regularized.
pub struct LogisticObjective<'a> {
    pub vectors: &'a [SparseVec],
    pub labels: &'a [bool],
    pub dim: usize,
    pub c: f64,
}

impl Objective for LogisticObjective<'_> {
    fn dim(&self) -> usize {
        self.dim + 1
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let (w, b) = x.split_at(self.dim);
        let b = b[0];
        let mut f = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
        grad[..self.dim].copy_from_slice(w);
        grad[self.dim] = 0.0;
        for (v, &label) in self.vectors.iter().zip(self.labels) {
            let y = if label { 1.0 } else { -1.0 };
            let margin = y * (v.dot_dense(w) + b);
            f += self.c * softplus(-margin);
            // d/dz log(1 + e^{-yz}) = -y σ(-yz)
            let coef = -self.c * y * sigmoid(-margin);
            for (i, val) in v.iter() {
                grad[i as usize] += coef * val;
            }
            grad[self.dim] += coef;
        }
        f
    }
}

pub fn check_two_classes(labels: &[bool]) -> Result<()> {
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::DegenerateTraining(format!(
            "{} examples, {pos} positive: need both classes",
            labels.len()
        )));
    }
    Ok(())
}

pub fn train_lr(vectors: &[SparseVec], labels: &[bool], dim: usize, c: f64, threshold: f64) -> Result<LrModel> {
    train_lr_traced(vectors, labels, dim, c, threshold).map(|(m, _)| m)
}

pub fn train_lr_traced(
    vectors: &[SparseVec],
    labels: &[bool],
    dim: usize,
    c: f64,
    threshold: f64,
) -> Result<(LrModel, Trace)> {
    if vectors.len() != labels.len() {
        return Err(Error::Alignment {
            left: vectors.len(),
            right: labels.len(),
        });
    }
    check_two_classes(labels)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidHyperParameter(format!("C must be positive, got {c}")));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidHyperParameter(format!("threshold must be in [0, 1], got {threshold}")));
    }
    let obj = LogisticObjective {
        vectors,
        labels,
        dim,
        c,
    };
    let cfg = MinimizeConfig {
        max_iter: MAX_ITER,
        rel_tol: REL_TOL,
        ..Default::default()
    };
    let (mut x, trace) = minimize(&obj, vec![0.0; dim + 1], &cfg);
    let bias = x.pop().unwrap_or(0.0);
    Ok((
        LrModel {
            weights: x,
            bias,
            threshold,
            c,
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn one_dimensional_separable() {
        let xs = vec![sv(&[(0, -1.0)]), sv(&[(0, 1.0)])];
        let m = train_lr(&xs, &[false, true], 1, 1.0, 0.5).unwrap();
        assert!(m.weights[0] > 0.0);
        assert!(m.probability(&xs[1]) > 0.5);
    }

    #[test]
    fn threshold_semantics() {
        let zero = LrModel {
            weights: vec![0.0],
            bias: 0.0,
            threshold: 0.5,
            c: 1.0,
        };
        assert_eq!(zero.predict(&sv(&[])), (true, 0.5));

        let saturating = LrModel { threshold: 1.0, bias: 30.0, ..zero.clone() };
        let (label, score) = saturating.predict(&sv(&[]));
        assert!(score < 1.0 || label);
        let high = LrModel { threshold: 1.0, bias: 5.0, ..zero.clone() };
        assert!(!high.predict(&sv(&[])).0);

        // σ(z) = 0.73 at z = ln(0.73 / 0.27)
        let z = (0.73f64 / 0.27).ln();
        let m = LrModel { threshold: 0.7, bias: z, ..zero };
        let (label, score) = m.predict(&sv(&[]));
        assert!((score - 0.73).abs() < 1e-12);
        assert!(label);
    }

    #[test]
    fn single_class_is_degenerate() {
        let xs = vec![sv(&[(0, 1.0)]), sv(&[(0, 2.0)])];
        let err = train_lr(&xs, &[true, true], 1, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateTraining(_)));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert!((softplus(800.0) - 800.0).abs() < 1e-9);
    }
}
