//! Soft-margin SVM trained in the dual with SMO (second-order working set
//! selection) over a precomputed kernel matrix.

use serde::{Deserialize, Serialize};

use super::lr::{check_two_classes, sigmoid};
use crate::error::{Error, Result};
use crate::features::SparseVec;

pub const KKT_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Linear => "linear",
            Kernel::Rbf { .. } => "rbf",
        }
    }

    /// Kernel value from a dot product and the two squared norms.
    pub fn from_dot(&self, dot: f64, sq_a: f64, sq_b: f64) -> f64 {
        match *self {
            Kernel::Linear => dot,
            Kernel::Rbf { gamma } => (-gamma * (sq_a + sq_b - 2.0 * dot).max(0.0)).exp(),
        }
    }
}

/// Pairwise dot products of a vector set, shared by every kernel and C.
#[derive(Debug, Clone)]
pub struct Gram {
    pub n: usize,
    pub dots: Vec<f64>,
    pub sq_norms: Vec<f64>,
}

impl Gram {
    pub fn new(vectors: &[SparseVec]) -> Gram {
        let n = vectors.len();
        let mut dots = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let d = vectors[i].dot(&vectors[j]);
                dots[i * n + j] = d;
                dots[j * n + i] = d;
            }
        }
        let sq_norms = (0..n).map(|i| dots[i * n + i]).collect();
        Gram { n, dots, sq_norms }
    }

    pub fn kernel_matrix(&self, kernel: Kernel) -> Vec<f64> {
        let n = self.n;
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                k[i * n + j] = kernel.from_dot(self.dots[i * n + j], self.sq_norms[i], self.sq_norms[j]);
            }
        }
        k
    }
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision function is Σ αᵢ yᵢ K(xᵢ, x) − rho.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves min ½ αᵀQα − Σα subject to 0 ≤ α ≤ C and yᵀα = 0, where
/// Qᵢⱼ = yᵢ yⱼ Kᵢⱼ, until the maximal KKT violation is below `tol`.
pub fn solve_dual(kernel: &[f64], labels: &[bool], c: f64, tol: f64) -> Result<DualSolution> {
    let n = labels.len();
    if kernel.len() != n * n {
        return Err(Error::Alignment {
            left: kernel.len(),
            right: n * n,
        });
    }
    check_two_classes(labels)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidHyperParameter(format!("C must be positive, got {c}")));
    }
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let k = |i: usize, j: usize| kernel[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = (100 * n).max(100_000);
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // i: maximal violator in I_up.
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            let in_up = if y[t] > 0.0 { !upper(alpha[t]) } else { !lower(alpha[t]) };
            if in_up && -y[t] * grad[t] >= gmax {
                if -y[t] * grad[t] > gmax || i_sel == usize::MAX {
                    gmax = -y[t] * grad[t];
                    i_sel = t;
                }
            }
        }
        // j: second-order choice in I_low.
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            let in_low = if y[t] > 0.0 { !lower(alpha[t]) } else { !upper(alpha[t]) };
            if !in_low {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i_sel != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = k(i_sel, i_sel) + k(t, t) - 2.0 * k(i_sel, t);
                if a <= 0.0 {
                    a = TAU;
                }
                let obj = -(b * b) / a;
                if obj < best {
                    best = obj;
                    j_sel = t;
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let qij = y[i] * y[j] * k(i, j);
        if y[i] != y[j] {
            let mut quad = k(i, i) + k(j, j) + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = k(i, i) + k(j, j) - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k(t, i) * di + y[j] * k(t, j) * dj);
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} iterations without reaching tolerance {tol}");
    }

    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };
    Ok(DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum SvmWeights {
    /// Primal weights w = Σ αᵢ yᵢ xᵢ.
    Linear { w: Vec<f64> },
    Rbf {
        gamma: f64,
        support: Vec<SparseVec>,
        /// αᵢ yᵢ for each support vector.
        coef: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    pub weights: SvmWeights,
    pub rho: f64,
}

impl SvmModel {
    pub fn from_dual(vectors: &[SparseVec], labels: &[bool], dim: usize, kernel: Kernel, c: f64, sol: &DualSolution) -> SvmModel {
        let weights = match kernel {
            Kernel::Linear => {
                let mut w = vec![0.0; dim];
                for ((v, &l), &a) in vectors.iter().zip(labels).zip(&sol.alpha) {
                    if a == 0.0 {
                        continue;
                    }
                    let ay = if l { a } else { -a };
                    for (i, x) in v.iter() {
                        w[i as usize] += ay * x;
                    }
                }
                SvmWeights::Linear { w }
            }
            Kernel::Rbf { gamma } => {
                let mut support = Vec::new();
                let mut coef = Vec::new();
                for ((v, &l), &a) in vectors.iter().zip(labels).zip(&sol.alpha) {
                    if a > 0.0 {
                        support.push(v.clone());
                        coef.push(if l { a } else { -a });
                    }
                }
                SvmWeights::Rbf { gamma, support, coef }
            }
        };
        SvmModel { c, weights, rho: sol.rho }
    }

    pub fn kernel(&self) -> Kernel {
        match &self.weights {
            SvmWeights::Linear { .. } => Kernel::Linear,
            SvmWeights::Rbf { gamma, .. } => Kernel::Rbf { gamma: *gamma },
        }
    }

    pub fn decision(&self, x: &SparseVec) -> f64 {
        match &self.weights {
            SvmWeights::Linear { w } => x.dot_dense(w) - self.rho,
            SvmWeights::Rbf { gamma, support, coef } => {
                let sq = x.dot(x);
                let k = Kernel::Rbf { gamma: *gamma };
                support
                    .iter()
                    .zip(coef)
                    .map(|(s, c)| c * k.from_dot(s.dot(x), s.dot(s), sq))
                    .sum::<f64>()
                    - self.rho
            }
        }
    }

    /// Positive iff the decision value is ≥ 0; the score is the logistic of
    /// the decision value, for display only.
    pub fn predict(&self, x: &SparseVec) -> (bool, f64) {
        let d = self.decision(x);
        (d >= 0.0, sigmoid(d))
    }
}

pub fn train_svm(vectors: &[SparseVec], labels: &[bool], dim: usize, kernel: Kernel, c: f64) -> Result<SvmModel> {
    if vectors.len() != labels.len() {
        return Err(Error::Alignment {
            left: vectors.len(),
            right: labels.len(),
        });
    }
    if let Kernel::Rbf { gamma } = kernel {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidHyperParameter(format!("gamma must be positive, got {gamma}")));
        }
    }
    check_two_classes(labels)?;
    let gram = Gram::new(vectors);
    let sol = solve_dual(&gram.kernel_matrix(kernel), labels, c, KKT_TOL)?;
    Ok(SvmModel::from_dual(vectors, labels, dim, kernel, c, &sol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(pairs: &[(u32, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().copied())
    }

    #[test]
    fn kernel_values() {
        let k = Kernel::Rbf { gamma: 0.5 };
        // |a - b|^2 = 1 + 1 - 0 = 2
        assert!((k.from_dot(0.0, 1.0, 1.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(k.from_dot(1.0, 1.0, 1.0), 1.0);
        assert_eq!(Kernel::Linear.from_dot(3.0, 9.0, 9.0), 3.0);
    }

    #[test]
    fn separable_line_margin() {
        // Points at -1 and +1: max-margin boundary at 0 with w = 1.
        let xs = vec![sv(&[(0, -1.0)]), sv(&[(0, 1.0)])];
        let m = train_svm(&xs, &[false, true], 1, Kernel::Linear, 100.0).unwrap();
        let SvmWeights::Linear { w } = &m.weights else { panic!() };
        assert!((w[0] - 1.0).abs() < 1e-3, "{w:?}");
        assert!(m.rho.abs() < 1e-3);
    }

    #[test]
    fn dual_is_feasible() {
        let xs = vec![
            sv(&[(0, 1.0), (1, 2.0)]),
            sv(&[(0, 2.0)]),
            sv(&[(1, 1.0)]),
            sv(&[(0, -1.0), (1, 1.0)]),
            sv(&[(0, 0.5), (1, -1.0)]),
        ];
        let labels = [true, true, false, false, true];
        let gram = Gram::new(&xs);
        let c = 0.7;
        let sol = solve_dual(&gram.kernel_matrix(Kernel::Linear), &labels, c, KKT_TOL).unwrap();
        let balance: f64 = sol.alpha.iter().zip(&labels).map(|(a, &l)| if l { *a } else { -a }).sum();
        assert!(balance.abs() < 1e-9);
        assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        assert!(sol.converged);
    }
}
