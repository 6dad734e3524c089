//! Limited-memory quasi-Newton minimization with an optional L1 term
//! (orthant-wise, so L1-penalized coordinates can land exactly on zero).
//!
//! Minimizes `f(x) + l1 * Σ_{i in mask} |x_i|` where `f` is smooth.

use std::collections::VecDeque;

pub trait Objective {
    fn dim(&self) -> usize;

    /// Value of the smooth part at `x`; writes its gradient into `grad`.
    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64;
}

#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when (F_prev - F) / max(|F_prev|, |F|, 1) drops below this.
    pub rel_tol: f64,
    pub l1: f64,
    /// Coordinates subject to the L1 penalty; `None` means all.
    pub l1_mask: Option<Vec<bool>>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            memory: 10,
            max_iter: 1000,
            rel_tol: 1e-6,
            l1: 0.0,
            l1_mask: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// Full objective (smooth + L1) after each accepted iterate, starting
    /// with the initial point.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Penalty<'a> {
    l1: f64,
    mask: Option<&'a [bool]>,
}

impl Penalty<'_> {
    fn applies(&self, i: usize) -> bool {
        self.l1 > 0.0 && self.mask.is_none_or(|m| m[i])
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.l1 == 0.0 {
            return 0.0;
        }
        self.l1
            * x.iter()
                .enumerate()
                .filter(|(i, _)| self.applies(*i))
                .map(|(_, v)| v.abs())
                .sum::<f64>()
    }

    fn pseudo_gradient(&self, x: &[f64], g: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = if !self.applies(i) {
                g[i]
            } else if x[i] > 0.0 {
                g[i] + self.l1
            } else if x[i] < 0.0 {
                g[i] - self.l1
            } else if g[i] + self.l1 < 0.0 {
                g[i] + self.l1
            } else if g[i] - self.l1 > 0.0 {
                g[i] - self.l1
            } else {
                0.0
            };
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn minimize<O: Objective + ?Sized>(obj: &O, x0: Vec<f64>, cfg: &MinimizeConfig) -> (Vec<f64>, Trace) {
    let n = obj.dim();
    assert_eq!(x0.len(), n, "initial point has wrong dimension");
    let penalty = Penalty {
        l1: cfg.l1,
        mask: cfg.l1_mask.as_deref(),
    };

    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut f = obj.evaluate(&x, &mut g) + penalty.value(&x);
    let mut trace = Trace {
        objective: vec![f],
        ..Default::default()
    };
    if n == 0 {
        trace.converged = true;
        return (x, trace);
    }

    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut pg = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut xn = vec![0.0; n];
    let mut gn = vec![0.0; n];

    for iter in 0..cfg.max_iter {
        penalty.pseudo_gradient(&x, &g, &mut pg);
        let pg_norm = pg.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if pg_norm <= 1e-12 {
            trace.converged = true;
            break;
        }

        // Two-loop recursion: d = -H pg.
        d.copy_from_slice(&pg);
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        d.iter_mut().for_each(|v| *v = -*v);
        if cfg.l1 > 0.0 {
            for i in 0..n {
                if penalty.applies(i) && d[i] * pg[i] >= 0.0 {
                    d[i] = 0.0;
                }
            }
        }
        if dot(&d, &pg) >= 0.0 {
            history.clear();
            for i in 0..n {
                d[i] = -pg[i];
            }
        }

        let orthant: Vec<f64> = (0..n)
            .map(|i| if x[i] != 0.0 { x[i].signum() } else { -pg[i].signum() })
            .collect();
        let mut step = if history.is_empty() {
            1.0 / dot(&d, &d).sqrt().max(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
                if penalty.applies(i) && xn[i].signum() != orthant[i] {
                    xn[i] = 0.0;
                }
            }
            let fn_ = obj.evaluate(&xn, &mut gn) + penalty.value(&xn);
            let decrease: f64 = (0..n).map(|i| pg[i] * (xn[i] - x[i])).sum();
            if fn_.is_finite() && fn_ <= f + 1e-4 * decrease {
                accepted = Some(fn_);
                break;
            }
            step *= 0.5;
        }
        let Some(fn_) = accepted else {
            // No progress possible at working precision.
            trace.converged = true;
            break;
        };

        let s: Vec<f64> = (0..n).map(|i| xn[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }

        let rel = (f - fn_) / f.abs().max(fn_.abs()).max(1.0);
        std::mem::swap(&mut x, &mut xn);
        std::mem::swap(&mut g, &mut gn);
        f = fn_;
        trace.objective.push(f);
        trace.iterations = iter + 1;
        if rel < cfg.rel_tol {
            trace.converged = true;
            break;
        }
    }
    (x, trace)
}
