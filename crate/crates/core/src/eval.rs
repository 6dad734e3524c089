//! Confusion counts, P/R/F1, normal-approximation intervals, the interval
//! significance rule and Cohen's kappa.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }
}

pub fn confusion(predictions: &[bool], gold: &[bool]) -> Result<Confusion> {
    if predictions.len() != gold.len() {
        return Err(Error::Alignment {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    let mut c = Confusion::default();
    for (&p, &g) in predictions.iter().zip(gold) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Percentages; any 0/0 is reported as 0 and sets `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

pub fn prf(c: &Confusion) -> Prf {
    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    let f = if p + r == 0.0 {
        degenerate = true;
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    Prf {
        precision: 100.0 * p,
        recall: 100.0 * r,
        f1: 100.0 * f,
        degenerate,
    }
}

/// One decimal, halves away from zero.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Unrounded 95% half-width in percentage points.
pub fn f1_ci_exact(f1_percent: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::UndefinedInterval("no evaluated paragraphs".into()));
    }
    if !(0.0..=100.0).contains(&f1_percent) {
        return Err(Error::UndefinedInterval(format!("F1 {f1_percent} outside [0, 100]")));
    }
    let f = f1_percent / 100.0;
    Ok(100.0 * Z95 * (f * (1.0 - f) / n as f64).sqrt())
}

/// Half-width rounded to one decimal.
pub fn f1_ci(f1_percent: f64, n: usize) -> Result<f64> {
    f1_ci_exact(f1_percent, n).map(round1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub ci_half_width: f64,
    pub n: usize,
    pub confusion: Confusion,
    pub degenerate: bool,
}

impl EvalReport {
    pub fn from_confusion(confusion: Confusion) -> Result<EvalReport> {
        let m = prf(&confusion);
        let n = confusion.total();
        Ok(EvalReport {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            ci_half_width: f1_ci_exact(m.f1, n)?,
            n,
            confusion,
            degenerate: m.degenerate,
        })
    }

    pub fn evaluate(predictions: &[bool], gold: &[bool]) -> Result<EvalReport> {
        EvalReport::from_confusion(confusion(predictions, gold)?)
    }

    /// (P, R, F1, ±) as printed: one decimal each.
    pub fn rounded(&self) -> (f64, f64, f64, f64) {
        (
            round1(self.precision),
            round1(self.recall),
            round1(self.f1),
            round1(self.ci_half_width),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Significance {
    /// Each F1 lies outside the other's interval.
    pub significant: bool,
    /// How `other` compares with the reference.
    pub direction: Direction,
    /// The decision flips between printed and unrounded values.
    pub marginal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Higher,
    Lower,
    Equal,
}

fn disjoint(f_a: f64, ci_a: f64, f_b: f64, ci_b: f64) -> bool {
    let d = (f_a - f_b).abs();
    d > ci_a && d > ci_b
}

/// Interval-disjointness test of `other` against `reference`, decided on the
/// printed (one-decimal) values.
pub fn significance_vs(reference: &EvalReport, other: &EvalReport) -> Result<Significance> {
    if reference.n != other.n {
        return Err(Error::Comparison(format!(
            "reports cover {} and {} paragraphs",
            reference.n, other.n
        )));
    }
    let (_, _, fa, ca) = reference.rounded();
    let (_, _, fb, cb) = other.rounded();
    let printed = disjoint(fa, ca, fb, cb);
    let exact = disjoint(reference.f1, reference.ci_half_width, other.f1, other.ci_half_width);
    let direction = match fb.partial_cmp(&fa) {
        Some(Ordering::Greater) => Direction::Higher,
        Some(Ordering::Less) => Direction::Lower,
        _ => Direction::Equal,
    };
    Ok(Significance {
        significant: printed,
        direction,
        marginal: printed != exact,
    })
}

/// Cohen's kappa over any finite label set.
pub fn cohens_kappa<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Alignment {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::UndefinedKappa("no paired labels".into()));
    }
    let n = a.len() as f64;
    let mut ma: BTreeMap<T, usize> = BTreeMap::new();
    let mut mb: BTreeMap<T, usize> = BTreeMap::new();
    let mut agree = 0usize;
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x.clone()).or_default() += 1;
        *mb.entry(y.clone()).or_default() += 1;
        if x == y {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = ma
        .iter()
        .map(|(k, &ca)| ca as f64 * mb.get(k).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    kappa_value(p_o, p_e)
}

fn kappa_value(p_o: f64, p_e: f64) -> Result<f64> {
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(Error::UndefinedKappa("expected agreement is 1".into()));
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Kappa from a 2×2 agreement table: both positive, first rater only,
/// second rater only, both negative.
pub fn kappa_from_counts(both_pos: usize, first_only: usize, second_only: usize, both_neg: usize) -> Result<f64> {
    let n = (both_pos + first_only + second_only + both_neg) as f64;
    if n == 0.0 {
        return Err(Error::UndefinedKappa("empty table".into()));
    }
    let a_pos = (both_pos + first_only) as f64;
    let b_pos = (both_pos + second_only) as f64;
    let p_o = (both_pos + both_neg) as f64 / n;
    let p_e = (a_pos * b_pos + (n - a_pos) * (n - b_pos)) / (n * n);
    kappa_value(p_o, p_e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn confusion_counts() {
        let c = confusion(&[true, true, false], &[true, false, false]).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 1, 0, 1));
        assert_eq!(confusion(&[], &[]).unwrap(), Confusion::default());
        assert!(matches!(confusion(&[true], &[]), Err(Error::Alignment { .. })));
    }

    #[test]
    fn all_ones_on_leftmost_test_set() {
        let c = Confusion {
            tp: 743,
            fp: 1528,
            fn_: 0,
            tn: 0,
        };
        let r = EvalReport::from_confusion(c).unwrap();
        assert_eq!(r.rounded(), (32.7, 100.0, 49.3, 2.1));
    }

    #[test]
    fn degenerate_prf() {
        let m = prf(&Confusion::default());
        assert!(m.degenerate);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        let m = prf(&Confusion {
            tp: 3,
            fp: 1,
            fn_: 1,
            tn: 0,
        });
        assert_relative_eq!(m.f1, 75.0, epsilon = 1e-12);
        assert!(!m.degenerate);
    }

    #[test]
    fn interval_anchors() {
        assert_eq!(f1_ci(49.3, 2271).unwrap(), 2.1);
        assert_eq!(f1_ci(38.7, 466).unwrap(), 4.4);
        assert_eq!(f1_ci(0.0, 10).unwrap(), 0.0);
        assert_eq!(f1_ci(100.0, 10).unwrap(), 0.0);
        assert!(matches!(f1_ci(50.0, 0), Err(Error::UndefinedInterval(_))));
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round1(0.25), 0.3);
        assert_eq!(round1(-0.25), -0.3);
        assert_eq!(round1(49.349), 49.3);
    }

    fn report(f1: f64, ci: f64, n: usize) -> EvalReport {
        EvalReport {
            precision: f1,
            recall: f1,
            f1,
            ci_half_width: ci,
            n,
            confusion: Confusion::default(),
            degenerate: false,
        }
    }

    #[test]
    fn significance_rule() {
        let base = report(49.3, 2.1, 2271);
        let lr = report(70.3, 1.9, 2271);
        let s = significance_vs(&base, &lr).unwrap();
        assert!(s.significant);
        assert_eq!(s.direction, Direction::Higher);

        let kw = report(39.9, 2.0, 2271);
        let s = significance_vs(&base, &kw).unwrap();
        assert!(s.significant);
        assert_eq!(s.direction, Direction::Lower);

        assert!(!significance_vs(&base, &base).unwrap().significant);
        assert!(matches!(significance_vs(&base, &report(50.0, 2.0, 10)), Err(Error::Comparison(_))));
    }

    #[test]
    fn kappa() {
        let k = kappa_from_counts(212, 69, 6, 160).unwrap();
        assert_relative_eq!(k, 0.666_540_676_566_836, epsilon = 1e-12);
        assert_eq!((k * 100.0).round() / 100.0, 0.67);
        assert_eq!(kappa_from_counts(100, 100, 0, 0).unwrap(), 0.0);
        assert!(matches!(kappa_from_counts(5, 0, 0, 0), Err(Error::UndefinedKappa(_))));
        let x = [true, false, true, true];
        assert_eq!(cohens_kappa(&x, &x).unwrap(), 1.0);
    }
}
