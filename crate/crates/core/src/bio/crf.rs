//! First-order linear-chain CRF over B/I/O with word-context features.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_valid_bio, Tag};
use crate::error::{Error, Result};
use crate::optim::{minimize, MinimizeConfig, Objective, Trace};

pub const MAX_ITER: usize = 300;
pub const REL_TOL: f64 = 1e-6;
pub const BOS: &str = "__BOS__";
pub const EOS: &str = "__EOS__";
const L: usize = 3;
const CHUNKS: usize = 32;

/// Attributes of the token at `pos`: bias, the word, and its neighbours.
pub fn extract_features(tokens: &[String], pos: usize) -> Vec<String> {
    let prev = if pos == 0 { BOS } else { tokens[pos - 1].as_str() };
    let next = tokens.get(pos + 1).map_or(EOS, String::as_str);
    vec![
        "bias".to_string(),
        format!("w0={}", tokens[pos]),
        format!("w-1={prev}"),
        format!("w+1={next}"),
    ]
}

type Emissions = Vec<[f64; L]>;
type Transitions = [[f64; L]; L];

fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Forward and backward log-potentials and log Z.
pub struct Lattice {
    pub alpha: Vec<[f64; L]>,
    pub beta: Vec<[f64; L]>,
    pub log_z: f64,
}

pub fn forward_backward(em: &[[f64; L]], tr: &Transitions) -> Lattice {
    let n = em.len();
    let mut alpha = vec![[0.0; L]; n];
    let mut beta = vec![[0.0; L]; n];
    if n == 0 {
        return Lattice { alpha, beta, log_z: 0.0 };
    }
    alpha[0] = em[0];
    for t in 1..n {
        for y in 0..L {
            let terms: [f64; L] = std::array::from_fn(|p| alpha[t - 1][p] + tr[p][y]);
            alpha[t][y] = em[t][y] + logsumexp(&terms);
        }
    }
    for t in (0..n - 1).rev() {
        for y in 0..L {
            let terms: [f64; L] = std::array::from_fn(|q| tr[y][q] + em[t + 1][q] + beta[t + 1][q]);
            beta[t][y] = logsumexp(&terms);
        }
    }
    let log_z = logsumexp(&alpha[n - 1]);
    Lattice { alpha, beta, log_z }
}

fn path_score_raw(em: &[[f64; L]], tr: &Transitions, path: &[usize]) -> f64 {
    let mut s = 0.0;
    for (t, &y) in path.iter().enumerate() {
        s += em[t][y];
        if t > 0 {
            s += tr[path[t - 1]][y];
        }
    }
    s
}

/// Highest-scoring path; among equal scores the lexicographically smallest
/// in B < I < O order, comparing earlier positions first.
fn viterbi_raw(em: &[[f64; L]], tr: &Transitions) -> Vec<usize> {
    let n = em.len();
    if n == 0 {
        return Vec::new();
    }
    // best[t][y]: max score of positions t.. given label y at t.
    let mut best = vec![[0.0; L]; n];
    best[n - 1] = em[n - 1];
    for t in (0..n - 1).rev() {
        for y in 0..L {
            let cont = (0..L).map(|q| tr[y][q] + best[t + 1][q]).fold(f64::NEG_INFINITY, f64::max);
            best[t][y] = em[t][y] + cont;
        }
    }
    let argmax_first = |vals: [f64; L]| {
        let mut k = 0;
        for y in 1..L {
            if vals[y] > vals[k] {
                k = y;
            }
        }
        k
    };
    let mut path = Vec::with_capacity(n);
    path.push(argmax_first(best[0]));
    for t in 1..n {
        let prev = path[t - 1];
        path.push(argmax_first(std::array::from_fn(|y| tr[prev][y] + best[t][y])));
    }
    path
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CrfRecord", try_from = "CrfRecord")]
pub struct CrfModel {
    /// Attribute strings in index order.
    pub attributes: Vec<String>,
    /// Row-major `attribute × label` state weights.
    pub state: Vec<f64>,
    /// `transitions[from][to]`.
    pub transitions: Transitions,
    pub c1: f64,
    pub c2: f64,
    index: HashMap<String, u32>,
}

/// Serialized form: non-zero (feature, label, weight) triples plus the
/// transition matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CrfRecord {
    c1: f64,
    c2: f64,
    attributes: Vec<String>,
    state_weights: Vec<(String, Tag, f64)>,
    transitions: Transitions,
}

impl From<CrfModel> for CrfRecord {
    fn from(m: CrfModel) -> CrfRecord {
        let mut state_weights = Vec::new();
        for (a, name) in m.attributes.iter().enumerate() {
            for tag in Tag::ALL {
                let w = m.state[a * L + tag.index()];
                if w != 0.0 {
                    state_weights.push((name.clone(), tag, w));
                }
            }
        }
        CrfRecord {
            c1: m.c1,
            c2: m.c2,
            attributes: m.attributes,
            state_weights,
            transitions: m.transitions,
        }
    }
}

impl TryFrom<CrfRecord> for CrfModel {
    type Error = Error;
    fn try_from(r: CrfRecord) -> Result<CrfModel> {
        let mut m = CrfModel::zeros(r.attributes, r.c1, r.c2);
        m.transitions = r.transitions;
        for (name, tag, w) in r.state_weights {
            let a = m
                .index
                .get(&name)
                .ok_or_else(|| Error::Validation(format!("weight for undeclared feature {name}")))?;
            m.state[*a as usize * L + tag.index()] = w;
        }
        Ok(m)
    }
}

impl CrfModel {
    pub fn zeros(attributes: Vec<String>, c1: f64, c2: f64) -> CrfModel {
        let index = attributes.iter().enumerate().map(|(i, a)| (a.clone(), i as u32)).collect();
        CrfModel {
            state: vec![0.0; attributes.len() * L],
            attributes,
            transitions: [[0.0; L]; L],
            c1,
            c2,
            index,
        }
    }

    pub fn n_params(&self) -> usize {
        self.state.len() + L * L
    }

    pub fn state_weight(&self, attribute: &str, tag: Tag) -> f64 {
        self.index
            .get(attribute)
            .map_or(0.0, |&a| self.state[a as usize * L + tag.index()])
    }

    /// Known attribute ids at each position; unseen attributes are dropped.
    fn compile(&self, tokens: &[String]) -> Vec<Vec<u32>> {
        (0..tokens.len())
            .map(|t| {
                extract_features(tokens, t)
                    .iter()
                    .filter_map(|a| self.index.get(a).copied())
                    .collect()
            })
            .collect()
    }

    pub fn emissions(&self, tokens: &[String]) -> Emissions {
        emissions_from(&self.compile(tokens), &self.state)
    }

    pub fn log_partition(&self, tokens: &[String]) -> f64 {
        forward_backward(&self.emissions(tokens), &self.transitions).log_z
    }

    pub fn path_score(&self, tokens: &[String], labels: &[Tag]) -> f64 {
        let path: Vec<usize> = labels.iter().map(|t| t.index()).collect();
        path_score_raw(&self.emissions(tokens), &self.transitions, &path)
    }

    /// Per-position label marginals.
    pub fn marginals(&self, tokens: &[String]) -> Vec<[f64; L]> {
        let em = self.emissions(tokens);
        let lat = forward_backward(&em, &self.transitions);
        (0..em.len())
            .map(|t| std::array::from_fn(|y| (lat.alpha[t][y] + lat.beta[t][y] - lat.log_z).exp()))
            .collect()
    }

    pub fn viterbi(&self, tokens: &[String]) -> Vec<Tag> {
        viterbi_raw(&self.emissions(tokens), &self.transitions)
            .into_iter()
            .map(Tag::from_index)
            .collect()
    }

    fn params(&self) -> Vec<f64> {
        let mut x = self.state.clone();
        x.extend(self.transitions.iter().flatten());
        x
    }

    fn set_params(&mut self, x: &[f64]) {
        let n = self.state.len();
        self.state.copy_from_slice(&x[..n]);
        for (k, v) in x[n..].iter().enumerate() {
            self.transitions[k / L][k % L] = *v;
        }
    }
}

fn emissions_from(attrs: &[Vec<u32>], state: &[f64]) -> Emissions {
    attrs
        .iter()
        .map(|ids| {
            let mut e = [0.0; L];
            for &a in ids {
                for (y, ey) in e.iter_mut().enumerate() {
                    *ey += state[a as usize * L + y];
                }
            }
            e
        })
        .collect()
}

struct Compiled {
    attrs: Vec<Vec<u32>>,
    gold: Vec<usize>,
}

/// Negative log-likelihood plus c2‖w‖²; the L1 term is left to the
/// optimizer. Parameters are the state weights followed by the row-major
/// transition matrix.
pub struct CrfObjective {
    seqs: Vec<Compiled>,
    n_state: usize,
    c2: f64,
}

impl CrfObjective {
    pub fn new(model: &CrfModel, sequences: &[(Vec<String>, Vec<Tag>)]) -> CrfObjective {
        let seqs = sequences
            .iter()
            .map(|(toks, tags)| Compiled {
                attrs: model.compile(toks),
                gold: tags.iter().map(|t| t.index()).collect(),
            })
            .collect();
        CrfObjective {
            seqs,
            n_state: model.state.len(),
            c2: model.c2,
        }
    }

    fn accumulate(&self, seqs: &[Compiled], x: &[f64], grad: &mut [f64]) -> f64 {
        let (state, trv) = x.split_at(self.n_state);
        let tr: Transitions = std::array::from_fn(|a| std::array::from_fn(|b| trv[a * L + b]));
        let (gs, gt) = grad.split_at_mut(self.n_state);
        let mut f = 0.0;
        for s in seqs {
            let em = emissions_from(&s.attrs, state);
            let lat = forward_backward(&em, &tr);
            f += lat.log_z - path_score_raw(&em, &tr, &s.gold);
            for t in 0..em.len() {
                let p: [f64; L] = std::array::from_fn(|y| (lat.alpha[t][y] + lat.beta[t][y] - lat.log_z).exp());
                for &a in &s.attrs[t] {
                    let base = a as usize * L;
                    for y in 0..L {
                        gs[base + y] += p[y];
                    }
                    gs[base + s.gold[t]] -= 1.0;
                }
                if t > 0 {
                    for a in 0..L {
                        for b in 0..L {
                            let lp = lat.alpha[t - 1][a] + tr[a][b] + em[t][b] + lat.beta[t][b] - lat.log_z;
                            gt[a * L + b] += lp.exp();
                        }
                    }
                    gt[s.gold[t - 1] * L + s.gold[t]] -= 1.0;
                }
            }
        }
        f
    }
}

impl Objective for CrfObjective {
    fn dim(&self) -> usize {
        self.n_state + L * L
    }

    fn evaluate(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let chunk = self.seqs.len().div_ceil(CHUNKS).max(1);
        // Fixed chunking and in-order summation keep results independent of
        // the thread count.
        let parts: Vec<(f64, Vec<f64>)> = self
            .seqs
            .par_chunks(chunk)
            .map(|seqs| {
                let mut g = vec![0.0; x.len()];
                let f = self.accumulate(seqs, x, &mut g);
                (f, g)
            })
            .collect();
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for (pf, pg) in parts {
            f += pf;
            for (g, v) in grad.iter_mut().zip(pg) {
                *g += v;
            }
        }
        for (g, &w) in grad.iter_mut().zip(x) {
            f += self.c2 * w * w;
            *g += 2.0 * self.c2 * w;
        }
        f
    }
}

fn check_penalty(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidHyperParameter(format!("{name} must be non-negative, got {v}")));
    }
    Ok(())
}

/// Attribute dictionary of a training set, in first-seen order.
fn collect_attributes(sequences: &[(Vec<String>, Vec<Tag>)]) -> Vec<String> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for (toks, _) in sequences {
        for t in 0..toks.len() {
            for a in extract_features(toks, t) {
                if !seen.contains_key(&a) {
                    seen.insert(a.clone(), ());
                    out.push(a);
                }
            }
        }
    }
    out
}

pub fn train_crf(sequences: &[(Vec<String>, Vec<Tag>)], c1: f64, c2: f64) -> Result<CrfModel> {
    train_crf_traced(sequences, c1, c2).map(|(m, _)| m)
}

pub fn train_crf_traced(sequences: &[(Vec<String>, Vec<Tag>)], c1: f64, c2: f64) -> Result<(CrfModel, Trace)> {
    check_penalty("c1", c1)?;
    check_penalty("c2", c2)?;
    if sequences.is_empty() {
        return Err(Error::EmptySequence);
    }
    for (i, (toks, tags)) in sequences.iter().enumerate() {
        if toks.is_empty() {
            return Err(Error::EmptySequence);
        }
        if toks.len() != tags.len() {
            return Err(Error::Alignment {
                left: toks.len(),
                right: tags.len(),
            });
        }
        if !is_valid_bio(tags) {
            return Err(Error::InvalidLabel(format!("sequence {i} has I after O or at the start")));
        }
    }
    let mut model = CrfModel::zeros(collect_attributes(sequences), c1, c2);
    let obj = CrfObjective::new(&model, sequences);
    let cfg = MinimizeConfig {
        max_iter: MAX_ITER,
        rel_tol: REL_TOL,
        l1: c1,
        ..Default::default()
    };
    let (x, trace) = minimize(&obj, model.params(), &cfg);
    model.set_params(&x);
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use Tag::*;

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn feature_template() {
        let t = toks(&["a", "b", "c"]);
        assert_eq!(extract_features(&t, 1), ["bias", "w0=b", "w-1=a", "w+1=c"]);
        assert_eq!(extract_features(&t, 0), ["bias", "w0=a", "w-1=__BOS__", "w+1=b"]);
        assert_eq!(extract_features(&toks(&["a"]), 0), ["bias", "w0=a", "w-1=__BOS__", "w+1=__EOS__"]);
    }

    #[test]
    fn zero_model_ties_to_b() {
        let m = CrfModel::zeros(vec!["bias".into()], 0.0, 0.0);
        assert_eq!(m.viterbi(&toks(&["x", "y", "z"])), [B, B, B]);
        let lz = m.log_partition(&toks(&["x", "y", "z"]));
        assert!((lz - 27f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn forbidden_transition_never_decoded() {
        let mut m = CrfModel::zeros(vec!["bias".into()], 0.0, 0.0);
        m.transitions[O.index()][I.index()] = -1e6;
        m.state[I.index()] = 1.0;
        m.state[O.index()] = 0.5;
        let path = m.viterbi(&toks(&["a", "b", "c", "d"]));
        assert!(path.windows(2).all(|w| !(w[0] == O && w[1] == I)), "{path:?}");
    }

    #[test]
    fn random_marginals_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq = toks(&["a", "b", "a", "c", "b"]);
        let mut m = CrfModel::zeros(collect_attributes(&[(seq.clone(), vec![O; 5])]), 0.0, 0.0);
        m.state.iter_mut().for_each(|w| *w = rng.random_range(-2.0..2.0));
        for row in &mut m.transitions {
            row.iter_mut().for_each(|w| *w = rng.random_range(-2.0..2.0));
        }
        for p in m.marginals(&seq) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn single_observed_label_wins() {
        let data = vec![(toks(&["a", "b", "c"]), vec![O, O, O])];
        let m = train_crf(&data, 0.0, 0.0).unwrap();
        assert_eq!(m.viterbi(&data[0].0), [O, O, O]);
    }

    #[test]
    fn memorizes_unambiguous_pattern() {
        let data = vec![
            (toks(&["option", "x"]), vec![B, O]),
            (toks(&["y", "option"]), vec![O, B]),
            (toks(&["x", "y"]), vec![O, O]),
        ];
        let m = train_crf(&data, 0.0, 0.01).unwrap();
        assert_eq!(m.viterbi(&toks(&["option", "x"])), [B, O]);
    }

    #[test]
    fn rejects_invalid_bio() {
        let data = vec![(toks(&["a", "b"]), vec![O, I])];
        assert!(matches!(train_crf(&data, 0.0, 0.0), Err(Error::InvalidLabel(_))));
        assert!(matches!(train_crf(&[], 0.0, 0.0), Err(Error::EmptySequence)));
        let ok = vec![(toks(&["a"]), vec![O])];
        assert!(matches!(train_crf(&ok, -1.0, 0.0), Err(Error::InvalidHyperParameter(_))));
    }

    #[test]
    fn serde_round_trip() {
        let data = vec![(toks(&["option", "x"]), vec![B, O]), (toks(&["x", "y"]), vec![O, O])];
        let m = train_crf(&data, 0.1, 0.01).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: CrfModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.viterbi(&toks(&["option", "y"])), m.viterbi(&toks(&["option", "y"])));
    }
}
