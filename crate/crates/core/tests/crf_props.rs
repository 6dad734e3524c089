//! CRF inference against exhaustive enumeration, gradient checks and the
//! paragraph/BIO mapping.

use delib_core::bio::crf::{forward_backward, CrfObjective};
use delib_core::bio::{
    bio_to_paragraph, extract_features, paragraphs_to_bio, train_crf, CrfModel, OverlapThreshold, Tag,
};
use delib_core::optim::Objective;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: [&str; 4] = ["alpha", "beta", "gamma", "delta"];

fn random_model(rng: &mut ChaCha8Rng, scale: f64) -> CrfModel {
    let mut attrs = vec!["bias".to_string()];
    for w in WORDS {
        attrs.push(format!("w0={w}"));
        attrs.push(format!("w-1={w}"));
        attrs.push(format!("w+1={w}"));
    }
    attrs.push("w-1=__BOS__".into());
    attrs.push("w+1=__EOS__".into());
    let mut m = CrfModel::zeros(attrs, 0.0, 0.0);
    for w in m.state.iter_mut() {
        *w = rng.random_range(-scale..scale);
    }
    for row in m.transitions.iter_mut() {
        for w in row.iter_mut() {
            *w = rng.random_range(-scale..scale);
        }
    }
    m
}

fn random_tokens(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| WORDS[rng.random_range(0..WORDS.len())].to_string()).collect()
}

/// Every label path of length `n` in lexicographic order.
fn all_paths(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..3).map(move |y| {
                    let mut q = p.clone();
                    q.push(y);
                    q
                })
            })
            .collect();
    }
    out
}

/// Emission scores summed directly from the feature template.
fn direct_emissions(m: &CrfModel, tokens: &[String]) -> Vec<[f64; 3]> {
    (0..tokens.len())
        .map(|t| {
            let feats = extract_features(tokens, t);
            std::array::from_fn(|y| feats.iter().map(|a| m.state_weight(a, Tag::from_index(y))).sum())
        })
        .collect()
}

fn score(em: &[[f64; 3]], tr: &[[f64; 3]; 3], path: &[usize]) -> f64 {
    let mut s = 0.0;
    for (t, &y) in path.iter().enumerate() {
        s += em[t][y];
        if t > 0 {
            s += tr[path[t - 1]][y];
        }
    }
    s
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[test]
fn inference_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..200 {
        let m = random_model(&mut rng, 2.0);
        let n = rng.random_range(1..=8);
        let tokens = random_tokens(&mut rng, n);
        let em = direct_emissions(&m, &tokens);
        let model_em = m.emissions(&tokens);
        for (a, b) in em.iter().zip(&model_em) {
            for y in 0..3 {
                assert!((a[y] - b[y]).abs() < 1e-12, "case {case}: emissions differ");
            }
        }

        let paths = all_paths(n);
        let scores: Vec<f64> = paths.iter().map(|p| score(&em, &m.transitions, p)).collect();
        let log_z = log_sum_exp(&scores);
        let got = m.log_partition(&tokens);
        assert!(((got - log_z) / log_z.abs().max(1.0)).abs() < 1e-8, "case {case}: {got} vs {log_z}");

        let best = scores
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &s)| if s > acc.1 { (i, s) } else { acc });
        let vit: Vec<usize> = m.viterbi(&tokens).iter().map(|t| t.index()).collect();
        assert_eq!(vit, paths[best.0], "case {case}: argmax differs");

        let marg = m.marginals(&tokens);
        for t in 0..n {
            for y in 0..3 {
                let mass: Vec<f64> = paths
                    .iter()
                    .zip(&scores)
                    .filter(|(p, _)| p[t] == y)
                    .map(|(_, &s)| s)
                    .collect();
                let want = (log_sum_exp(&mass) - log_z).exp();
                assert!((marg[t][y] - want).abs() < 1e-8, "case {case}: marginal ({t},{y})");
            }
        }

        let lat = forward_backward(&em, &m.transitions);
        let from_beta = log_sum_exp(&[em[0][0] + lat.beta[0][0], em[0][1] + lat.beta[0][1], em[0][2] + lat.beta[0][2]]);
        assert!((from_beta - log_z).abs() < 1e-8 * log_z.abs().max(1.0));
    }
}

fn tags(ix: &[usize]) -> Vec<Tag> {
    ix.iter().map(|&i| Tag::from_index(i)).collect()
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let base = random_model(&mut rng, 1.0);
    let seqs = vec![
        (random_tokens(&mut rng, 5), tags(&[0, 1, 1, 2, 0])),
        (random_tokens(&mut rng, 3), tags(&[2, 2, 0])),
        (random_tokens(&mut rng, 6), tags(&[0, 2, 0, 1, 1, 1])),
    ];
    for c2 in [0.0, 0.5] {
        let mut m = base.clone();
        m.c2 = c2;
        let obj = CrfObjective::new(&m, &seqs);
        for _ in 0..5 {
            let x: Vec<f64> = (0..obj.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut g = vec![0.0; obj.dim()];
            obj.evaluate(&x, &mut g);
            let h = 1e-6;
            let mut scratch = vec![0.0; obj.dim()];
            for i in 0..obj.dim() {
                let mut xp = x.clone();
                xp[i] += h;
                let fp = obj.evaluate(&xp, &mut scratch);
                xp[i] -= 2.0 * h;
                let fm = obj.evaluate(&xp, &mut scratch);
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-4, "param {i}: analytic {} numeric {fd}", g[i]);
            }
        }
    }
}

fn training_set() -> Vec<(Vec<String>, Vec<Tag>)> {
    let t = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    vec![
        (t("we suggest another option here"), tags(&[0, 1, 1, 1, 1])),
        (t("meeting is at noon"), tags(&[2, 2, 2, 2])),
        (t("the memo is attached we suggest waiting"), tags(&[2, 2, 2, 2, 0, 1, 1])),
    ]
}

#[test]
fn huge_l1_zeroes_every_weight() {
    let m = train_crf(&training_set(), 1e6, 0.0).unwrap();
    assert!(m.state.iter().all(|&w| w == 0.0));
    assert!(m.transitions.iter().flatten().all(|&w| w == 0.0));
}

#[test]
fn objective_never_increases() {
    let (_, trace) = delib_core::bio::crf::train_crf_traced(&training_set(), 0.1, 0.1).unwrap();
    for w in trace.objective.windows(2) {
        assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
    }
}

proptest! {
    #[test]
    fn full_overlap_recovers_paragraph_labels(
        paras in prop::collection::vec((1usize..6, any::<bool>()), 1..12)
    ) {
        let tokens: Vec<Vec<String>> = paras
            .iter()
            .enumerate()
            .map(|(p, (n, _))| (0..*n).map(|k| format!("p{p}t{k}")).collect())
            .collect();
        let labels: Vec<bool> = paras.iter().map(|(_, l)| *l).collect();
        let seq = paragraphs_to_bio(&tokens, &labels).unwrap();
        prop_assert!(delib_core::bio::is_valid_bio(&seq.labels));
        for th in [100u8, 50, 10] {
            let back = bio_to_paragraph(&seq.labels, &seq.paragraph_spans, OverlapThreshold::new(th).unwrap()).unwrap();
            prop_assert_eq!(&back, &labels);
        }
    }
}
