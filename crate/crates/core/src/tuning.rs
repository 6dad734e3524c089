//! Stratified validation split and exhaustive grid search.
//!
//! Points that differ only in a decision threshold (LR probability
//! threshold, BIO overlap) share one trained model; the log still holds one
//! row per grid point in enumeration order.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bio::tagger::{privileged_percentages, train_tagger_crf};
use crate::bio::{meets_overlap, BioParams, OverlapThreshold};
use crate::classifiers::{solve_dual, train_lr, Gram, Kernel, SvmModel};
use crate::classifiers::svm::KKT_TOL;
use crate::corpus::DataSet;
use crate::error::{Error, Result};
use crate::eval::{confusion, prf};
use crate::features::{FeatureVector, Stemmer, TokenizerConfig, Vocabulary};
use crate::model::{Family, HyperParams, LrParams, Model, SvmParams};

pub const DEFAULT_VALIDATION_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrGrid {
    pub use_idf: Vec<bool>,
    pub stemmer: Vec<Stemmer>,
    pub c: Vec<f64>,
    pub threshold: Vec<f64>,
}

/// The kernel axis lists `linear` once and `rbf` once per gamma, since
/// gamma only applies to rbf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmGrid {
    pub use_idf: Vec<bool>,
    pub stemmer: Vec<Stemmer>,
    pub c: Vec<f64>,
    pub kernel: Vec<Kernel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BioGrid {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub overlap: Vec<OverlapThreshold>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ParamGrid {
    Lr(LrGrid),
    Svm(SvmGrid),
    Bio(BioGrid),
    Fixed(HyperParams),
}

const PENALTIES: [f64; 5] = [0.01, 0.1, 1.0, 5.0, 10.0];

impl ParamGrid {
    pub fn default_for(family: Family) -> ParamGrid {
        match family {
            Family::Lr => ParamGrid::Lr(LrGrid {
                use_idf: vec![false, true],
                stemmer: vec![Stemmer::None, Stemmer::Porter],
                c: PENALTIES.to_vec(),
                threshold: (1..=10).map(|k| f64::from(k) / 10.0).collect(),
            }),
            Family::Svm => {
                let mut kernel = vec![Kernel::Linear];
                kernel.extend([1.0, 0.1, 0.01, 0.001, 0.0001].map(|gamma| Kernel::Rbf { gamma }));
                ParamGrid::Svm(SvmGrid {
                    use_idf: vec![false, true],
                    stemmer: vec![Stemmer::None, Stemmer::Porter],
                    c: PENALTIES.to_vec(),
                    kernel,
                })
            }
            Family::Bio => ParamGrid::Bio(BioGrid {
                c1: PENALTIES.to_vec(),
                c2: PENALTIES.to_vec(),
                overlap: OverlapThreshold::all(),
            }),
            Family::Keyword => ParamGrid::Fixed(HyperParams::Keyword),
            Family::AllOnes => ParamGrid::Fixed(HyperParams::AllOnes),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            ParamGrid::Lr(_) => Family::Lr,
            ParamGrid::Svm(_) => Family::Svm,
            ParamGrid::Bio(_) => Family::Bio,
            ParamGrid::Fixed(p) => p.family(),
        }
    }

    /// Every grid point, last axis varying fastest.
    pub fn points(&self) -> Vec<HyperParams> {
        let mut out = Vec::new();
        match self {
            ParamGrid::Lr(g) => {
                for &use_idf in &g.use_idf {
                    for &stemmer in &g.stemmer {
                        for &c in &g.c {
                            for &threshold in &g.threshold {
                                out.push(HyperParams::Lr(LrParams {
                                    use_idf,
                                    stemmer,
                                    c,
                                    threshold,
                                }));
                            }
                        }
                    }
                }
            }
            ParamGrid::Svm(g) => {
                for &use_idf in &g.use_idf {
                    for &stemmer in &g.stemmer {
                        for &c in &g.c {
                            for &kernel in &g.kernel {
                                out.push(HyperParams::Svm(SvmParams {
                                    use_idf,
                                    stemmer,
                                    c,
                                    kernel,
                                }));
                            }
                        }
                    }
                }
            }
            ParamGrid::Bio(g) => {
                for &c1 in &g.c1 {
                    for &c2 in &g.c2 {
                        for &overlap in &g.overlap {
                            out.push(HyperParams::Bio(BioParams { c1, c2, overlap }));
                        }
                    }
                }
            }
            ParamGrid::Fixed(p) => out.push(*p),
        }
        out
    }

    pub fn len(&self) -> usize {
        match self {
            ParamGrid::Lr(g) => g.use_idf.len() * g.stemmer.len() * g.c.len() * g.threshold.len(),
            ParamGrid::Svm(g) => g.use_idf.len() * g.stemmer.len() * g.c.len() * g.kernel.len(),
            ParamGrid::Bio(g) => g.c1.len() * g.c2.len() * g.overlap.len(),
            ParamGrid::Fixed(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Index split: each class contributes round(fraction · class size) examples
/// to validation, clamped so both halves keep at least one of each class.
pub fn split_indices(labels: &[bool], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Stratification(format!(
            "validation fraction must be strictly between 0 and 1, got {fraction}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {} has {} examples; at least 2 are needed",
                u8::from(class),
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        let k = ((fraction * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

/// Stratified (train, validation) split; both halves keep corpus order.
pub fn split_train_validation(data: &DataSet, fraction: f64, seed: u64) -> Result<(DataSet, DataSet)> {
    let (tr, va) = split_indices(&data.labels(), fraction, seed)?;
    Ok((data.subset(&tr), data.subset(&va)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub params: HyperParams,
    pub f1: f64,
    /// Set when the point failed to train; its F1 is then 0.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub best_params: HyperParams,
    pub best_validation_f1: f64,
    pub log: Vec<GridEntry>,
}

impl TuningResult {
    fn from_log(log: Vec<GridEntry>) -> Result<TuningResult> {
        let mut best: Option<&GridEntry> = None;
        for e in &log {
            if best.is_none_or(|b| e.f1 > b.f1) {
                best = Some(e);
            }
        }
        let best = best.ok_or_else(|| Error::Config("empty parameter grid".into()))?;
        Ok(TuningResult {
            best_params: best.params,
            best_validation_f1: best.f1,
            log: log.clone(),
        })
    }

    /// Tab-separated grid log: one column per axis, then F1 and any error.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let axes = self.best_params.axes();
        let header: Vec<&str> = axes.iter().map(|(k, _)| *k).collect();
        writeln!(w, "{}\tvalidation_f1\terror", header.join("\t"))?;
        for e in &self.log {
            let vals: Vec<String> = e.params.axes().into_iter().map(|(_, v)| v).collect();
            let err = e.error.as_deref().unwrap_or("").replace(['\t', '\n'], " ");
            writeln!(w, "{}\t{:.6}\t{}", vals.join("\t"), e.f1, err)?;
        }
        Ok(())
    }
}

fn f1_of(predictions: &[bool], gold: &[bool]) -> f64 {
    confusion(predictions, gold).map(|c| prf(&c).f1).unwrap_or(0.0)
}

fn entry(params: HyperParams, outcome: &std::result::Result<f64, String>) -> GridEntry {
    match outcome {
        Ok(f1) => GridEntry {
            params,
            f1: *f1,
            error: None,
        },
        Err(e) => GridEntry {
            params,
            f1: 0.0,
            error: Some(e.clone()),
        },
    }
}

struct Featurized {
    vocab: Vocabulary,
    train: Vec<FeatureVector>,
    val: Vec<FeatureVector>,
}

fn featurize(train: &DataSet, val: &DataSet, use_idf: bool, stemmer: Stemmer) -> Result<Featurized> {
    let vocab = Vocabulary::build(&train.texts(), TokenizerConfig::new(stemmer), use_idf)?;
    Ok(Featurized {
        train: vocab.vectorize_all(&train.texts()),
        val: vocab.vectorize_all(&val.texts()),
        vocab,
    })
}

/// Trains one model per distinct training configuration on `train`, scores
/// every grid point by validation F1, and returns the earliest maximizer.
pub fn grid_search(grid: &ParamGrid, train: &DataSet, validation: &DataSet) -> Result<TuningResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    if validation.is_empty() {
        return Err(Error::Stratification("validation set is empty".into()));
    }
    let gold = validation.labels();
    let log = match grid {
        ParamGrid::Lr(g) => lr_search(g, train, validation, &gold),
        ParamGrid::Svm(g) => svm_search(g, train, validation, &gold),
        ParamGrid::Bio(g) => bio_search(g, train, validation, &gold),
        ParamGrid::Fixed(p) => {
            let outcome = Model::train(p, train)
                .map(|m| f1_of(&m.predict_labels(validation), &gold))
                .map_err(|e| e.to_string());
            vec![entry(*p, &outcome)]
        }
    };
    TuningResult::from_log(log)
}

fn lr_search(g: &LrGrid, train: &DataSet, val: &DataSet, gold: &[bool]) -> Vec<GridEntry> {
    let groups: Vec<(bool, Stemmer)> = g
        .use_idf
        .iter()
        .flat_map(|&u| g.stemmer.iter().map(move |&s| (u, s)))
        .collect();
    let feats: Vec<Result<Featurized>> = groups
        .par_iter()
        .map(|&(u, s)| featurize(train, val, u, s))
        .collect();
    let tasks: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|gi| (0..g.c.len()).map(move |ci| (gi, ci)))
        .collect();
    let labels = train.labels();
    // Validation probabilities per (group, C).
    let probs: Vec<std::result::Result<Vec<f64>, String>> = tasks
        .par_iter()
        .map(|&(gi, ci)| {
            let f = feats[gi].as_ref().map_err(|e| e.to_string())?;
            let m = train_lr(&f.train, &labels, f.vocab.len(), g.c[ci], 0.5).map_err(|e| e.to_string())?;
            Ok(f.val.iter().map(|x| m.probability(x)).collect())
        })
        .collect();
    let mut log = Vec::with_capacity(tasks.len() * g.threshold.len());
    for (&(gi, ci), p) in tasks.iter().zip(&probs) {
        let (use_idf, stemmer) = groups[gi];
        for &threshold in &g.threshold {
            let outcome = p.as_ref().map_err(Clone::clone).map(|p| {
                let preds: Vec<bool> = p.iter().map(|&s| s >= threshold).collect();
                f1_of(&preds, gold)
            });
            let params = HyperParams::Lr(LrParams {
                use_idf,
                stemmer,
                c: g.c[ci],
                threshold,
            });
            log.push(entry(params, &outcome));
        }
    }
    log
}

fn svm_search(g: &SvmGrid, train: &DataSet, val: &DataSet, gold: &[bool]) -> Vec<GridEntry> {
    let groups: Vec<(bool, Stemmer)> = g
        .use_idf
        .iter()
        .flat_map(|&u| g.stemmer.iter().map(move |&s| (u, s)))
        .collect();
    let prepared: Vec<Result<(Featurized, Gram)>> = groups
        .par_iter()
        .map(|&(u, s)| {
            let f = featurize(train, val, u, s)?;
            let gram = Gram::new(&f.train);
            Ok((f, gram))
        })
        .collect();
    let labels = train.labels();
    let tasks: Vec<(usize, usize)> = (0..groups.len())
        .flat_map(|gi| (0..g.kernel.len()).map(move |ki| (gi, ki)))
        .collect();
    // F1 per (group, kernel), one entry per C.
    let scores: Vec<Vec<std::result::Result<f64, String>>> = tasks
        .par_iter()
        .map(|&(gi, ki)| {
            let kernel = g.kernel[ki];
            let (f, gram) = match &prepared[gi] {
                Ok(p) => p,
                Err(e) => return vec![Err(e.to_string()); g.c.len()],
            };
            if let Kernel::Rbf { gamma } = kernel {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return vec![Err(format!("gamma must be positive, got {gamma}")); g.c.len()];
                }
            }
            let k = gram.kernel_matrix(kernel);
            g.c.iter()
                .map(|&c| {
                    let sol = solve_dual(&k, &labels, c, KKT_TOL).map_err(|e| e.to_string())?;
                    let m = SvmModel::from_dual(&f.train, &labels, f.vocab.len(), kernel, c, &sol);
                    let preds: Vec<bool> = f.val.iter().map(|x| m.predict(x).0).collect();
                    Ok(f1_of(&preds, gold))
                })
                .collect()
        })
        .collect();
    let mut log = Vec::with_capacity(g.c.len() * tasks.len());
    for (gi, &(use_idf, stemmer)) in groups.iter().enumerate() {
        for (ci, &c) in g.c.iter().enumerate() {
            for (ki, &kernel) in g.kernel.iter().enumerate() {
                let outcome = &scores[gi * g.kernel.len() + ki][ci];
                let params = HyperParams::Svm(SvmParams {
                    use_idf,
                    stemmer,
                    c,
                    kernel,
                });
                log.push(entry(params, outcome));
            }
        }
    }
    log
}

fn bio_search(g: &BioGrid, train: &DataSet, val: &DataSet, gold: &[bool]) -> Vec<GridEntry> {
    let tasks: Vec<(f64, f64)> = g
        .c1
        .iter()
        .flat_map(|&a| g.c2.iter().map(move |&b| (a, b)))
        .collect();
    let percentages: Vec<std::result::Result<Vec<f64>, String>> = tasks
        .par_iter()
        .map(|&(c1, c2)| {
            let crf = train_tagger_crf(train, c1, c2).map_err(|e| e.to_string())?;
            Ok(privileged_percentages(&crf, val))
        })
        .collect();
    let mut log = Vec::with_capacity(tasks.len() * g.overlap.len());
    for (&(c1, c2), p) in tasks.iter().zip(&percentages) {
        for &overlap in &g.overlap {
            let outcome = p.as_ref().map_err(Clone::clone).map(|p| {
                let preds: Vec<bool> = p.iter().map(|&x| meets_overlap(x, overlap)).collect();
                f1_of(&preds, gold)
            });
            log.push(entry(HyperParams::Bio(BioParams { c1, c2, overlap }), &outcome));
        }
    }
    log
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneConfig {
    pub validation_fraction: f64,
    pub seed: u64,
    /// Retrain the selected configuration on train + validation (otherwise
    /// on the training half only).
    pub retrain_on_full: bool,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            validation_fraction: DEFAULT_VALIDATION_FRACTION,
            seed: 0,
            retrain_on_full: true,
        }
    }
}

/// Tunes on a stratified split of `data` and trains the final model. Rule
/// families skip tuning.
pub fn tune_and_train(grid: &ParamGrid, data: &DataSet, cfg: &TuneConfig) -> Result<(Model, Option<TuningResult>)> {
    if let ParamGrid::Fixed(p) = grid {
        return Ok((Model::train(p, data)?, None));
    }
    let (train, val) = split_train_validation(data, cfg.validation_fraction, cfg.seed)?;
    let result = grid_search(grid, &train, &val)?;
    let final_data = if cfg.retrain_on_full { data } else { &train };
    let model = Model::train(&result.best_params, final_data)?;
    Ok((model, Some(result)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Example;

    fn synthetic(n: usize, positives: usize) -> DataSet {
        DataSet {
            examples: (0..n)
                .map(|i| Example {
                    paragraph_id: format!("d{}/{}", i / 4, i % 4),
                    document_id: format!("d{}", i / 4),
                    ordinal: i % 4,
                    text: if i < positives {
                        format!("we recommend option {i}")
                    } else {
                        format!("meeting at noon {i}")
                    },
                    label: i < positives,
                })
                .collect(),
        }
    }

    #[test]
    fn default_grid_sizes() {
        assert_eq!(ParamGrid::default_for(Family::Lr).points().len(), 200);
        assert_eq!(ParamGrid::default_for(Family::Svm).points().len(), 120);
        assert_eq!(ParamGrid::default_for(Family::Bio).points().len(), 250);
        for f in Family::ALL {
            let g = ParamGrid::default_for(f);
            assert_eq!(g.points().len(), g.len());
        }
    }

    #[test]
    fn row_major_order() {
        let pts = ParamGrid::default_for(Family::Lr).points();
        let HyperParams::Lr(first) = pts[0] else { panic!() };
        let HyperParams::Lr(second) = pts[1] else { panic!() };
        assert_eq!((first.use_idf, first.c, first.threshold), (false, 0.01, 0.1));
        assert_eq!((second.c, second.threshold), (0.01, 0.2));
    }

    #[test]
    fn stratified_split_arithmetic() {
        let data = synthetic(100, 30);
        let (tr, va) = split_train_validation(&data, 0.2, 7).unwrap();
        assert_eq!((tr.len(), va.len()), (80, 20));
        assert_eq!(va.positives(), 6);
        let (tr2, va2) = split_train_validation(&data, 0.2, 7).unwrap();
        assert_eq!((tr, va), (tr2, va2));
    }

    #[test]
    fn split_preconditions() {
        let data = synthetic(10, 1);
        assert!(matches!(split_train_validation(&data, 0.2, 1), Err(Error::Stratification(_))));
        let data = synthetic(10, 5);
        assert!(matches!(split_train_validation(&data, 0.0, 1), Err(Error::Stratification(_))));
    }

    #[test]
    fn single_point_and_ties() {
        let data = synthetic(40, 12);
        let (tr, va) = split_train_validation(&data, 0.25, 3).unwrap();
        let one = ParamGrid::Fixed(HyperParams::AllOnes);
        let r = grid_search(&one, &tr, &va).unwrap();
        assert_eq!(r.log.len(), 1);
        assert_eq!(r.best_params, HyperParams::AllOnes);

        // Both thresholds separate this easy set perfectly.
        let grid = ParamGrid::Lr(LrGrid {
            use_idf: vec![true],
            stemmer: vec![Stemmer::None],
            c: vec![10.0],
            threshold: vec![0.4, 0.5],
        });
        let r = grid_search(&grid, &tr, &va).unwrap();
        assert_eq!(r.log.len(), 2);
        assert_eq!(r.best_validation_f1, 100.0);
        let HyperParams::Lr(best) = r.best_params else { panic!() };
        assert_eq!(best.threshold, 0.4);
        assert!(r.log.iter().all(|e| e.f1 <= r.best_validation_f1));
    }

    #[test]
    fn failing_points_are_logged_not_fatal() {
        let data = synthetic(20, 6);
        let (tr, va) = split_train_validation(&data, 0.25, 3).unwrap();
        let grid = ParamGrid::Svm(SvmGrid {
            use_idf: vec![false],
            stemmer: vec![Stemmer::None],
            c: vec![1.0],
            kernel: vec![Kernel::Rbf { gamma: -1.0 }, Kernel::Linear],
        });
        let r = grid_search(&grid, &tr, &va).unwrap();
        assert_eq!(r.log[0].f1, 0.0);
        assert!(r.log[0].error.is_some());
        assert!(r.log[1].error.is_none());
        let mut out = Vec::new();
        r.write_tsv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 3);
    }
}
