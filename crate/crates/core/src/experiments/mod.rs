//! Train/test conditions, cross-validation, ablations, topic hold-out and
//! table output.

pub mod published;
mod render;
mod tables;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use render::{
    fmt_pct, group_marks, render_csv, render_text, render_top_words_csv, render_top_words_text, render_topics_csv,
    render_topics_text, CellMarks, RenderedTable,
};
pub use tables::{
    leave_one_topic_out, run_table, table_definition, top_words, ColumnSpec, TableDef, TableResult, TopicRow,
    TopWords, TABLE_IDS,
};

use crate::corpus::{binarize, select, Batch, Corpus, Custodian, DataSet, LabelScope, Reviewer};
use crate::error::{Error, Result};
use crate::eval::{confusion, EvalReport};
use crate::model::{Family, Model};
use crate::tuning::{tune_and_train, ParamGrid, TuneConfig, TuningResult};

pub const DEFAULT_FOLDS: usize = 5;

/// A reviewer's labels over a set of batches, e.g. `A:K1,K2,K3,K5`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataSpec {
    pub reviewer: Reviewer,
    pub batches: Vec<Batch>,
}

impl DataSpec {
    pub fn new(reviewer: Reviewer, batches: &[Batch]) -> DataSpec {
        DataSpec {
            reviewer,
            batches: batches.to_vec(),
        }
    }

    pub fn custodians(&self) -> BTreeSet<Custodian> {
        self.batches.iter().map(|b| b.custodian()).collect()
    }

    fn batch_set(&self) -> BTreeSet<Batch> {
        self.batches.iter().copied().collect()
    }

    pub fn select(&self, corpus: &Corpus, scope: LabelScope) -> Result<DataSet> {
        select(corpus, &self.batches, self.reviewer, scope)
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.batches.iter().map(|b| b.as_str()).collect();
        write!(f, "{}: {}", self.reviewer, names.join(","))
    }
}

impl FromStr for DataSpec {
    type Err = Error;

    /// `REVIEWER:BATCH[,+]BATCH...`, e.g. `A:K1,K2,K3,K5+E5`.
    fn from_str(s: &str) -> Result<DataSpec> {
        let (r, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("expected REVIEWER:BATCHES, got {s:?}")))?;
        let reviewer: Reviewer = r.trim().parse()?;
        let batches = rest
            .split([',', '+'])
            .map(str::trim)
            .filter(|b| !b.is_empty())
            .map(Batch::from_str)
            .collect::<Result<Vec<_>>>()?;
        if batches.is_empty() {
            return Err(Error::Config(format!("no batches in {s:?}")));
        }
        Ok(DataSpec { reviewer, batches })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Same reviewer, same data, cross-validation.
    A,
    /// Same reviewer, different custodians.
    B,
    /// Different reviewers, same custodian.
    C,
    /// Different reviewers, different custodians.
    D,
}

impl FromStr for Condition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Condition> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Condition::A),
            "B" => Ok(Condition::B),
            "C" => Ok(Condition::C),
            "D" => Ok(Condition::D),
            other => Err(Error::Config(format!("unknown condition {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub condition: Condition,
    pub train: DataSpec,
    pub test: DataSpec,
    pub scope: LabelScope,
    /// Cross-validation folds (condition A only).
    pub folds: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Infers the condition from the reviewer and custodian relations.
    pub fn infer(train: DataSpec, test: DataSpec, scope: LabelScope, folds: usize, seed: u64) -> Result<ExperimentConfig> {
        let condition = if train == test {
            Condition::A
        } else {
            let same_reviewer = train.reviewer == test.reviewer;
            let same_custodian = train.custodians() == test.custodians();
            match (same_reviewer, same_custodian) {
                (true, false) => Condition::B,
                (false, true) => Condition::C,
                (false, false) => Condition::D,
                (true, true) => {
                    return Err(Error::Config(format!(
                        "train {train} and test {test}: same reviewer and custodian is only valid as cross-validation"
                    )))
                }
            }
        };
        let cfg = ExperimentConfig {
            condition,
            train,
            test,
            scope,
            folds,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let (tr, te) = (&self.train, &self.test);
        let err = |why: &str| Err(Error::Config(format!("condition {:?} with train {tr}, test {te}: {why}", self.condition)));
        match self.condition {
            Condition::A => {
                if tr != te {
                    return err("cross-validation needs identical train and test data");
                }
                if self.folds < 2 {
                    return err("cross-validation needs at least 2 folds");
                }
                Ok(())
            }
            c => {
                let disjoint = tr.batch_set().is_disjoint(&te.batch_set());
                let same_reviewer = tr.reviewer == te.reviewer;
                if !disjoint && same_reviewer {
                    return err("train and test must use disjoint batches or different reviewers");
                }
                let custodians_overlap = !tr.custodians().is_disjoint(&te.custodians());
                let same_custodian = tr.custodians() == te.custodians();
                match c {
                    Condition::B if !same_reviewer => err("needs the same reviewer"),
                    Condition::B if custodians_overlap => err("needs different custodians"),
                    Condition::C if same_reviewer => err("needs different reviewers"),
                    Condition::C if !same_custodian => err("needs the same custodian"),
                    Condition::D if same_reviewer => err("needs different reviewers"),
                    Condition::D if custodians_overlap => err("needs different custodians"),
                    _ => Ok(()),
                }
            }
        }
    }
}

/// Stratified folds: each class is shuffled with the seed, the classes are
/// concatenated, and examples are dealt round-robin. Returns the sorted test
/// indices of each fold.
pub fn cv_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("cross-validation needs at least 2 folds, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Config(format!("{} examples cannot fill {k} folds", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(labels.len());
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Complement of a fold within `0..n`.
pub fn fold_train_indices(n: usize, test: &[usize]) -> Vec<usize> {
    let held: BTreeSet<usize> = test.iter().copied().collect();
    (0..n).filter(|i| !held.contains(i)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOptions {
    pub families: Vec<Family>,
    pub validation_fraction: f64,
    pub retrain_on_full: bool,
    /// Per-family grid overrides; default grids otherwise.
    pub grids: BTreeMap<Family, ParamGrid>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            families: Family::ALL.to_vec(),
            validation_fraction: crate::tuning::DEFAULT_VALIDATION_FRACTION,
            retrain_on_full: true,
            grids: BTreeMap::new(),
        }
    }
}

impl RunOptions {
    pub fn grid(&self, family: Family) -> ParamGrid {
        self.grids
            .get(&family)
            .cloned()
            .unwrap_or_else(|| ParamGrid::default_for(family))
    }

    fn tune_config(&self, seed: u64) -> TuneConfig {
        TuneConfig {
            validation_fraction: self.validation_fraction,
            seed,
            retrain_on_full: self.retrain_on_full,
        }
    }
}

/// One family's outcome under one condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyResult {
    pub family: Family,
    pub report: EvalReport,
    /// Pooled predictions aligned with the test set.
    pub predictions: Vec<bool>,
    /// One per fold (or a single entry for a train/test split).
    pub tuning: Vec<Option<TuningResult>>,
    #[serde(skip)]
    pub models: Vec<Model>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionResult {
    pub config: ExperimentConfig,
    pub test_ids: Vec<String>,
    pub results: Vec<FamilyResult>,
}

impl ConditionResult {
    pub fn report(&self, family: Family) -> Option<&EvalReport> {
        self.results.iter().find(|r| r.family == family).map(|r| &r.report)
    }
}

/// Seed for the tuning split of one fold, kept apart from the fold seed.
fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(fold as u64 + 1)
}

/// Fails if any example's label is outside the scope for its reviewer.
fn verify_scope(corpus: &Corpus, data: &DataSet, reviewer: Reviewer, scope: LabelScope) -> Result<()> {
    let labels: HashMap<&str, _> = corpus.paragraphs().map(|(_, p)| (p.id.as_str(), p)).collect();
    for ex in &data.examples {
        let ok = labels
            .get(ex.paragraph_id.as_str())
            .and_then(|p| p.label(reviewer))
            .and_then(|l| binarize(l, scope))
            == Some(ex.label);
        if !ok {
            return Err(Error::Integrity(format!(
                "paragraph {} is not a {} example of reviewer {reviewer}",
                ex.paragraph_id,
                scope.as_str()
            )));
        }
    }
    Ok(())
}

/// Trains on `train` with tuning and predicts `test`.
fn fit_predict(family: Family, opts: &RunOptions, train: &DataSet, test: &DataSet, seed: u64) -> Result<(Vec<bool>, Option<TuningResult>, Model)> {
    let (model, tuning) = tune_and_train(&opts.grid(family), train, &opts.tune_config(seed))?;
    Ok((model.predict_labels(test), tuning, model))
}

pub fn run_condition(corpus: &Corpus, config: &ExperimentConfig, opts: &RunOptions) -> Result<ConditionResult> {
    config.validate()?;
    let test = config.test.select(corpus, config.scope)?;
    verify_scope(corpus, &test, config.test.reviewer, config.scope)?;
    let gold = test.labels();
    let mut results = Vec::new();

    match config.condition {
        Condition::A => {
            let folds = cv_folds(&gold, config.folds, config.seed)?;
            for &family in &opts.families {
                log::info!("{family}: {}-fold cross-validation on {}", config.folds, config.test);
                let per_fold: Vec<Result<(Vec<bool>, Option<TuningResult>, Model)>> = folds
                    .par_iter()
                    .enumerate()
                    .map(|(k, held)| {
                        let train = test.subset(&fold_train_indices(test.len(), held));
                        let held_out = test.subset(held);
                        fit_predict(family, opts, &train, &held_out, fold_seed(config.seed, k))
                    })
                    .collect();
                let mut pooled = vec![false; test.len()];
                let mut tuning = Vec::new();
                let mut models = Vec::new();
                for (held, outcome) in folds.iter().zip(per_fold) {
                    let (preds, t, m) = outcome?;
                    for (&i, p) in held.iter().zip(preds) {
                        pooled[i] = p;
                    }
                    tuning.push(t);
                    models.push(m);
                }
                let report = EvalReport::from_confusion(confusion(&pooled, &gold)?)?;
                results.push(FamilyResult {
                    family,
                    report,
                    predictions: pooled,
                    tuning,
                    models,
                });
            }
        }
        _ => {
            let train = config.train.select(corpus, config.scope)?;
            verify_scope(corpus, &train, config.train.reviewer, config.scope)?;
            for &family in &opts.families {
                log::info!("{family}: train {} test {}", config.train, config.test);
                let (preds, tuning, model) = fit_predict(family, opts, &train, &test, fold_seed(config.seed, 0))?;
                let report = EvalReport::from_confusion(confusion(&preds, &gold)?)?;
                results.push(FamilyResult {
                    family,
                    report,
                    predictions: preds,
                    tuning: vec![tuning],
                    models: vec![model],
                });
            }
        }
    }
    Ok(ConditionResult {
        config: config.clone(),
        test_ids: test.examples.iter().map(|e| e.paragraph_id.clone()).collect(),
        results,
    })
}
