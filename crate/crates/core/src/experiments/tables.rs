//! Table definitions and the runs behind them.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    cv_folds, fold_seed, fold_train_indices, run_condition, Condition, ConditionResult, DataSpec, ExperimentConfig,
    RunOptions,
};
use crate::classifiers::top_weights;
use crate::corpus::{select_where, Batch, Corpus, LabelScope, Reviewer, Topic};
use crate::error::{Error, Result};
use crate::eval::{confusion, EvalReport};
use crate::model::{Family, Model};
use crate::tuning::tune_and_train;

pub const TABLE_IDS: [u8; 8] = [5, 6, 7, 8, 9, 10, 11, 12];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub condition: Condition,
    pub train: DataSpec,
    pub test: DataSpec,
    pub scope: LabelScope,
}

impl ColumnSpec {
    pub fn header(&self) -> String {
        match self.condition {
            Condition::A => format!("CV {}", self.test),
            _ => format!("{} -> {}", self.train, self.test),
        }
    }

    pub fn config(&self, folds: usize, seed: u64) -> ExperimentConfig {
        ExperimentConfig {
            condition: self.condition,
            train: self.train.clone(),
            test: self.test.clone(),
            scope: self.scope,
            folds,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDef {
    pub id: u8,
    pub caption: String,
    pub columns: Vec<ColumnSpec>,
}

use Batch::*;
use Reviewer::{A as RA, AB as RAB, B as RB};

const K1235: &[Batch] = &[K1, K2, K3, K5];
const K135: &[Batch] = &[K1, K3, K5];

fn col(condition: Condition, train: (Reviewer, &[Batch]), test: (Reviewer, &[Batch]), scope: LabelScope) -> ColumnSpec {
    ColumnSpec {
        condition,
        train: DataSpec::new(train.0, train.1),
        test: DataSpec::new(test.0, test.1),
        scope,
    }
}

fn cv(spec: (Reviewer, &[Batch]), scope: LabelScope) -> ColumnSpec {
    col(Condition::A, spec, spec, scope)
}

/// Column layout of the per-condition tables (5 to 10).
pub fn table_definition(id: u8) -> Result<TableDef> {
    use Condition::*;
    let s = LabelScope::D0T0;
    let (caption, columns) = match id {
        5 => (
            "Cross-validation",
            vec![cv((RA, K1235), s), cv((RA, &[R4]), s), cv((RB, &[K2]), s), cv((RAB, &[K2]), s)],
        ),
        6 => (
            "Same reviewer, different custodians",
            vec![col(B, (RA, K1235), (RA, &[R4]), s), col(B, (RA, &[R4]), (RA, K1235), s)],
        ),
        7 => (
            "Different reviewers, same custodian",
            vec![
                col(C, (RA, K135), (RB, &[K2]), s),
                col(C, (RA, K135), (RAB, &[K2]), s),
                col(C, (RB, &[K2]), (RA, K135), s),
                col(C, (RAB, &[K2]), (RA, K135), s),
            ],
        ),
        8 => (
            "Different reviewers, different custodians",
            vec![
                col(D, (RA, &[R4]), (RB, &[K2]), s),
                col(D, (RA, &[R4]), (RAB, &[K2]), s),
                col(D, (RB, &[K2]), (RA, &[R4]), s),
                col(D, (RAB, &[K2]), (RA, &[R4]), s),
            ],
        ),
        9 => {
            let e = LabelScope::D0T0E0;
            (
                "Easy zeros included",
                vec![
                    cv((RA, &[K1, K2, K3, K5, E5]), e),
                    col(B, (RA, &[K1, K2, K3, K5, E5]), (RA, &[R4]), e),
                    col(C, (RB, &[K2]), (RA, &[K1, K3, K5, E5]), e),
                ],
            )
        }
        10 => {
            let d = LabelScope::D0;
            (
                "Non-trivial paragraphs only",
                vec![
                    cv((RA, K1235), d),
                    col(B, (RA, &[R4]), (RA, K1235), d),
                    col(C, (RA, K135), (RAB, &[K2]), d),
                    col(D, (RA, &[R4]), (RAB, &[K2]), d),
                ],
            )
        }
        other => return Err(Error::Config(format!("no condition table {other}; expected 5 to 10"))),
    };
    let caption = format!("{caption} ({})", columns[0].scope.caption());
    Ok(TableDef { id, caption, columns })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableResult {
    pub def: TableDef,
    pub columns: Vec<ConditionResult>,
}

/// Runs every column of a condition table. Column `j` uses seed `seed + j`.
pub fn run_table(corpus: &Corpus, id: u8, folds: usize, seed: u64, opts: &RunOptions) -> Result<TableResult> {
    let def = table_definition(id)?;
    let mut columns = Vec::with_capacity(def.columns.len());
    for (j, spec) in def.columns.iter().enumerate() {
        log::info!("table {id} column {}: {}", j + 1, spec.header());
        let cfg = spec.config(folds, seed.wrapping_add(j as u64));
        columns.push(run_condition(corpus, &cfg, opts)?);
    }
    Ok(TableResult { def, columns })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopicRow {
    pub topic: Topic,
    pub paragraphs: usize,
    pub reports: Vec<(Family, EvalReport)>,
}

impl TopicRow {
    pub fn report(&self, family: Family) -> Option<&EvalReport> {
        self.reports.iter().find(|(f, _)| *f == family).map(|(_, r)| r)
    }
}

/// Holds out each topic in turn among reviewer A's paragraphs (without the
/// easy-zeros batch), training on the rest. Topics with no paragraphs are
/// skipped. Rows come back by descending paragraph count.
pub fn leave_one_topic_out(corpus: &Corpus, seed: u64, opts: &RunOptions) -> Result<Vec<TopicRow>> {
    let data = select_where(corpus, RA, LabelScope::D0T0, |d| d.batch != E5);
    let topics: HashMap<&str, Topic> = corpus
        .paragraphs()
        .map(|(d, _)| (d.id.as_str(), d.topic))
        .collect();
    let topic_of: Vec<Topic> = data
        .examples
        .iter()
        .map(|e| {
            topics
                .get(e.document_id.as_str())
                .copied()
                .ok_or_else(|| Error::Integrity(format!("no document {}", e.document_id)))
        })
        .collect::<Result<_>>()?;

    let held: Vec<(usize, Topic, Vec<usize>)> = Topic::ALL
        .iter()
        .enumerate()
        .filter_map(|(k, &t)| {
            let idx: Vec<usize> = (0..data.len()).filter(|&i| topic_of[i] == t).collect();
            if idx.is_empty() {
                log::warn!("topic {t} has no paragraphs; skipped");
                None
            } else {
                Some((k, t, idx))
            }
        })
        .collect();

    let mut rows = held
        .par_iter()
        .map(|(k, topic, idx)| {
            let test = data.subset(idx);
            let train = data.subset(&fold_train_indices(data.len(), idx));
            let gold = test.labels();
            let mut reports = Vec::new();
            for &family in &opts.families {
                let (model, _) = tune_and_train(&opts.grid(family), &train, &opts.tune_config(fold_seed(seed, *k)))?;
                let report = EvalReport::from_confusion(confusion(&model.predict_labels(&test), &gold)?)?;
                reports.push((family, report));
            }
            Ok(TopicRow {
                topic: *topic,
                paragraphs: test.len(),
                reports,
            })
        })
        .collect::<Result<Vec<TopicRow>>>()?;
    rows.sort_by(|a, b| b.paragraphs.cmp(&a.paragraphs).then(a.topic.cmp(&b.topic)));
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopWords {
    pub positive: Vec<(String, f64)>,
    pub negative: Vec<(String, f64)>,
}

/// Largest and smallest LR weights of the first cross-validation fold of
/// reviewer A's main batches, trained as in the leftmost column of table 5.
pub fn top_words(corpus: &Corpus, folds: usize, seed: u64, k: usize, opts: &RunOptions) -> Result<TopWords> {
    let spec = DataSpec::new(RA, K1235);
    let data = spec.select(corpus, LabelScope::D0T0)?;
    let fold = cv_folds(&data.labels(), folds, seed)?;
    let train = data.subset(&fold_train_indices(data.len(), &fold[0]));
    let (model, _) = tune_and_train(&opts.grid(Family::Lr), &train, &opts.tune_config(fold_seed(seed, 0)))?;
    match model {
        Model::Lr { vocabulary, model, .. } => {
            let (positive, negative) = top_weights(&model, &vocabulary, k);
            Ok(TopWords { positive, negative })
        }
        other => Err(Error::Config(format!("top words need an LR model, got {}", other.family()))),
    }
}
