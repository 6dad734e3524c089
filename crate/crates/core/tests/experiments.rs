//! Cross-validation invariants and small end-to-end runs on synthetic data.

use std::collections::BTreeMap;

use delib_core::bio::OverlapThreshold;
use delib_core::classifiers::Kernel;
use delib_core::corpus::{Batch, LabelScope, Reviewer};
use delib_core::experiments::{
    cv_folds, leave_one_topic_out, render_csv, render_text, render_topics_text, run_condition, run_table, top_words,
    DataSpec, ExperimentConfig, RunOptions,
};
use delib_core::features::Stemmer;
use delib_core::model::Family;
use delib_core::synth::{synthetic_corpus, SynthConfig};
use delib_core::tuning::{BioGrid, LrGrid, ParamGrid, SvmGrid};
use proptest::prelude::*;

fn small_grids() -> RunOptions {
    let mut grids = BTreeMap::new();
    grids.insert(
        Family::Lr,
        ParamGrid::Lr(LrGrid {
            use_idf: vec![true],
            stemmer: vec![Stemmer::None],
            c: vec![1.0, 10.0],
            threshold: vec![0.3, 0.5],
        }),
    );
    grids.insert(
        Family::Svm,
        ParamGrid::Svm(SvmGrid {
            use_idf: vec![true],
            stemmer: vec![Stemmer::None],
            c: vec![1.0],
            kernel: vec![Kernel::Linear, Kernel::Rbf { gamma: 0.5 }],
        }),
    );
    grids.insert(
        Family::Bio,
        ParamGrid::Bio(BioGrid {
            c1: vec![0.1],
            c2: vec![0.1],
            overlap: vec![OverlapThreshold::new(50).unwrap()],
        }),
    );
    RunOptions {
        grids,
        ..RunOptions::default()
    }
}

proptest! {
    #[test]
    fn folds_partition_stratify_and_repeat(
        labels in prop::collection::vec(any::<bool>(), 10..300),
        k in 2usize..10,
        seed in any::<u64>(),
    ) {
        prop_assume!(labels.len() >= k);
        let folds = cv_folds(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        let pos = labels.iter().filter(|&&l| l).count();
        for f in &folds {
            let p = f.iter().filter(|&&i| labels[i]).count();
            prop_assert!(p == pos / k || p == pos.div_ceil(k), "{} positives in a fold, {} total", p, pos);
            prop_assert!(f.windows(2).all(|w| w[0] < w[1]));
        }
        prop_assert_eq!(folds, cv_folds(&labels, k, seed).unwrap());
    }
}

#[test]
fn cross_validation_is_deterministic_and_pools_every_paragraph() {
    let corpus = synthetic_corpus(&SynthConfig {
        scale: 0.1,
        ..SynthConfig::default()
    })
    .unwrap();
    let spec = DataSpec::new(Reviewer::A, &[Batch::K1, Batch::K2, Batch::K3, Batch::K5]);
    let cfg = ExperimentConfig::infer(spec.clone(), spec, LabelScope::D0T0, 5, 11).unwrap();
    let opts = small_grids();
    let a = run_condition(&corpus, &cfg, &opts).unwrap();
    let b = run_condition(&corpus, &cfg, &opts).unwrap();
    assert_eq!(a.results.len(), 5);
    for (x, y) in a.results.iter().zip(&b.results) {
        assert_eq!(x.predictions, y.predictions);
        assert_eq!(x.report, y.report);
        assert_eq!(x.report.n, a.test_ids.len());
        assert_eq!(x.models.len(), 5);
    }
    let all1 = a.report(Family::AllOnes).unwrap();
    assert_eq!(all1.recall, 100.0);
    let lr = a.report(Family::Lr).unwrap();
    assert!(lr.f1 > all1.f1, "LR {} vs All-1s {}", lr.f1, all1.f1);
}

#[test]
fn non_trivial_scope_excludes_trivial_paragraphs() {
    let corpus = synthetic_corpus(&SynthConfig::default()).unwrap();
    let cfg = ExperimentConfig::infer(
        DataSpec::new(Reviewer::A, &[Batch::R4]),
        DataSpec::new(Reviewer::AB, &[Batch::K2]),
        LabelScope::D0,
        5,
        3,
    )
    .unwrap();
    let opts = RunOptions {
        families: vec![Family::Keyword, Family::AllOnes],
        ..RunOptions::default()
    };
    let res = run_condition(&corpus, &cfg, &opts).unwrap();
    for id in &res.test_ids {
        let (_, p) = corpus.paragraphs().find(|(_, p)| &p.id == id).unwrap();
        assert_ne!(p.label(Reviewer::AB), Some(delib_core::corpus::Label::T0));
    }
}

#[test]
fn tables_render_on_synthetic_data() {
    let corpus = synthetic_corpus(&SynthConfig {
        scale: 0.08,
        ..SynthConfig::default()
    })
    .unwrap();
    let opts = small_grids();
    for id in [6u8, 9] {
        let t = run_table(&corpus, id, 3, 5, &opts).unwrap();
        let text = render_text(&t).unwrap();
        assert!(text.text.starts_with(&format!("Table {id}:")));
        assert_eq!(text.text.lines().count(), 3 + 5);
        assert!(text.text.contains("All-1s"));
        let csv = render_csv(&t).unwrap();
        assert_eq!(csv.lines().count(), 1 + 5 * t.columns.len());
    }

    let rows = leave_one_topic_out(&corpus, 5, &opts).unwrap();
    assert!(rows.windows(2).all(|w| w[0].paragraphs >= w[1].paragraphs));
    let text = render_topics_text(&rows).unwrap();
    assert!(text.text.contains("Total &"));

    let words = top_words(&corpus, 5, 5, 10, &opts).unwrap();
    assert_eq!(words.positive.len(), 10);
    assert!(words.positive[0].1 > 0.0 && words.negative[0].1 < 0.0);
}
