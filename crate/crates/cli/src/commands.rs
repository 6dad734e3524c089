//! Subcommand implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use delib_core::corpus::{load_collection, Batch, Corpus, Label, LabelScope, Reviewer};
use delib_core::eval::{kappa_from_counts, significance_vs, Direction, EvalReport};
use delib_core::experiments::{
    self, fmt_pct, leave_one_topic_out, published, render_csv, render_text, render_top_words_csv,
    render_top_words_text, render_topics_csv, render_topics_text, run_condition, run_table, top_words,
    ConditionResult, ExperimentConfig, RunOptions,
};
use delib_core::model::{Family, Model};
use delib_core::synth::{synthetic_corpus, write_collection, SynthConfig};
use delib_core::tuning::{grid_search, split_train_validation, tune_and_train, ParamGrid, TuneConfig};
use delib_review::{ReviewService, ServiceConfig};
use serde::Serialize;

use crate::config::Settings;
use crate::run::Run;

pub const TOP_WORDS: usize = 20;

fn load(settings: &Settings, run: &mut Run) -> Result<Corpus> {
    let path = settings.manifest()?;
    log::info!("loading collection from {}", path.display());
    let corpus = load_collection(path).with_context(|| format!("loading {}", path.display()))?;
    run.set_corpus_hash(corpus.content_hash());
    Ok(corpus)
}

fn trained_family(settings: &Settings) -> Result<Family> {
    let family = settings.model.context("--model is required")?;
    Ok(family)
}

fn options(settings: &Settings) -> RunOptions {
    let mut opts = RunOptions::default();
    if let Some(m) = settings.model {
        opts.families = Family::ALL.into_iter().filter(|&f| f == m || f == Family::AllOnes).collect();
    }
    opts
}

#[derive(Serialize)]
struct BatchSummary {
    batch: Batch,
    custodian: String,
    documents: usize,
    paragraphs: usize,
    labels: BTreeMap<String, BTreeMap<String, usize>>,
}

pub fn ingest(settings: &Settings) -> Result<()> {
    let mut run = Run::new("ingest", settings);
    let corpus = load(settings, &mut run)?;
    let mut rows = Vec::new();
    let mut text = String::from("batch\tcustodian\tdocuments\tparagraphs\tlabels\n");
    for batch in Batch::ALL {
        let docs: Vec<_> = corpus.documents.iter().filter(|d| d.batch == batch).collect();
        let mut labels: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for p in docs.iter().flat_map(|d| &d.paragraphs) {
            for (r, l) in &p.labels {
                *labels.entry(r.to_string()).or_default().entry(l.to_string()).or_default() += 1;
            }
        }
        let row = BatchSummary {
            batch,
            custodian: format!("{:?}", batch.custodian()),
            documents: docs.len(),
            paragraphs: docs.iter().map(|d| d.paragraphs.len()).sum(),
            labels,
        };
        let labels = row
            .labels
            .iter()
            .map(|(r, m)| {
                let counts: Vec<String> = m.iter().map(|(l, n)| format!("{l}={n}")).collect();
                format!("{r}[{}]", counts.join(" "))
            })
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(text, "{batch}\t{}\t{}\t{}\t{labels}", row.custodian, row.documents, row.paragraphs)?;
        rows.push(row);
    }
    writeln!(
        text,
        "total\t\t{}\t{}",
        corpus.documents.len(),
        corpus.total_paragraphs()
    )?;
    print!("{text}");
    run.write("ingest.tsv", &text)?;
    run.write("ingest.json", serde_json::to_string_pretty(&rows)?)?;
    run.finish()?;
    Ok(())
}

pub fn tune(settings: &Settings) -> Result<()> {
    let family = trained_family(settings)?;
    if !family.is_trained() {
        bail!("{family} has no hyper-parameters to tune");
    }
    let name = format!("tune-{family}-{}", settings.scope.as_str());
    let mut run = Run::new(&name, settings);
    let corpus = load(settings, &mut run)?;
    let data = settings.train.select(&corpus, settings.scope)?;
    let cfg = TuneConfig {
        seed: settings.seed,
        ..TuneConfig::default()
    };
    let (train, validation) = split_train_validation(&data, cfg.validation_fraction, cfg.seed)?;
    let grid = ParamGrid::default_for(family);
    log::info!(
        "searching {} points: {} training, {} validation paragraphs",
        grid.len(),
        train.len(),
        validation.len()
    );
    let result = grid_search(&grid, &train, &validation)?;
    let mut tsv = Vec::new();
    result.write_tsv(&mut tsv)?;
    run.write(&format!("{name}.tsv"), tsv)?;
    run.write(&format!("{name}.json"), serde_json::to_string_pretty(&result)?)?;
    println!("best {} validation F1 {}", result.best_params, fmt_pct(result.best_validation_f1));
    run.finish()?;
    Ok(())
}

pub fn train(settings: &Settings) -> Result<()> {
    let family = trained_family(settings)?;
    let name = format!("model-{family}-{}", settings.scope.as_str());
    let mut run = Run::new(&format!("train-{family}-{}", settings.scope.as_str()), settings);
    let corpus = load(settings, &mut run)?;
    let data = settings.train.select(&corpus, settings.scope)?;
    let cfg = TuneConfig {
        seed: settings.seed,
        ..TuneConfig::default()
    };
    log::info!("training {family} on {} ({} paragraphs)", settings.train, data.len());
    let (model, tuning) = tune_and_train(&ParamGrid::default_for(family), &data, &cfg)?;
    if let Some(t) = &tuning {
        let mut tsv = Vec::new();
        t.write_tsv(&mut tsv)?;
        run.write(&format!("{name}.tuning.tsv"), tsv)?;
    }
    run.write(&format!("{name}.json"), model.to_json()?)?;
    println!("trained {}", model.params());
    run.finish()?;
    Ok(())
}

pub fn predict(settings: &Settings, model_path: &Path) -> Result<()> {
    let model = Model::load(model_path).with_context(|| format!("loading model {}", model_path.display()))?;
    let family = model.family();
    let mut run = Run::new(&format!("predict-{family}"), settings);
    let corpus = load(settings, &mut run)?;
    let spec = settings.test_or_train();
    let data = spec.select(&corpus, settings.scope)?;
    let preds = model.predict(&data);
    let mut tsv = String::from("paragraph_id\tgold\tpredicted\tscore\n");
    for (e, p) in data.examples.iter().zip(&preds) {
        writeln!(tsv, "{}\t{}\t{}\t{}", e.paragraph_id, u8::from(e.label), u8::from(p.label), p.score)?;
    }
    run.write(&format!("predictions-{family}.tsv"), tsv)?;
    let report = EvalReport::evaluate(
        &preds.iter().map(|p| p.label).collect::<Vec<_>>(),
        &data.labels(),
    )?;
    println!("{}", report_line(family, &report, None));
    run.finish()?;
    Ok(())
}

fn report_line(family: Family, r: &EvalReport, reference: Option<&EvalReport>) -> String {
    let (p, rc, f, ci) = r.rounded();
    let mut line = format!(
        "{:<8} P {:>5} R {:>5} F1 {:>5} ±{} n={}",
        family.display_name(),
        fmt_pct(p),
        fmt_pct(rc),
        fmt_pct(f),
        fmt_pct(ci),
        r.n
    );
    if let Some(base) = reference {
        if let Ok(s) = significance_vs(base, r) {
            let mark = match (s.significant, s.direction) {
                (true, Direction::Higher) => " significant over All-1s",
                (true, Direction::Lower) => " significantly below All-1s",
                _ => "",
            };
            line.push_str(mark);
            if s.marginal {
                line.push_str(" (marginal)");
            }
        }
    }
    line
}

fn print_condition(result: &ConditionResult) -> String {
    let mut out = String::new();
    let c = &result.config;
    let _ = writeln!(out, "condition {:?}: {} -> {} scope {}", c.condition, c.train, c.test, c.scope.as_str());
    let base = result.report(Family::AllOnes);
    for r in &result.results {
        let reference = base.filter(|_| r.family != Family::AllOnes);
        let _ = writeln!(out, "{}", report_line(r.family, &r.report, reference));
    }
    out
}

pub fn eval(settings: &Settings) -> Result<()> {
    let mut run = Run::new("eval", settings);
    let corpus = load(settings, &mut run)?;
    let cfg = ExperimentConfig::infer(
        settings.train.clone(),
        settings.test_or_train().clone(),
        settings.scope,
        settings.folds,
        settings.seed,
    )?;
    log::info!("running condition {:?}", cfg.condition);
    let result = run_condition(&corpus, &cfg, &options(settings))?;
    let text = print_condition(&result);
    print!("{text}");
    run.write("eval.txt", &text)?;
    run.write("eval.json", serde_json::to_string_pretty(&result)?)?;
    run.finish()?;
    Ok(())
}

pub fn table(settings: &Settings, id: u8) -> Result<()> {
    let name = format!("table{id}");
    let mut run = Run::new(&name, settings);
    let corpus = load(settings, &mut run)?;
    let opts = options(settings);
    let (text, csv, warnings) = match id {
        5..=10 => {
            let t = run_table(&corpus, id, settings.folds, settings.seed, &opts)?;
            let r = render_text(&t)?;
            (r.text, render_csv(&t)?, r.warnings)
        }
        11 => {
            let rows = leave_one_topic_out(&corpus, settings.seed, &opts)?;
            let r = render_topics_text(&rows)?;
            (r.text, render_topics_csv(&rows)?, r.warnings)
        }
        12 => {
            let w = top_words(&corpus, settings.folds, settings.seed, TOP_WORDS, &opts)?;
            (render_top_words_text(&w), render_top_words_csv(&w), Vec::new())
        }
        _ => bail!("unknown table {id}; expected one of {:?}", experiments::TABLE_IDS),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    print!("{text}");
    run.write(&format!("{name}.txt"), &text)?;
    run.write(&format!("{name}.csv"), &csv)?;
    run.finish()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Agreement {
    pub both_d0: usize,
    pub a_d0_b_d1: usize,
    pub a_d1_b_d0: usize,
    pub both_d1: usize,
    pub kappa: f64,
}

/// Reviewer A against reviewer B on paragraphs both labelled D1 or D0.
pub fn agreement_counts(corpus: &Corpus) -> Result<Agreement> {
    let mut c = [0usize; 4];
    for (_, p) in corpus.paragraphs() {
        let (Some(a), Some(b)) = (p.label(Reviewer::A), p.label(Reviewer::B)) else { continue };
        let idx = match (a, b) {
            (Label::D0, Label::D0) => 0,
            (Label::D0, Label::D1) => 1,
            (Label::D1, Label::D0) => 2,
            (Label::D1, Label::D1) => 3,
            _ => continue,
        };
        c[idx] += 1;
    }
    from_counts(c)
}

pub fn from_counts(c: [usize; 4]) -> Result<Agreement> {
    Ok(Agreement {
        both_d0: c[0],
        a_d0_b_d1: c[1],
        a_d1_b_d0: c[2],
        both_d1: c[3],
        kappa: kappa_from_counts(c[3], c[2], c[1], c[0])?,
    })
}

pub fn agreement(settings: &Settings, use_published: bool) -> Result<()> {
    let mut run = Run::new("agreement", settings);
    let a = if use_published {
        from_counts(published::AGREEMENT_COUNTS)?
    } else {
        agreement_counts(&load(settings, &mut run)?)?
    };
    let text = format!(
        "\tB D0\tB D1\nA D0\t{}\t{}\nA D1\t{}\t{}\nkappa\t{:.2}\t({:.6})\n",
        a.both_d0, a.a_d0_b_d1, a.a_d1_b_d0, a.both_d1, a.kappa, a.kappa
    );
    print!("{text}");
    run.write("agreement.txt", &text)?;
    run.write("agreement.json", serde_json::to_string_pretty(&a)?)?;
    run.finish()?;
    Ok(())
}

pub fn synth(settings: &Settings, scale: f64) -> Result<()> {
    anyhow::ensure!(scale > 0.0 && scale.is_finite(), "scale must be positive, got {scale}");
    let mut run = Run::new("synth", settings);
    let cfg = SynthConfig {
        scale,
        seed: settings.seed,
        ..SynthConfig::default()
    };
    let corpus = synthetic_corpus(&cfg)?;
    run.set_corpus_hash(corpus.content_hash());
    let dir = run.path("synthetic");
    let manifest = write_collection(&corpus, &dir)?;
    println!("{}", manifest.display());
    run.record(dir);
    run.finish()?;
    Ok(())
}

pub struct ServeOptions {
    pub addr: SocketAddr,
    pub state_dir: Option<PathBuf>,
    pub token: Option<String>,
    pub snapshot_every: u64,
}

pub fn serve(settings: &Settings, o: ServeOptions) -> Result<()> {
    let mut run = Run::new("serve", settings);
    let corpus = load(settings, &mut run)?;
    let data_dir = o.state_dir.unwrap_or_else(|| run.path("review"));
    let cfg = ServiceConfig {
        data_dir: Some(data_dir.clone()),
        snapshot_every: o.snapshot_every,
        token: o.token,
        seed: settings.seed,
    };
    let service = Arc::new(ReviewService::new(corpus, cfg)?);
    run.record(data_dir);
    run.finish()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(delib_review::serve(service, o.addr))?;
    Ok(())
}

/// Scope names accepted on the command line.
pub fn parse_scope(s: &str) -> std::result::Result<LabelScope, String> {
    s.parse().map_err(|_| format!("expected d0, d0t0 or d0t0e0, got {s:?}"))
}
