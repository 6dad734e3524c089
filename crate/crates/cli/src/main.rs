//! `delib`: ingestion, tuning, training, evaluation, table reproduction and
//! the review service.

mod commands;
mod config;
mod run;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use delib_core::corpus::LabelScope;
use delib_core::experiments::DataSpec;
use delib_core::model::Family;

use config::{FileConfig, FlagValues, Settings, DATA_DIR_ENV};

#[derive(Parser, Debug)]
#[command(name = "delib", version, about = "Deliberative process privilege classification")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Collection manifest (JSON lines).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Default data directory holding manifest.jsonl.
    #[arg(long, global = true, env = DATA_DIR_ENV, hide_env_values = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// lr, svm, bio, keyword or all1s.
    #[arg(long, global = true, value_parser = parse_family)]
    model: Option<Family>,
    /// d0, d0t0 or d0t0e0.
    #[arg(long, global = true, value_parser = commands::parse_scope)]
    scope: Option<LabelScope>,
    /// Training data, e.g. A:K1,K2,K3,K5.
    #[arg(long, global = true, value_parser = parse_spec)]
    train: Option<DataSpec>,
    /// Test data; defaults to cross-validation on the training data.
    #[arg(long, global = true, value_parser = parse_spec)]
    test: Option<DataSpec>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(2..))]
    folds: Option<u64>,
    /// Worker threads for folds, topics and grid points.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load and validate the collection; print per-batch counts.
    Ingest,
    /// Grid-search one family on a validation split of --train.
    Tune,
    /// Tune and train one family on --train; save the model.
    Train,
    /// Apply a saved model to --test (or --train).
    Predict {
        /// Model file written by `train`.
        #[arg(long)]
        load: PathBuf,
    },
    /// Evaluate families under the condition implied by --train and --test.
    Eval,
    /// Reproduce a results table.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(5..=12))]
        id: u8,
    },
    /// Cohen's kappa between reviewers A and B.
    Agreement {
        /// Use the published agreement counts instead of the collection.
        #[arg(long)]
        published: bool,
    },
    /// Leave-one-topic-out results (table 11).
    Topics,
    /// Largest and smallest LR weights (table 12).
    TopWords,
    /// Write a seeded synthetic collection with the published layout to
    /// <out>/synthetic.
    Synth {
        /// Fraction of the published batch sizes.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Start the review service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Journal and model directory; defaults to <out>/review.
        #[arg(long)]
        state_dir: Option<PathBuf>,
        /// Bearer token required by the API.
        #[arg(long, env = "DELIB_TOKEN", hide_env_values = true)]
        token: Option<String>,
        #[arg(long, default_value_t = 100)]
        snapshot_every: u64,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: delib_core::Error| e.to_string())
}

fn parse_spec(s: &str) -> Result<DataSpec, String> {
    s.parse().map_err(|e: delib_core::Error| e.to_string())
}

fn settings(common: Common) -> Result<Settings> {
    let file = match &common.config {
        Some(p) => FileConfig::read(p)?,
        None => FileConfig::default(),
    };
    let flags = FlagValues {
        manifest: common.manifest,
        seed: common.seed,
        out: common.out,
        model: common.model,
        scope: common.scope,
        train: common.train,
        test: common.test,
        folds: common.folds.map(|f| f as usize),
        jobs: common.jobs.map(|j| j as usize),
    };
    Settings::merge(flags, file, common.data_dir)
}

fn dispatch(cli: Cli) -> Result<()> {
    let settings = settings(cli.common)?;
    if let Some(jobs) = settings.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Ingest => commands::ingest(&settings),
        Command::Tune => commands::tune(&settings),
        Command::Train => commands::train(&settings),
        Command::Predict { load } => commands::predict(&settings, &load),
        Command::Eval => commands::eval(&settings),
        Command::Table { id } => commands::table(&settings, id),
        Command::Agreement { published } => commands::agreement(&settings, published),
        Command::Topics => commands::table(&settings, 11),
        Command::TopWords => commands::table(&settings, 12),
        Command::Synth { scale } => commands::synth(&settings, scale),
        Command::Serve {
            addr,
            state_dir,
            token,
            snapshot_every,
        } => commands::serve(
            &settings,
            commands::ServeOptions {
                addr,
                state_dir,
                token,
                snapshot_every,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
