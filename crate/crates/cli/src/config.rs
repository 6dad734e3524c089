//! Settings merged from flags, an optional TOML file and the environment.
//! Flags win over the file; the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use delib_core::corpus::LabelScope;
use delib_core::experiments::{DataSpec, DEFAULT_FOLDS};
use delib_core::model::Family;
use serde::{Deserialize, Serialize};

pub const DATA_DIR_ENV: &str = "DELIB_DATA_DIR";
pub const MANIFEST_NAME: &str = "manifest.jsonl";
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_TRAIN: &str = "A:K1,K2,K3,K5";

/// Keys accepted in the configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub manifest: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub scope: Option<String>,
    pub train: Option<String>,
    pub test: Option<String>,
    pub folds: Option<usize>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct FlagValues {
    pub manifest: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub model: Option<Family>,
    pub scope: Option<LabelScope>,
    pub train: Option<DataSpec>,
    pub test: Option<DataSpec>,
    pub folds: Option<usize>,
    pub jobs: Option<usize>,
}

/// Effective settings of one run, recorded in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub manifest: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub model: Option<Family>,
    pub scope: LabelScope,
    pub train: DataSpec,
    pub test: Option<DataSpec>,
    pub folds: usize,
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn merge(flags: FlagValues, file: FileConfig, data_dir: Option<PathBuf>) -> Result<Settings> {
        let model = match (flags.model, file.model) {
            (Some(m), _) => Some(m),
            (None, Some(s)) => Some(s.parse::<Family>()?),
            (None, None) => None,
        };
        let scope = match (flags.scope, file.scope) {
            (Some(s), _) => s,
            (None, Some(s)) => s.parse()?,
            (None, None) => LabelScope::D0T0,
        };
        let train = match (flags.train, file.train) {
            (Some(t), _) => t,
            (None, Some(s)) => s.parse()?,
            (None, None) => DEFAULT_TRAIN.parse()?,
        };
        let test = match (flags.test, file.test) {
            (Some(t), _) => Some(t),
            (None, Some(s)) => Some(s.parse()?),
            (None, None) => None,
        };
        let folds = flags.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
        anyhow::ensure!(folds >= 2, "folds must be at least 2, got {folds}");
        let jobs = flags.jobs.or(file.jobs);
        anyhow::ensure!(jobs != Some(0), "jobs must be at least 1");
        Ok(Settings {
            manifest: flags
                .manifest
                .or(file.manifest)
                .or_else(|| data_dir.map(|d| d.join(MANIFEST_NAME))),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from("results")),
            model,
            scope,
            train,
            test,
            folds,
            jobs,
        })
    }

    pub fn manifest(&self) -> Result<&Path> {
        self.manifest.as_deref().with_context(|| {
            format!("no collection manifest: pass --manifest, set it in the config file, or set {DATA_DIR_ENV}")
        })
    }

    /// The test spec, or the training spec for cross-validation.
    pub fn test_or_train(&self) -> &DataSpec {
        self.test.as_ref().unwrap_or(&self.train)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file_and_file_over_defaults() {
        let file: FileConfig = toml::from_str(
            "seed = 3\nfolds = 10\nscope = \"d0\"\nmodel = \"svm\"\nout = \"from-file\"\ntrain = \"B:K2\"",
        )
        .unwrap();
        let flags = FlagValues {
            seed: Some(11),
            model: Some(Family::Lr),
            ..FlagValues::default()
        };
        let s = Settings::merge(flags, file, None).unwrap();
        assert_eq!(s.seed, 11);
        assert_eq!(s.model, Some(Family::Lr));
        assert_eq!(s.folds, 10);
        assert_eq!(s.scope, LabelScope::D0);
        assert_eq!(s.out, PathBuf::from("from-file"));
        assert_eq!(s.train.to_string(), "B: K2");
        assert!(s.manifest().is_err());
    }

    #[test]
    fn defaults_and_data_dir() {
        let s = Settings::merge(FlagValues::default(), FileConfig::default(), Some("/data".into())).unwrap();
        assert_eq!(s.seed, DEFAULT_SEED);
        assert_eq!(s.folds, DEFAULT_FOLDS);
        assert_eq!(s.scope, LabelScope::D0T0);
        assert_eq!(s.manifest().unwrap(), Path::new("/data/manifest.jsonl"));
        assert_eq!(s.test_or_train(), &s.train);
    }

    #[test]
    fn bad_file_values_are_errors() {
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
        let file = FileConfig {
            folds: Some(1),
            ..FileConfig::default()
        };
        assert!(Settings::merge(FlagValues::default(), file, None).is_err());
        let file = FileConfig {
            scope: Some("d9".into()),
            ..FileConfig::default()
        };
        assert!(Settings::merge(FlagValues::default(), file, None).is_err());
    }
}
