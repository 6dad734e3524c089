//! Output bookkeeping: every file a run writes goes under the output
//! directory and is listed in the run's manifest.

use std::fs;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::Settings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: String,
    pub config: Settings,
    pub seed: u64,
    pub corpus_hash: Option<String>,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
}

pub struct Run {
    manifest: RunManifest,
    out: PathBuf,
}

impl Run {
    pub fn new(command: &str, settings: &Settings) -> Run {
        Run {
            out: settings.out.clone(),
            manifest: RunManifest {
                command: command.into(),
                argv: std::env::args().collect(),
                version: env!("CARGO_PKG_VERSION").into(),
                config: settings.clone(),
                seed: settings.seed,
                corpus_hash: None,
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_millis() as u64)
                    .unwrap_or(0),
                outputs: Vec::new(),
            },
        }
    }

    pub fn set_corpus_hash(&mut self, hash: String) {
        self.manifest.corpus_hash = Some(hash);
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Writes `contents` to `name` under the output directory.
    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.record(path.clone());
        Ok(path)
    }

    /// Records a file written under the output directory by other means.
    pub fn record(&mut self, path: PathBuf) {
        log::info!("wrote {}", path.display());
        self.manifest.outputs.push(path);
    }

    /// Writes `<command>.run.json` and returns the manifest.
    pub fn finish(mut self) -> Result<RunManifest> {
        let name = format!("{}.run.json", self.manifest.command);
        let path = self.out.join(&name);
        self.manifest.outputs.push(path.clone());
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{FileConfig, FlagValues};

    #[test]
    fn manifest_lists_every_output() {
        let dir = tempfile::tempdir().unwrap();
        let flags = FlagValues {
            out: Some(dir.path().join("out")),
            seed: Some(5),
            ..FlagValues::default()
        };
        let settings = Settings::merge(flags, FileConfig::default(), None).unwrap();
        let mut run = Run::new("demo", &settings);
        run.set_corpus_hash("abc".into());
        run.write("a.txt", "x").unwrap();
        let m = run.finish().unwrap();
        assert_eq!(m.seed, 5);
        assert_eq!(m.outputs.len(), 2);
        let text = fs::read_to_string(dir.path().join("out/demo.run.json")).unwrap();
        let back: RunManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
