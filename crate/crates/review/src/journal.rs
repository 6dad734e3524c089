//! Append-only decision journal with a current-decision view and snapshots.
//!
//! Files under the journal directory:
//!
//! * `decisions.jsonl`: one [`Decision`] per line, in `seq` order.
//! * `snapshot.json`: the current-decision view after the first `len`
//!   decisions, rewritten every `snapshot_every` appends.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use delib_core::corpus::Label;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

pub const JOURNAL_FILE: &str = "decisions.jsonl";
pub const SNAPSHOT_FILE: &str = "snapshot.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    /// Position in the journal, from 0.
    pub seq: u64,
    pub paragraph_id: String,
    pub label: Label,
    pub reviewer: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    /// Active model version when the decision was made.
    pub version: Option<u64>,
}

/// Latest decision per (paragraph, reviewer).
pub type CurrentView = BTreeMap<(String, String), Decision>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Snapshot {
    len: u64,
    current: Vec<Decision>,
}

pub fn apply(view: &mut CurrentView, d: &Decision) {
    view.insert((d.paragraph_id.clone(), d.reviewer.clone()), d.clone());
}

/// Rebuilds the current view from a decision history.
pub fn replay<'a>(decisions: impl IntoIterator<Item = &'a Decision>) -> CurrentView {
    let mut view = CurrentView::new();
    for d in decisions {
        apply(&mut view, d);
    }
    view
}

#[derive(Debug)]
pub struct Journal {
    dir: Option<PathBuf>,
    snapshot_every: u64,
    history: Vec<Decision>,
    current: CurrentView,
}

fn read_journal(path: &Path) -> Result<Vec<Decision>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| ServiceError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ServiceError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Decision = serde_json::from_str(&line)
            .map_err(|e| ServiceError::Journal(format!("{}:{}: {e}", path.display(), i + 1)))?;
        if d.seq != out.len() as u64 {
            return Err(ServiceError::Journal(format!(
                "{}:{}: expected seq {}, found {}",
                path.display(),
                i + 1,
                out.len(),
                d.seq
            )));
        }
        out.push(d);
    }
    Ok(out)
}

impl Journal {
    /// A journal kept only in memory.
    pub fn in_memory() -> Journal {
        Journal {
            dir: None,
            snapshot_every: 0,
            history: Vec::new(),
            current: CurrentView::new(),
        }
    }

    /// Opens (or creates) a journal directory. The current view starts from
    /// the snapshot and replays the decisions after it.
    pub fn open(dir: &Path, snapshot_every: u64) -> Result<Journal> {
        fs::create_dir_all(dir).map_err(|e| ServiceError::io(dir, e))?;
        let history = read_journal(&dir.join(JOURNAL_FILE))?;
        let snap_path = dir.join(SNAPSHOT_FILE);
        let (start, mut current) = if snap_path.exists() {
            let text = fs::read_to_string(&snap_path).map_err(|e| ServiceError::io(&snap_path, e))?;
            let snap: Snapshot =
                serde_json::from_str(&text).map_err(|e| ServiceError::Journal(format!("{}: {e}", snap_path.display())))?;
            if snap.len > history.len() as u64 {
                return Err(ServiceError::Journal(format!(
                    "snapshot covers {} decisions but the journal has {}",
                    snap.len,
                    history.len()
                )));
            }
            (snap.len as usize, replay(&snap.current))
        } else {
            (0, CurrentView::new())
        };
        for d in &history[start..] {
            apply(&mut current, d);
        }
        Ok(Journal {
            dir: Some(dir.to_path_buf()),
            snapshot_every,
            history,
            current,
        })
    }

    pub fn history(&self) -> &[Decision] {
        &self.history
    }

    pub fn current(&self) -> &CurrentView {
        &self.current
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Appends a decision, assigning its `seq`, and persists it before
    /// updating the in-memory view.
    pub fn append(
        &mut self,
        paragraph_id: String,
        label: Label,
        reviewer: String,
        timestamp: u64,
        version: Option<u64>,
    ) -> Result<Decision> {
        let d = Decision {
            seq: self.history.len() as u64,
            paragraph_id,
            label,
            reviewer,
            timestamp,
            version,
        };
        if let Some(dir) = &self.dir {
            let path = dir.join(JOURNAL_FILE);
            let mut f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| ServiceError::io(&path, e))?;
            let mut line = serde_json::to_string(&d).map_err(|e| ServiceError::Journal(e.to_string()))?;
            line.push('\n');
            f.write_all(line.as_bytes()).map_err(|e| ServiceError::io(&path, e))?;
            f.sync_data().map_err(|e| ServiceError::io(&path, e))?;
        }
        apply(&mut self.current, &d);
        self.history.push(d.clone());
        if self.snapshot_every > 0 && self.history.len() as u64 % self.snapshot_every == 0 {
            self.write_snapshot()?;
        }
        Ok(d)
    }

    /// Writes the current view atomically (temporary file, then rename).
    pub fn write_snapshot(&self) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let snap = Snapshot {
            len: self.history.len() as u64,
            current: self.current.values().cloned().collect(),
        };
        let path = dir.join(SNAPSHOT_FILE);
        let tmp = dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        let text = serde_json::to_string(&snap).map_err(|e| ServiceError::Journal(e.to_string()))?;
        fs::write(&tmp, text).map_err(|e| ServiceError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| ServiceError::io(&path, e))?;
        Ok(())
    }

    /// Full history of one paragraph, oldest first.
    pub fn paragraph_history(&self, paragraph_id: &str) -> Vec<Decision> {
        self.history
            .iter()
            .filter(|d| d.paragraph_id == paragraph_id)
            .cloned()
            .collect()
    }

    /// Most recent decision on a paragraph by any reviewer.
    pub fn latest(&self, paragraph_id: &str) -> Option<&Decision> {
        self.current
            .range((paragraph_id.to_string(), String::new())..)
            .take_while(|((p, _), _)| p == paragraph_id)
            .map(|(_, d)| d)
            .max_by_key(|d| d.seq)
    }

    /// Latest decision per paragraph across reviewers, considering only the
    /// first `len` journal entries.
    pub fn latest_per_paragraph(&self, len: usize) -> BTreeMap<String, Decision> {
        let mut out = BTreeMap::new();
        for d in &self.history[..len.min(self.history.len())] {
            out.insert(d.paragraph_id.clone(), d.clone());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn add(j: &mut Journal, p: &str, l: Label, r: &str) -> Decision {
        j.append(p.into(), l, r.into(), 1000 + j.len() as u64, None).unwrap()
    }

    #[test]
    fn history_and_current() {
        let mut j = Journal::in_memory();
        add(&mut j, "p1", Label::D1, "A");
        add(&mut j, "p1", Label::D0, "A");
        add(&mut j, "p1", Label::D1, "B");
        assert_eq!(j.paragraph_history("p1").len(), 3);
        assert_eq!(j.current().len(), 2);
        assert_eq!(j.current()[&("p1".into(), "A".into())].label, Label::D0);
        assert_eq!(j.latest("p1").unwrap().reviewer, "B");
        assert_eq!(j.latest_per_paragraph(2)["p1"].label, Label::D0);
        assert!(j.latest("p2").is_none());
    }

    #[test]
    fn reopen_with_and_without_snapshot() {
        let dir = tempfile::tempdir().unwrap();
        let mut j = Journal::open(dir.path(), 3).unwrap();
        for i in 0..7 {
            let l = if i % 2 == 0 { Label::D1 } else { Label::D0 };
            add(&mut j, &format!("p{}", i % 3), l, "A");
        }
        assert!(dir.path().join(SNAPSHOT_FILE).exists());
        let back = Journal::open(dir.path(), 3).unwrap();
        assert_eq!(back.current(), j.current());
        assert_eq!(back.history(), j.history());
        fs::remove_file(dir.path().join(SNAPSHOT_FILE)).unwrap();
        let full = Journal::open(dir.path(), 3).unwrap();
        assert_eq!(full.current(), j.current());
    }

    #[test]
    fn corrupt_sequence_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut j = Journal::open(dir.path(), 0).unwrap();
        add(&mut j, "p", Label::D1, "A");
        let path = dir.path().join(JOURNAL_FILE);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, format!("{text}{text}")).unwrap();
        assert!(matches!(Journal::open(dir.path(), 0), Err(ServiceError::Journal(_))));
    }
}
