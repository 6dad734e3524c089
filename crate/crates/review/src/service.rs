//! Review state and operations, independent of the HTTP layer.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use delib_core::bio::{BioParams, OverlapThreshold};
use delib_core::corpus::{binarize, Batch, Corpus, DataSet, Example, Label, LabelScope};
use delib_core::features::Stemmer;
use delib_core::model::{Family, HyperParams, LrParams, Model, Prediction, SvmParams};
use delib_core::classifiers::Kernel;
use delib_core::tuning::{tune_and_train, ParamGrid, TuneConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, ServiceError};
use crate::journal::{Decision, Journal};

const MODELS_DIR: &str = "models";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServiceConfig {
    /// Where the journal, snapshots and model versions live; in memory if
    /// unset.
    pub data_dir: Option<PathBuf>,
    /// Snapshot the current view every this many decisions (0 disables).
    pub snapshot_every: u64,
    /// Static bearer token required on every route but `/health`.
    pub token: Option<String>,
    /// Seed for validation splits during retraining.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVersion {
    pub id: u64,
    pub family: Family,
    pub params: HyperParams,
    pub scope: LabelScope,
    /// sha256 over the (paragraph id, binary label) training pairs.
    pub decision_hash: String,
    /// Journal prefix the model was trained on.
    pub journal_len: usize,
    pub training_examples: usize,
    pub validation_f1: Option<f64>,
    /// Milliseconds since the Unix epoch.
    pub created_at: u64,
}

/// An immutable trained version with its predictions over the whole corpus.
pub struct ActiveModel {
    pub info: ModelVersion,
    pub model: Model,
    predictions: HashMap<String, Vec<Prediction>>,
}

#[derive(Serialize, Deserialize)]
struct StoredVersion {
    info: ModelVersion,
    model: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model_version: Option<u64>,
    pub documents: usize,
    pub paragraphs: usize,
    pub decisions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueEntry {
    pub document_id: String,
    pub batch: Batch,
    pub topic: String,
    pub paragraphs: usize,
    pub predicted_positive: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Queue {
    pub model_version: u64,
    pub documents: Vec<QueueEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParagraphPrediction {
    pub paragraph_id: String,
    pub ordinal: usize,
    pub text: String,
    pub score: f64,
    pub predicted: bool,
    /// Latest decision on the paragraph by any reviewer.
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentPredictions {
    pub document_id: String,
    pub model_version: u64,
    pub paragraphs: Vec<ParagraphPrediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub paragraph_id: String,
    pub label: String,
    pub reviewer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionHistory {
    pub paragraph_id: String,
    /// Latest decision per reviewer.
    pub current: Vec<Decision>,
    pub history: Vec<Decision>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainRequest {
    pub family: Family,
    #[serde(default = "default_scope")]
    pub scope: LabelScope,
    /// Fixed parameters; tuned by grid search when absent.
    #[serde(default)]
    pub params: Option<HyperParams>,
}

fn default_scope() -> LabelScope {
    LabelScope::D0T0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub paragraph_id: String,
    pub document_id: String,
    pub label: Label,
    pub reviewer: String,
    pub score: f64,
    /// Model probability of the class opposite to the human label.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inconsistencies {
    pub model_version: u64,
    pub threshold: f64,
    pub items: Vec<Inconsistency>,
}

/// Parameters used when a family is retrained without tuning, or when the
/// decision set is too small to hold out a validation split.
pub fn default_params(family: Family) -> HyperParams {
    match family {
        Family::Lr => HyperParams::Lr(LrParams {
            use_idf: true,
            stemmer: Stemmer::None,
            c: 1.0,
            threshold: 0.5,
        }),
        Family::Svm => HyperParams::Svm(SvmParams {
            use_idf: true,
            stemmer: Stemmer::None,
            c: 1.0,
            kernel: Kernel::Linear,
        }),
        Family::Bio => HyperParams::Bio(BioParams {
            c1: 0.1,
            c2: 0.1,
            overlap: OverlapThreshold::new(50).expect("valid overlap"),
        }),
        Family::Keyword => HyperParams::Keyword,
        Family::AllOnes => HyperParams::AllOnes,
    }
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

pub struct ReviewService {
    corpus: Arc<Corpus>,
    /// paragraph id -> (document index, paragraph index)
    locate: HashMap<String, (usize, usize)>,
    doc_index: HashMap<String, usize>,
    journal: Mutex<Journal>,
    versions: RwLock<Vec<Arc<ActiveModel>>>,
    active: RwLock<Option<Arc<ActiveModel>>>,
    retrain_lock: Mutex<()>,
    config: ServiceConfig,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl ReviewService {
    pub fn new(corpus: Corpus, config: ServiceConfig) -> Result<ReviewService> {
        let journal = match &config.data_dir {
            Some(dir) => Journal::open(dir, config.snapshot_every)?,
            None => Journal::in_memory(),
        };
        let mut locate = HashMap::new();
        let mut doc_index = HashMap::new();
        for (d, doc) in corpus.documents.iter().enumerate() {
            doc_index.insert(doc.id.clone(), d);
            for (p, para) in doc.paragraphs.iter().enumerate() {
                locate.insert(para.id.clone(), (d, p));
            }
        }
        let svc = ReviewService {
            corpus: Arc::new(corpus),
            locate,
            doc_index,
            journal: Mutex::new(journal),
            versions: RwLock::new(Vec::new()),
            active: RwLock::new(None),
            retrain_lock: Mutex::new(()),
            config,
        };
        svc.load_versions()?;
        Ok(svc)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    fn load_versions(&self) -> Result<()> {
        let Some(dir) = &self.config.data_dir else { return Ok(()) };
        let dir = dir.join(MODELS_DIR);
        if !dir.exists() {
            return Ok(());
        }
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| ServiceError::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut loaded = Vec::new();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| ServiceError::io(&path, e))?;
            let stored: StoredVersion =
                serde_json::from_str(&text).map_err(|e| ServiceError::Journal(format!("{}: {e}", path.display())))?;
            let model = Model::from_json(&stored.model.to_string())?;
            loaded.push(Arc::new(self.activate_prepare(stored.info, model)));
        }
        loaded.sort_by_key(|m| m.info.id);
        let last = loaded.last().cloned();
        *self.versions.write().unwrap_or_else(|p| p.into_inner()) = loaded;
        *self.active.write().unwrap_or_else(|p| p.into_inner()) = last;
        Ok(())
    }

    fn activate_prepare(&self, info: ModelVersion, model: Model) -> ActiveModel {
        let mut predictions = HashMap::with_capacity(self.corpus.documents.len());
        for doc in &self.corpus.documents {
            let data = DataSet {
                examples: doc
                    .paragraphs
                    .iter()
                    .map(|p| Example {
                        paragraph_id: p.id.clone(),
                        document_id: doc.id.clone(),
                        ordinal: p.ordinal,
                        text: p.text.clone(),
                        label: false,
                    })
                    .collect(),
            };
            predictions.insert(doc.id.clone(), model.predict(&data));
        }
        ActiveModel {
            info,
            model,
            predictions,
        }
    }

    pub fn active(&self) -> Option<Arc<ActiveModel>> {
        self.active.read().unwrap_or_else(|p| p.into_inner()).clone()
    }

    fn require_active(&self) -> Result<Arc<ActiveModel>> {
        self.active()
            .ok_or_else(|| ServiceError::NotReady("no model has been trained; POST /api/v1/retrain first".into()))
    }

    pub fn versions(&self) -> Vec<ModelVersion> {
        self.versions
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .iter()
            .map(|m| m.info.clone())
            .collect()
    }

    pub fn health(&self) -> Health {
        Health {
            status: "ok".into(),
            model_version: self.active().map(|m| m.info.id),
            documents: self.corpus.documents.len(),
            paragraphs: self.locate.len(),
            decisions: lock(&self.journal).len(),
        }
    }

    /// Documents by ascending predicted-positive fraction, ties by id.
    pub fn queue(&self) -> Result<Queue> {
        let active = self.require_active()?;
        let mut documents: Vec<QueueEntry> = self
            .corpus
            .documents
            .iter()
            .map(|doc| {
                let preds = &active.predictions[&doc.id];
                let pos = preds.iter().filter(|p| p.label).count();
                QueueEntry {
                    document_id: doc.id.clone(),
                    batch: doc.batch,
                    topic: doc.topic.name().into(),
                    paragraphs: preds.len(),
                    predicted_positive: pos,
                    fraction: pos as f64 / preds.len().max(1) as f64,
                }
            })
            .collect();
        documents.sort_by(|a, b| {
            // Exact comparison of pos_a / n_a against pos_b / n_b.
            let l = a.predicted_positive * b.paragraphs.max(1);
            let r = b.predicted_positive * a.paragraphs.max(1);
            l.cmp(&r).then_with(|| a.document_id.cmp(&b.document_id))
        });
        Ok(Queue {
            model_version: active.info.id,
            documents,
        })
    }

    pub fn predictions(&self, document_id: &str) -> Result<DocumentPredictions> {
        let &d = self
            .doc_index
            .get(document_id)
            .ok_or_else(|| ServiceError::NotFound(format!("document {document_id}")))?;
        let active = self.require_active()?;
        let doc = &self.corpus.documents[d];
        let journal = lock(&self.journal);
        let paragraphs = doc
            .paragraphs
            .iter()
            .zip(&active.predictions[&doc.id])
            .map(|(p, pred)| ParagraphPrediction {
                paragraph_id: p.id.clone(),
                ordinal: p.ordinal,
                text: p.text.clone(),
                score: pred.score,
                predicted: pred.label,
                decision: journal.latest(&p.id).cloned(),
            })
            .collect();
        Ok(DocumentPredictions {
            document_id: doc.id.clone(),
            model_version: active.info.id,
            paragraphs,
        })
    }

    pub fn submit(&self, req: &DecisionRequest) -> Result<Decision> {
        let label: Label = req
            .label
            .parse()
            .map_err(|e: delib_core::Error| ServiceError::Validation(e.to_string()))?;
        if req.reviewer.trim().is_empty() {
            return Err(ServiceError::Validation("reviewer must not be empty".into()));
        }
        let &(d, _) = self
            .locate
            .get(&req.paragraph_id)
            .ok_or_else(|| ServiceError::NotFound(format!("paragraph {}", req.paragraph_id)))?;
        if label == Label::E0 && self.corpus.documents[d].batch != Batch::E5 {
            return Err(ServiceError::Validation(format!(
                "E0 applies only to batch E5, not paragraph {}",
                req.paragraph_id
            )));
        }
        let version = self.active().map(|m| m.info.id);
        lock(&self.journal).append(req.paragraph_id.clone(), label, req.reviewer.trim().to_string(), now_ms(), version)
    }

    pub fn decisions(&self, paragraph_id: &str) -> Result<DecisionHistory> {
        if !self.locate.contains_key(paragraph_id) {
            return Err(ServiceError::NotFound(format!("paragraph {paragraph_id}")));
        }
        let journal = lock(&self.journal);
        let current = journal
            .current()
            .range((paragraph_id.to_string(), String::new())..)
            .take_while(|((p, _), _)| p == paragraph_id)
            .map(|(_, d)| d.clone())
            .collect();
        Ok(DecisionHistory {
            paragraph_id: paragraph_id.to_string(),
            current,
            history: journal.paragraph_history(paragraph_id),
        })
    }

    /// Binary training set from the latest decision per paragraph within the
    /// first `journal_len` entries, in corpus order.
    pub fn training_set(&self, scope: LabelScope, journal_len: usize) -> DataSet {
        let latest = lock(&self.journal).latest_per_paragraph(journal_len);
        let mut examples = Vec::new();
        for doc in &self.corpus.documents {
            for p in &doc.paragraphs {
                let Some(d) = latest.get(&p.id) else { continue };
                if let Some(label) = binarize(d.label, scope) {
                    examples.push(Example {
                        paragraph_id: p.id.clone(),
                        document_id: doc.id.clone(),
                        ordinal: p.ordinal,
                        text: p.text.clone(),
                        label,
                    });
                }
            }
        }
        DataSet { examples }
    }

    /// Trains a new version on the current decisions and activates it.
    /// Retrains are serialized; readers keep the version they started with.
    pub fn retrain(&self, req: &RetrainRequest) -> Result<ModelVersion> {
        let _guard = lock(&self.retrain_lock);
        let journal_len = lock(&self.journal).len();
        let data = self.training_set(req.scope, journal_len);
        if data.is_empty() {
            return Err(ServiceError::Training(format!(
                "no decisions within scope {}",
                req.scope.as_str()
            )));
        }
        let pos = data.positives();
        if pos == 0 || pos == data.len() {
            return Err(ServiceError::Training(format!(
                "decisions within scope {} cover only one class",
                req.scope.as_str()
            )));
        }
        if let Some(p) = &req.params {
            if p.family() != req.family {
                return Err(ServiceError::Validation(format!(
                    "params are for {} but family is {}",
                    p.family(),
                    req.family
                )));
            }
        }
        let can_tune = pos >= 2 && data.len() - pos >= 2;
        let (model, validation_f1) = match req.params {
            Some(p) => (Model::train(&p, &data)?, None),
            None if req.family.is_trained() && can_tune => {
                let cfg = TuneConfig {
                    seed: self.config.seed,
                    ..TuneConfig::default()
                };
                let (m, t) = tune_and_train(&ParamGrid::default_for(req.family), &data, &cfg)?;
                (m, t.map(|t| t.best_validation_f1))
            }
            None => (Model::train(&default_params(req.family), &data)?, None),
        };

        let mut h = Sha256::new();
        for e in &data.examples {
            h.update(e.paragraph_id.as_bytes());
            h.update([0, u8::from(e.label)]);
        }
        let id = self.versions().last().map_or(1, |v| v.id + 1);
        let info = ModelVersion {
            id,
            family: req.family,
            params: model.params(),
            scope: req.scope,
            decision_hash: hex::encode(h.finalize()),
            journal_len,
            training_examples: data.len(),
            validation_f1,
            created_at: now_ms(),
        };
        if let Some(dir) = &self.config.data_dir {
            let dir = dir.join(MODELS_DIR);
            fs::create_dir_all(&dir).map_err(|e| ServiceError::io(&dir, e))?;
            let stored = StoredVersion {
                info: info.clone(),
                model: serde_json::from_str(&model.to_json()?).map_err(delib_core::Error::from)?,
            };
            let path = dir.join(format!("{id:08}.json"));
            let text = serde_json::to_string(&stored).map_err(delib_core::Error::from)?;
            fs::write(&path, text).map_err(|e| ServiceError::io(&path, e))?;
        }
        let active = Arc::new(self.activate_prepare(info.clone(), model));
        self.versions.write().unwrap_or_else(|p| p.into_inner()).push(active.clone());
        *self.active.write().unwrap_or_else(|p| p.into_inner()) = Some(active);
        log::info!("activated model version {id} ({})", info.params);
        Ok(info)
    }

    /// Decided paragraphs whose model confidence in the opposite class
    /// exceeds `threshold`, most confident first.
    pub fn inconsistencies(&self, threshold: f64) -> Result<Inconsistencies> {
        if !(threshold > 0.5 && threshold < 1.0) {
            return Err(ServiceError::Validation(format!("threshold {threshold} outside (0.5, 1)")));
        }
        let active = self.require_active()?;
        let journal = lock(&self.journal);
        let latest = journal.latest_per_paragraph(journal.len());
        let mut items = Vec::new();
        for (pid, d) in &latest {
            let Some(human) = binarize(d.label, active.info.scope) else { continue };
            let Some(&(di, pi)) = self.locate.get(pid) else { continue };
            let doc = &self.corpus.documents[di];
            let pred = active.predictions[&doc.id][pi];
            let confidence = if human { 1.0 - pred.score } else { pred.score };
            if confidence > threshold {
                items.push(Inconsistency {
                    paragraph_id: pid.clone(),
                    document_id: doc.id.clone(),
                    label: d.label,
                    reviewer: d.reviewer.clone(),
                    score: pred.score,
                    confidence,
                });
            }
        }
        items.sort_by(|a, b| {
            b.confidence
                .partial_cmp(&a.confidence)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.paragraph_id.cmp(&b.paragraph_id))
        });
        Ok(Inconsistencies {
            model_version: active.info.id,
            threshold,
            items,
        })
    }

    /// Writes a snapshot of the current-decision view.
    pub fn snapshot(&self) -> Result<()> {
        lock(&self.journal).write_snapshot()
    }

    /// The current-decision view rebuilt from the full history.
    pub fn replayed_view(&self) -> crate::journal::CurrentView {
        crate::journal::replay(lock(&self.journal).history())
    }

    pub fn current_view(&self) -> crate::journal::CurrentView {
        lock(&self.journal).current().clone()
    }
}
