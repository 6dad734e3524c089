//! The uniform paragraph-model contract over every classifier family, and
//! versioned model files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bio::{BioParams, BioTagger};
use crate::classifiers::{train_lr, train_svm, AllOnes, Kernel, KeywordModel, LrModel, SvmModel};
use crate::corpus::DataSet;
use crate::error::{Error, Result};
use crate::features::{Stemmer, TokenizerConfig, Vocabulary};

pub const MODEL_FORMAT: &str = "delib-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "lr")]
    Lr,
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "bio")]
    Bio,
    #[serde(rename = "keyword")]
    Keyword,
    #[serde(rename = "all1s")]
    AllOnes,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Lr, Family::Svm, Family::Bio, Family::Keyword, Family::AllOnes];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Lr => "lr",
            Family::Svm => "svm",
            Family::Bio => "bio",
            Family::Keyword => "keyword",
            Family::AllOnes => "all1s",
        }
    }

    /// Row name in result tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Family::Lr => "LR",
            Family::Svm => "SVM",
            Family::Bio => "BIO",
            Family::Keyword => "Keyword",
            Family::AllOnes => "All-1s",
        }
    }

    pub fn is_trained(self) -> bool {
        matches!(self, Family::Lr | Family::Svm | Family::Bio)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model family {s:?}; expected lr, svm, bio, keyword or all1s")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub use_idf: bool,
    pub stemmer: Stemmer,
    pub c: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub use_idf: bool,
    pub stemmer: Stemmer,
    pub c: f64,
    pub kernel: Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum HyperParams {
    Lr(LrParams),
    Svm(SvmParams),
    Bio(BioParams),
    Keyword,
    #[serde(rename = "all1s")]
    AllOnes,
}

fn stemmer_name(s: Stemmer) -> &'static str {
    match s {
        Stemmer::None => "none",
        Stemmer::Porter => "porter",
    }
}

impl HyperParams {
    pub fn family(&self) -> Family {
        match self {
            HyperParams::Lr(_) => Family::Lr,
            HyperParams::Svm(_) => Family::Svm,
            HyperParams::Bio(_) => Family::Bio,
            HyperParams::Keyword => Family::Keyword,
            HyperParams::AllOnes => Family::AllOnes,
        }
    }

    /// (axis name, value) pairs in grid declaration order.
    pub fn axes(&self) -> Vec<(&'static str, String)> {
        match self {
            HyperParams::Lr(p) => vec![
                ("use_idf", p.use_idf.to_string()),
                ("stemmer", stemmer_name(p.stemmer).into()),
                ("C", p.c.to_string()),
                ("threshold", p.threshold.to_string()),
            ],
            HyperParams::Svm(p) => vec![
                ("use_idf", p.use_idf.to_string()),
                ("stemmer", stemmer_name(p.stemmer).into()),
                ("C", p.c.to_string()),
                ("kernel", p.kernel.name().into()),
                (
                    "gamma",
                    match p.kernel {
                        Kernel::Linear => "-".into(),
                        Kernel::Rbf { gamma } => gamma.to_string(),
                    },
                ),
            ],
            HyperParams::Bio(p) => vec![
                ("C1", p.c1.to_string()),
                ("C2", p.c2.to_string()),
                ("overlap", p.overlap.percent().to_string()),
            ],
            HyperParams::Keyword | HyperParams::AllOnes => Vec::new(),
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family())?;
        for (k, v) in self.axes() {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: bool,
    /// In [0, 1]: LR probability, logistic of the SVM decision value, BIO
    /// span fraction, or the 0/1 rule output.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Model {
    Lr {
        params: LrParams,
        vocabulary: Vocabulary,
        model: LrModel,
    },
    Svm {
        params: SvmParams,
        vocabulary: Vocabulary,
        model: SvmModel,
    },
    Bio {
        params: BioParams,
        tagger: BioTagger,
    },
    Keyword,
    #[serde(rename = "all1s")]
    AllOnes,
}

impl Model {
    pub fn train(params: &HyperParams, data: &DataSet) -> Result<Model> {
        match *params {
            HyperParams::Lr(p) => {
                let vocabulary = Vocabulary::build(&data.texts(), TokenizerConfig::new(p.stemmer), p.use_idf)?;
                let x = vocabulary.vectorize_all(&data.texts());
                let model = train_lr(&x, &data.labels(), vocabulary.len(), p.c, p.threshold)?;
                Ok(Model::Lr {
                    params: p,
                    vocabulary,
                    model,
                })
            }
            HyperParams::Svm(p) => {
                let vocabulary = Vocabulary::build(&data.texts(), TokenizerConfig::new(p.stemmer), p.use_idf)?;
                let x = vocabulary.vectorize_all(&data.texts());
                let model = train_svm(&x, &data.labels(), vocabulary.len(), p.kernel, p.c)?;
                Ok(Model::Svm {
                    params: p,
                    vocabulary,
                    model,
                })
            }
            HyperParams::Bio(p) => Ok(Model::Bio {
                params: p,
                tagger: BioTagger::train(data, p)?,
            }),
            HyperParams::Keyword => Ok(Model::Keyword),
            HyperParams::AllOnes => Ok(Model::AllOnes),
        }
    }

    pub fn params(&self) -> HyperParams {
        match self {
            Model::Lr { params, .. } => HyperParams::Lr(*params),
            Model::Svm { params, .. } => HyperParams::Svm(*params),
            Model::Bio { params, .. } => HyperParams::Bio(*params),
            Model::Keyword => HyperParams::Keyword,
            Model::AllOnes => HyperParams::AllOnes,
        }
    }

    pub fn family(&self) -> Family {
        self.params().family()
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        match self {
            Model::Lr { vocabulary, .. } | Model::Svm { vocabulary, .. } => Some(vocabulary),
            _ => None,
        }
    }

    /// One prediction per example, in order. Paragraphs of the same document
    /// are tagged together by the sequence model.
    pub fn predict(&self, data: &DataSet) -> Vec<Prediction> {
        let from_pair = |(label, score): (bool, f64)| Prediction { label, score };
        match self {
            Model::Lr { vocabulary, model, .. } => data
                .examples
                .iter()
                .map(|e| from_pair(model.predict(&vocabulary.vectorize(&e.text))))
                .collect(),
            Model::Svm { vocabulary, model, .. } => data
                .examples
                .iter()
                .map(|e| from_pair(model.predict(&vocabulary.vectorize(&e.text))))
                .collect(),
            Model::Bio { tagger, .. } => tagger.predict(data).into_iter().map(from_pair).collect(),
            Model::Keyword => data
                .examples
                .iter()
                .map(|e| {
                    let label = KeywordModel.predict(&e.text);
                    Prediction {
                        label,
                        score: if label { 1.0 } else { 0.0 },
                    }
                })
                .collect(),
            Model::AllOnes => data
                .examples
                .iter()
                .map(|e| Prediction {
                    label: AllOnes.predict(&e.text),
                    score: 1.0,
                })
                .collect(),
        }
    }

    pub fn predict_labels(&self, data: &DataSet) -> Vec<bool> {
        self.predict(data).into_iter().map(|p| p.label).collect()
    }

    fn restore(&mut self) {
        if let Model::Lr { vocabulary, .. } | Model::Svm { vocabulary, .. } = self {
            vocabulary.rebuild_index();
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            params: self.params(),
            vocabulary_hash: self.vocabulary().map(Vocabulary::hash),
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_FORMAT_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model file {} v{}",
                file.format, file.version
            )));
        }
        let mut model = file.model;
        model.restore();
        if model.vocabulary().map(Vocabulary::hash) != file.vocabulary_hash {
            return Err(Error::Integrity("vocabulary hash does not match model file".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Model> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    params: HyperParams,
    vocabulary_hash: Option<String>,
    model: Model,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bio::OverlapThreshold;
    use crate::corpus::Example;

    fn toy() -> DataSet {
        let rows = [
            ("d1", "We recommend the first option.", true),
            ("d1", "Thanks, Bruce", false),
            ("d2", "I suggest a different option.", true),
            ("d2", "See you at noon today", false),
            ("d3", "Another option we recommend.", true),
            ("d3", "Call me today", false),
        ];
        DataSet {
            examples: rows
                .iter()
                .enumerate()
                .map(|(i, (d, t, l))| Example {
                    paragraph_id: format!("{d}/{i}"),
                    document_id: d.to_string(),
                    ordinal: i,
                    text: t.to_string(),
                    label: *l,
                })
                .collect(),
        }
    }

    fn all_params() -> Vec<HyperParams> {
        vec![
            HyperParams::Lr(LrParams {
                use_idf: true,
                stemmer: Stemmer::Porter,
                c: 10.0,
                threshold: 0.5,
            }),
            HyperParams::Svm(SvmParams {
                use_idf: false,
                stemmer: Stemmer::None,
                c: 10.0,
                kernel: Kernel::Rbf { gamma: 0.1 },
            }),
            HyperParams::Svm(SvmParams {
                use_idf: true,
                stemmer: Stemmer::None,
                c: 10.0,
                kernel: Kernel::Linear,
            }),
            HyperParams::Bio(BioParams {
                c1: 0.0,
                c2: 0.01,
                overlap: OverlapThreshold::new(50).unwrap(),
            }),
            HyperParams::Keyword,
            HyperParams::AllOnes,
        ]
    }

    #[test]
    fn every_family_fits_the_toy_set() {
        let data = toy();
        for p in all_params() {
            let m = Model::train(&p, &data).unwrap();
            let preds = m.predict(&data);
            assert_eq!(preds.len(), data.len());
            assert!(preds.iter().all(|p| (0.0..=1.0).contains(&p.score)));
            if p.family().is_trained() {
                assert_eq!(m.predict_labels(&data), data.labels(), "{p}");
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let data = toy();
        for p in all_params() {
            let m = Model::train(&p, &data).unwrap();
            let back = Model::from_json(&m.to_json().unwrap()).unwrap();
            assert_eq!(back.predict(&data), m.predict(&data));
            assert_eq!(back.params(), p);
        }
    }

    #[test]
    fn family_names() {
        assert_eq!("all1s".parse::<Family>().unwrap(), Family::AllOnes);
        assert_eq!("SVM".parse::<Family>().unwrap(), Family::Svm);
        assert!("tree".parse::<Family>().is_err());
    }
}
