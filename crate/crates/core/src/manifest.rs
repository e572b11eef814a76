//! Classifier configurations and cascade manifests.
//!
//! A manifest lists stages in order:
//!
//! ```json
//! {"stages": [
//!   {"kind": "lexicon", "config_path": "nrc.json", "name": "NRC"},
//!   {"kind": "pattern", "config_path": "aslog.json", "name": "ASlog"},
//!   {"kind": "linear",  "config_path": "svm.json", "name": "SVM"}
//! ]}
//! ```
//!
//! Relative paths inside a config resolve against the config file's
//! directory; `config_path` resolves against the manifest's directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines::{train_linear, Lexicon, LinearConfig, LinearModel};
use crate::cascade::{
    CascadeSpec, Classifier, LexiconClassifier, LinearClassifier, PatternClassifier, Stage,
};
use crate::corpus::{labeled_sentences, read_corpus, Sentence};
use crate::error::{Error, Result};
use crate::patterns::{ExtractConfig, PatternExtractor};
use crate::stats::{StatsTable, ThresholdParams, UnitKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageKind {
    #[serde(alias = "autoslog", alias = "aslog")]
    Pattern,
    Lexicon,
    Linear,
}

impl StageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StageKind::Pattern => "pattern",
            StageKind::Lexicon => "lexicon",
            StageKind::Linear => "linear",
        }
    }
}

impl std::str::FromStr for StageKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown classifier kind `{s}`"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRef {
    pub kind: StageKind,
    pub config_path: PathBuf,
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: Vec<StageRef>,
}

/// Pattern classifier: a sentence-level table plus thresholds, given inline
/// or through a `params` file such as the output of `tune`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternStageConfig {
    pub stats: PathBuf,
    #[serde(default)]
    pub params: Option<PathBuf>,
    #[serde(default)]
    pub pos: Option<ThresholdParams>,
    #[serde(default)]
    pub neg: Option<ThresholdParams>,
    #[serde(default = "default_true")]
    pub lexicalize_objects: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconStageConfig {
    pub lexicon: PathBuf,
    #[serde(default)]
    pub tau: f64,
}

/// Either a saved model or a labeled corpus to train on at load time
/// (seeded by the caller).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearStageConfig {
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub train: Option<PathBuf>,
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub reg: Option<f64>,
    #[serde(default)]
    pub first_person_only: bool,
}

#[derive(Debug, Clone, Deserialize)]
struct ParamsFile {
    pos: ThresholdParams,
    neg: ThresholdParams,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::json(path.display().to_string(), e))
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

pub fn load_stats(path: &Path, unit_kind: UnitKind) -> Result<StatsTable> {
    let text = read_text(path)?;
    StatsTable::read_jsonl(text.as_bytes(), unit_kind)
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    Lexicon::from_tsv(read_text(path)?.as_bytes())
}

pub fn load_pattern_classifier(config_path: &Path) -> Result<PatternClassifier> {
    let cfg: PatternStageConfig = read_json(config_path)?;
    let table = load_stats(&resolve(config_path, &cfg.stats), UnitKind::Sentence)?;
    let (pos, neg) = match (&cfg.params, cfg.pos, cfg.neg) {
        (Some(p), None, None) => {
            let params: ParamsFile = read_json(&resolve(config_path, p))?;
            (params.pos, params.neg)
        }
        (None, Some(pos), Some(neg)) => (pos, neg),
        _ => {
            return Err(Error::InvalidParams(format!(
                "{}: give either `params` or both `pos` and `neg`",
                config_path.display()
            )))
        }
    };
    pos.validate()?;
    neg.validate()?;
    Ok(PatternClassifier {
        extractor: PatternExtractor::new(ExtractConfig {
            lexicalize_objects: cfg.lexicalize_objects,
            ..Default::default()
        }),
        table: Arc::new(table),
        pos,
        neg,
    })
}

pub fn load_lexicon_classifier(config_path: &Path) -> Result<LexiconClassifier> {
    let cfg: LexiconStageConfig = read_json(config_path)?;
    if cfg.tau.is_nan() || cfg.tau < 0.0 {
        return Err(Error::InvalidParams("tau must be nonnegative".into()));
    }
    Ok(LexiconClassifier {
        lexicon: load_lexicon(&resolve(config_path, &cfg.lexicon))?,
        tau: cfg.tau,
    })
}

pub fn load_linear_classifier(config_path: &Path, seed: u64) -> Result<LinearClassifier> {
    let cfg: LinearStageConfig = read_json(config_path)?;
    let model = match (&cfg.model, &cfg.train) {
        (Some(m), None) => LinearModel::from_json(&read_text(&resolve(config_path, m))?)?,
        (None, Some(corpus)) => {
            let docs = read_corpus(&resolve(config_path, corpus))?;
            let data = labeled_sentences(&docs, cfg.first_person_only);
            let defaults = LinearConfig::default();
            let train_cfg = LinearConfig {
                epochs: cfg.epochs.unwrap_or(defaults.epochs),
                learning_rate: cfg.learning_rate.unwrap_or(defaults.learning_rate),
                reg: cfg.reg.unwrap_or(defaults.reg),
                seed,
            };
            train_linear(&data, &train_cfg)?
        }
        _ => {
            return Err(Error::InvalidParams(format!(
                "{}: give exactly one of `model` or `train`",
                config_path.display()
            )))
        }
    };
    Ok(LinearClassifier { model })
}

pub fn load_classifier(
    kind: StageKind,
    config_path: &Path,
    seed: u64,
) -> Result<Box<dyn Classifier<Sentence>>> {
    Ok(match kind {
        StageKind::Pattern => Box::new(load_pattern_classifier(config_path)?),
        StageKind::Lexicon => Box::new(load_lexicon_classifier(config_path)?),
        StageKind::Linear => Box::new(load_linear_classifier(config_path, seed)?),
    })
}

pub fn load_cascade(manifest_path: &Path, seed: u64) -> Result<CascadeSpec<Sentence>> {
    let manifest: Manifest = read_json(manifest_path)?;
    let mut stages = Vec::with_capacity(manifest.stages.len());
    for stage in &manifest.stages {
        let path = resolve(manifest_path, &stage.config_path);
        let classifier = load_classifier(stage.kind, &path, seed).map_err(|e| Error::Stage {
            stage: stage
                .name
                .clone()
                .unwrap_or_else(|| stage.kind.as_str().to_string()),
            source: Box::new(e),
        })?;
        stages.push(Stage {
            name: stage
                .name
                .clone()
                .unwrap_or_else(|| stage.kind.as_str().to_string()),
            classifier,
        });
    }
    CascadeSpec::new(stages)
}
