//! Neutral-fallthrough cascades: a stage is consulted only when every
//! earlier stage abstained.

use std::collections::HashSet;
use std::sync::Arc;

use crate::baselines::{lexicon_classify, predict_linear, Lexicon, LinearModel};
use crate::corpus::{Polarity, Sentence};
use crate::error::{Error, Result};
use crate::patterns::PatternExtractor;
use crate::stats::{classify_threshold, StatsTable, ThresholdParams};

pub const MAX_STAGES: usize = 3;

/// Anything that labels a unit. Must be usable concurrently once loaded.
pub trait Classifier<U: ?Sized>: Send + Sync {
    fn classify(&self, unit: &U) -> Result<Polarity>;
}

impl<U: ?Sized, F> Classifier<U> for F
where
    F: Fn(&U) -> Result<Polarity> + Send + Sync,
{
    fn classify(&self, unit: &U) -> Result<Polarity> {
        self(unit)
    }
}

pub struct Stage<U: ?Sized> {
    pub name: String,
    pub classifier: Box<dyn Classifier<U>>,
}

impl<U: ?Sized> Stage<U> {
    pub fn new(name: impl Into<String>, classifier: impl Classifier<U> + 'static) -> Self {
        Stage {
            name: name.into(),
            classifier: Box::new(classifier),
        }
    }
}

/// One to three uniquely named stages.
pub struct CascadeSpec<U: ?Sized> {
    stages: Vec<Stage<U>>,
}

/// Label plus the 0-based stage that produced it (`None` when all abstained).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeDecision {
    pub label: Polarity,
    pub stage: Option<usize>,
}

impl<U: ?Sized> CascadeSpec<U> {
    pub fn new(stages: Vec<Stage<U>>) -> Result<Self> {
        if stages.is_empty() || stages.len() > MAX_STAGES {
            return Err(Error::InvalidParams(format!(
                "a cascade has 1 to {MAX_STAGES} stages, got {}",
                stages.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &stages {
            if !seen.insert(s.name.as_str()) {
                return Err(Error::InvalidParams(format!(
                    "duplicate stage name `{}`",
                    s.name
                )));
            }
        }
        Ok(CascadeSpec { stages })
    }

    pub fn names(&self) -> Vec<&str> {
        self.stages.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn classify_traced(&self, unit: &U) -> Result<CascadeDecision> {
        for (i, stage) in self.stages.iter().enumerate() {
            let label = stage.classifier.classify(unit).map_err(|e| Error::Stage {
                stage: stage.name.clone(),
                source: Box::new(e),
            })?;
            if label != Polarity::Neutral {
                return Ok(CascadeDecision {
                    label,
                    stage: Some(i),
                });
            }
        }
        Ok(CascadeDecision {
            label: Polarity::Neutral,
            stage: None,
        })
    }

    pub fn classify(&self, unit: &U) -> Result<Polarity> {
        self.classify_traced(unit).map(|d| d.label)
    }
}

impl<U: ?Sized> Classifier<U> for CascadeSpec<U> {
    fn classify(&self, unit: &U) -> Result<Polarity> {
        CascadeSpec::classify(self, unit)
    }
}

pub fn cascade_classify<U: ?Sized>(unit: &U, spec: &CascadeSpec<U>) -> Result<Polarity> {
    spec.classify(unit)
}

/// Sentence-level thresholded pattern classifier.
pub struct PatternClassifier {
    pub extractor: PatternExtractor,
    pub table: Arc<StatsTable>,
    pub pos: ThresholdParams,
    pub neg: ThresholdParams,
}

impl Classifier<Sentence> for PatternClassifier {
    fn classify(&self, unit: &Sentence) -> Result<Polarity> {
        let keys = self.extractor.sentence_keys(unit);
        Ok(classify_threshold(&keys, &self.table, &self.pos, &self.neg))
    }
}

pub struct LexiconClassifier {
    pub lexicon: Lexicon,
    pub tau: f64,
}

impl Classifier<Sentence> for LexiconClassifier {
    fn classify(&self, unit: &Sentence) -> Result<Polarity> {
        Ok(lexicon_classify(unit, &self.lexicon, self.tau))
    }
}

pub struct LinearClassifier {
    pub model: LinearModel,
}

impl Classifier<Sentence> for LinearClassifier {
    fn classify(&self, unit: &Sentence) -> Result<Polarity> {
        Ok(predict_linear(&self.model, unit))
    }
}
