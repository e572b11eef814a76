//! Story-level corpus expansion with a high-precision pattern classifier.
//!
//! Each round builds a story-level table from the current labeled set,
//! freezes it, and classifies every remaining story against it. Stories
//! labeled POS or NEG join the labeled set; NEUTRAL stories stay put.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Polarity};
use crate::error::{Error, Result};
use crate::patterns::PatternExtractor;
use crate::stats::{
    classify_threshold, collect_stats, LabeledUnit, StatsTable, ThresholdParams, UnitKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub pos: ThresholdParams,
    pub neg: ThresholdParams,
    pub max_rounds: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            pos: ThresholdParams::BOOTSTRAP_POS,
            neg: ThresholdParams::BOOTSTRAP_NEG,
            max_rounds: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    /// Stories labeled this round, in input order.
    pub labeled: Vec<Document>,
    pub unlabeled: Vec<Document>,
    /// The frozen table the round classified against.
    pub table: StatsTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewLabel {
    pub doc_id: String,
    pub label: Polarity,
    pub round: usize,
}

#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    /// Seed stories followed by newly labeled stories in labeling order.
    pub corpus: Vec<Document>,
    pub remaining: Vec<Document>,
    pub new_labels: Vec<NewLabel>,
    pub rounds_run: usize,
}

fn check_seed(seed: &[Document]) -> Result<()> {
    if let Some(d) = seed.iter().find(|d| !d.label.is_class()) {
        return Err(Error::Precondition(format!(
            "seed story `{}` is {}",
            d.doc_id, d.label
        )));
    }
    let has = |p| seed.iter().any(|d| d.label == p);
    if !has(Polarity::Pos) || !has(Polarity::Neg) {
        return Err(Error::Precondition(
            "seed must contain both positive and negative stories".into(),
        ));
    }
    Ok(())
}

/// Story-level table over whole stories (all sentences).
pub fn story_table(extractor: &PatternExtractor, stories: &[Document]) -> Result<StatsTable> {
    let units: Vec<LabeledUnit> = stories
        .par_iter()
        .map(|d| LabeledUnit::new(extractor.document_keys(d), d.label))
        .collect();
    collect_stats(&units, UnitKind::Story)
}

pub fn bootstrap_round(
    extractor: &PatternExtractor,
    seed: &[Document],
    unlabeled: Vec<Document>,
    pos: &ThresholdParams,
    neg: &ThresholdParams,
) -> Result<RoundOutcome> {
    check_seed(seed)?;
    pos.validate()?;
    neg.validate()?;
    if let Some(d) = unlabeled.iter().find(|d| d.label != Polarity::Unlabeled) {
        return Err(Error::Precondition(format!(
            "story `{}` to bootstrap already carries label {}",
            d.doc_id, d.label
        )));
    }

    let table = story_table(extractor, seed)?;
    let predictions: Vec<Polarity> = unlabeled
        .par_iter()
        .map(|d| classify_threshold(&extractor.document_keys(d), &table, pos, neg))
        .collect();

    let mut labeled = Vec::new();
    let mut remaining = Vec::new();
    for (mut doc, label) in unlabeled.into_iter().zip(predictions) {
        if label.is_class() {
            doc.label = label;
            labeled.push(doc);
        } else {
            remaining.push(doc);
        }
    }
    Ok(RoundOutcome {
        labeled,
        unlabeled: remaining,
        table,
    })
}

/// Repeats [`bootstrap_round`], folding new labels into the seed, until a
/// round labels nothing or `max_rounds` is reached.
pub fn run_bootstrap(
    extractor: &PatternExtractor,
    seed: Vec<Document>,
    unlabeled: Vec<Document>,
    config: &BootstrapConfig,
) -> Result<BootstrapOutcome> {
    if config.max_rounds < 1 {
        return Err(Error::InvalidParams("max_rounds must be >= 1".into()));
    }
    let mut corpus = seed;
    let mut remaining = unlabeled;
    let mut new_labels = Vec::new();
    let mut rounds_run = 0;

    for round in 1..=config.max_rounds {
        let outcome = bootstrap_round(extractor, &corpus, remaining, &config.pos, &config.neg)?;
        rounds_run = round;
        remaining = outcome.unlabeled;
        if outcome.labeled.is_empty() {
            break;
        }
        new_labels.extend(outcome.labeled.iter().map(|d| NewLabel {
            doc_id: d.doc_id.clone(),
            label: d.label,
            round,
        }));
        corpus.extend(outcome.labeled);
    }
    Ok(BootstrapOutcome {
        corpus,
        remaining,
        new_labels,
        rounds_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conllu_str;

    fn story(id: &str, label: Option<&str>, verbs: &[&str]) -> String {
        let mut s = format!("# newdoc id = {id}\n");
        if let Some(l) = label {
            s.push_str(&format!("# label = {l}\n"));
        }
        for v in verbs {
            s.push_str(&format!(
                "1\tI\tI\tPRON\t_\t_\t2\tnsubj\t_\t_\n2\t{v}\t{v}\tVERB\t_\t_\t0\troot\t_\t_\n\n"
            ));
        }
        s
    }

    fn docs(parts: &[String]) -> Vec<Document> {
        parse_conllu_str(&parts.concat()).unwrap()
    }

    #[test]
    fn defaults_are_high_precision_settings() {
        let c = BootstrapConfig::default();
        assert_eq!(c.pos, ThresholdParams::new(10, 0.7, 3));
        assert_eq!(c.neg, ThresholdParams::new(10, 0.85, 4));
        assert_eq!(c.max_rounds, 1);
    }

    #[test]
    fn single_class_seed_rejected() {
        let seed = docs(&[story("a", Some("pos"), &["swim"])]);
        let r = bootstrap_round(
            &PatternExtractor::default(),
            &seed,
            vec![],
            &ThresholdParams::BOOTSTRAP_POS,
            &ThresholdParams::BOOTSTRAP_NEG,
        );
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn unrelated_story_stays_unlabeled() {
        let seed = docs(&[
            story("p", Some("pos"), &["swim"; 12]),
            story("n", Some("neg"), &["cry"; 12]),
        ]);
        let unl = docs(&[story("u", None, &["read", "sleep"])]);
        let out = bootstrap_round(
            &PatternExtractor::default(),
            &seed,
            unl,
            &ThresholdParams::BOOTSTRAP_POS,
            &ThresholdParams::BOOTSTRAP_NEG,
        )
        .unwrap();
        assert!(out.labeled.is_empty());
        assert_eq!(out.unlabeled.len(), 1);
    }

    #[test]
    fn zero_rounds_rejected() {
        let config = BootstrapConfig {
            max_rounds: 0,
            ..Default::default()
        };
        assert!(run_bootstrap(&PatternExtractor::default(), vec![], vec![], &config).is_err());
    }
}
