//! Possession affect functions and the first-person reduction.
//!
//! `X have Y` is positive exactly when the speaker feels the same way about
//! `X` and `Y`; `X lack Y` is the opposite. With a first-person subject the
//! speaker's affect toward `X` is fixed positive, so a learned event polarity
//! determines the affect toward the object.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

use crate::corpus::Polarity;
use crate::patterns::{parse_key, TemplateId};
use crate::stats::StatsTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AffectValue {
    Plus,
    Minus,
}

impl Not for AffectValue {
    type Output = AffectValue;

    fn not(self) -> AffectValue {
        match self {
            AffectValue::Plus => AffectValue::Minus,
            AffectValue::Minus => AffectValue::Plus,
        }
    }
}

impl fmt::Display for AffectValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AffectValue::Plus => "plus",
            AffectValue::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PossessionPredicate {
    Have,
    Lack,
}

impl Not for PossessionPredicate {
    type Output = PossessionPredicate;

    fn not(self) -> PossessionPredicate {
        match self {
            PossessionPredicate::Have => PossessionPredicate::Lack,
            PossessionPredicate::Lack => PossessionPredicate::Have,
        }
    }
}

impl fmt::Display for PossessionPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PossessionPredicate::Have => "have",
            PossessionPredicate::Lack => "lack",
        })
    }
}

/// Speaker affect toward the event `x have/lack y`.
pub fn compose_possession(
    x: AffectValue,
    y: AffectValue,
    pred: PossessionPredicate,
) -> AffectValue {
    let have = if x == y {
        AffectValue::Plus
    } else {
        AffectValue::Minus
    };
    match pred {
        PossessionPredicate::Have => have,
        PossessionPredicate::Lack => !have,
    }
}

/// Affect toward the possessum implied by an event polarity, assuming a
/// first-person (positive) possessor.
pub fn first_person_object_affect(event: AffectValue, pred: PossessionPredicate) -> AffectValue {
    match pred {
        PossessionPredicate::Have => event,
        PossessionPredicate::Lack => !event,
    }
}

/// Maps a class-conditional probability pair to an event affect.
pub fn event_affect(p_pos: f64, p_neg: f64, threshold: f64) -> Option<AffectValue> {
    if p_pos >= threshold {
        Some(AffectValue::Plus)
    } else if p_neg >= threshold {
        Some(AffectValue::Minus)
    } else {
        None
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InductionConfig {
    /// Minimum class probability for a pattern to count as positive/negative.
    pub threshold: f64,
    pub min_freq: u64,
    pub have_verbs: BTreeSet<String>,
    pub lack_verbs: BTreeSet<String>,
}

impl Default for InductionConfig {
    fn default() -> Self {
        let set = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect();
        InductionConfig {
            threshold: 0.7,
            min_freq: 1,
            have_verbs: set(&["have", "get", "got", "own", "receive"]),
            lack_verbs: set(&["lose", "lack", "miss"]),
        }
    }
}

impl InductionConfig {
    fn predicate(&self, verb: &str) -> Option<PossessionPredicate> {
        if self.have_verbs.contains(verb) {
            Some(PossessionPredicate::Have)
        } else if self.lack_verbs.contains(verb) {
            Some(PossessionPredicate::Lack)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedAffect {
    pub object: String,
    pub predicate: PossessionPredicate,
    pub affect: AffectValue,
    pub key: String,
    pub p_class: f64,
}

/// Induces object polarities from object-lexicalized possession patterns
/// (`ACTVP_DOBJ:HAVE_PARTY`). A negated `have` is read as `lack` and vice
/// versa. Output follows key order.
pub fn induce_object_affect(table: &StatsTable, config: &InductionConfig) -> Vec<InducedAffect> {
    let mut out = Vec::new();
    for stats in table.iter() {
        if stats.freq < config.min_freq {
            continue;
        }
        let Some(parsed) = parse_key(&stats.key) else {
            continue;
        };
        if parsed.template != TemplateId::ActVpDobj || parsed.anchors.len() != 2 {
            continue;
        }
        let Some(mut predicate) = config.predicate(&parsed.anchors[0]) else {
            continue;
        };
        if parsed.negated {
            predicate = !predicate;
        }
        let Some(event) = event_affect(stats.p_pos(), stats.p_neg(), config.threshold) else {
            continue;
        };
        let p_class = match event {
            AffectValue::Plus => stats.p_class(Polarity::Pos),
            AffectValue::Minus => stats.p_class(Polarity::Neg),
        };
        out.push(InducedAffect {
            object: parsed.anchors[1].clone(),
            predicate,
            affect: first_person_object_affect(event, predicate),
            key: stats.key.clone(),
            p_class,
        });
    }
    out
}

pub fn affect_report_tsv(rows: &[InducedAffect]) -> String {
    let mut out = String::from("object\tpredicate\taffect\tkey\tp_class\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{:.4}\n",
            r.object, r.predicate, r.affect, r.key, r.p_class
        ));
    }
    out
}
