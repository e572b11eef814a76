//! Class-conditional pattern statistics and the thresholded pattern
//! classifier.
//!
//! Every pattern occurrence counts, so a key seen twice in one story adds two
//! to its frequency. Probabilities are unsmoothed ratios and are never
//! stored: they are always derived from the counts.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::Polarity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternStats {
    pub key: String,
    pub freq: u64,
    pub pos_count: u64,
    pub neg_count: u64,
}

impl PatternStats {
    fn empty(key: &str) -> Self {
        PatternStats {
            key: key.to_string(),
            freq: 0,
            pos_count: 0,
            neg_count: 0,
        }
    }

    pub fn p_pos(&self) -> f64 {
        ratio(self.pos_count, self.freq)
    }

    pub fn p_neg(&self) -> f64 {
        ratio(self.neg_count, self.freq)
    }

    pub fn p_class(&self, class: Polarity) -> f64 {
        match class {
            Polarity::Pos => self.p_pos(),
            Polarity::Neg => self.p_neg(),
            _ => 0.0,
        }
    }

    fn add(&mut self, label: Polarity, n: u64) {
        match label {
            Polarity::Pos => self.pos_count += n,
            Polarity::Neg => self.neg_count += n,
            _ => return,
        }
        self.freq += n;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Thresholds of one class's pattern classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    /// Minimum pattern frequency.
    pub theta_f: u64,
    /// Minimum class-conditional probability.
    pub theta_p: f64,
    /// Minimum number of qualifying pattern hits in a unit.
    pub theta_n: u64,
}

impl ThresholdParams {
    /// High-precision positive settings used for story bootstrapping.
    pub const BOOTSTRAP_POS: ThresholdParams = ThresholdParams::new(10, 0.7, 3);
    /// High-precision negative settings used for story bootstrapping.
    pub const BOOTSTRAP_NEG: ThresholdParams = ThresholdParams::new(10, 0.85, 4);
    /// Best positive sentence-level settings reported on the original dev set.
    pub const DEV_TUNED_POS: ThresholdParams = ThresholdParams::new(18, 0.85, 1);
    /// Best negative sentence-level settings reported on the original dev set.
    pub const DEV_TUNED_NEG: ThresholdParams = ThresholdParams::new(1, 0.5, 1);

    pub const fn new(theta_f: u64, theta_p: f64, theta_n: u64) -> Self {
        ThresholdParams {
            theta_f,
            theta_p,
            theta_n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_f < 1 {
            return Err(Error::InvalidParams(format!(
                "theta_f must be >= 1, got {}",
                self.theta_f
            )));
        }
        if !(0.0..=1.0).contains(&self.theta_p) {
            return Err(Error::InvalidParams(format!(
                "theta_p must lie in [0, 1], got {}",
                self.theta_p
            )));
        }
        if self.theta_n < 1 {
            return Err(Error::InvalidParams(format!(
                "theta_n must be >= 1, got {}",
                self.theta_n
            )));
        }
        Ok(())
    }

    /// Whether a pattern with these statistics counts as a hit for `class`.
    pub fn qualifies(&self, stats: &PatternStats, class: Polarity) -> bool {
        stats.freq >= self.theta_f && stats.p_class(class) >= self.theta_p
    }
}

impl fmt::Display for ThresholdParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "theta_f={} theta_p={} theta_n={}",
            self.theta_f, self.theta_p, self.theta_n
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitKind {
    Story,
    Sentence,
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnitKind::Story => "story",
            UnitKind::Sentence => "sentence",
        })
    }
}

/// A text unit reduced to its pattern keys, one entry per occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledUnit {
    pub keys: Vec<String>,
    pub label: Polarity,
}

impl LabeledUnit {
    pub fn new(keys: Vec<String>, label: Polarity) -> Self {
        LabeledUnit { keys, label }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsTable {
    unit_kind: UnitKind,
    entries: BTreeMap<String, PatternStats>,
}

impl StatsTable {
    pub fn new(unit_kind: UnitKind) -> Self {
        StatsTable {
            unit_kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit_kind(&self) -> UnitKind {
        self.unit_kind
    }

    pub fn get(&self, key: &str) -> Option<&PatternStats> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = &PatternStats> {
        self.entries.values()
    }

    /// Inserts or replaces an entry after checking `freq = pos + neg`.
    pub fn insert(&mut self, stats: PatternStats) -> Result<()> {
        if stats.freq != stats.pos_count + stats.neg_count {
            return Err(Error::InvalidParams(format!(
                "pattern `{}`: freq {} != pos {} + neg {}",
                stats.key, stats.freq, stats.pos_count, stats.neg_count
            )));
        }
        self.entries.insert(stats.key.clone(), stats);
        Ok(())
    }

    fn tally(&mut self, key: &str, label: Polarity, n: u64) {
        self.entries
            .entry(key.to_string())
            .or_insert_with(|| PatternStats::empty(key))
            .add(label, n);
    }

    /// Writes `{key, freq, pos_count, neg_count}` JSON lines in key order.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for stats in self.entries.values() {
            let line = serde_json::to_string(stats).map_err(|e| Error::json("stats entry", e))?;
            writeln!(out, "{line}").map_err(|e| Error::io("<stats output>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R, unit_kind: UnitKind) -> Result<Self> {
        let mut table = StatsTable::new(unit_kind);
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let stats: PatternStats =
                serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
            if table.entries.contains_key(&stats.key) {
                return Err(Error::parse(
                    i + 1,
                    format!("duplicate key `{}`", stats.key),
                ));
            }
            table
                .insert(stats)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(table)
    }
}

/// Tallies per-class pattern occurrences over labeled units.
pub fn collect_stats<'a, I>(units: I, unit_kind: UnitKind) -> Result<StatsTable>
where
    I: IntoIterator<Item = &'a LabeledUnit>,
{
    let mut table = StatsTable::new(unit_kind);
    for unit in units {
        if !unit.label.is_class() {
            return Err(Error::Precondition(format!(
                "statistics need pos/neg units, got {}",
                unit.label
            )));
        }
        for key in &unit.keys {
            table.tally(key, unit.label, 1);
        }
    }
    Ok(table)
}

pub fn merge_stats(a: &StatsTable, b: &StatsTable) -> Result<StatsTable> {
    if a.unit_kind != b.unit_kind {
        return Err(Error::UnitKindMismatch {
            left: a.unit_kind.to_string(),
            right: b.unit_kind.to_string(),
        });
    }
    let mut merged = a.clone();
    for stats in b.entries.values() {
        merged.tally(&stats.key, Polarity::Pos, stats.pos_count);
        merged.tally(&stats.key, Polarity::Neg, stats.neg_count);
    }
    Ok(merged)
}

/// Number of pattern occurrences in `keys` that qualify for `class`.
pub fn count_hits(
    keys: &[String],
    table: &StatsTable,
    params: &ThresholdParams,
    class: Polarity,
) -> u64 {
    keys.iter()
        .filter_map(|k| table.get(k))
        .filter(|s| params.qualifies(s, class))
        .count() as u64
}

/// Labels a unit POS or NEG when exactly one class reaches its hit quota;
/// otherwise NEUTRAL.
pub fn classify_threshold(
    keys: &[String],
    table: &StatsTable,
    pos: &ThresholdParams,
    neg: &ThresholdParams,
) -> Polarity {
    let pos_fires = count_hits(keys, table, pos, Polarity::Pos) >= pos.theta_n;
    let neg_fires = count_hits(keys, table, neg, Polarity::Neg) >= neg.theta_n;
    decide(pos_fires, neg_fires)
}

pub(crate) fn decide(pos_fires: bool, neg_fires: bool) -> Polarity {
    match (pos_fires, neg_fires) {
        (true, false) => Polarity::Pos,
        (false, true) => Polarity::Neg,
        _ => Polarity::Neutral,
    }
}
