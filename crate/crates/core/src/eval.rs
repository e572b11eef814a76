//! Per-class F1, macro F and dev-set threshold tuning.
//!
//! Gold labels are POS or NEG. A NEUTRAL prediction is an abstention: it
//! costs the gold class recall and is charged to neither class's precision.
//! A class with no gold instances and no predictions scores 1.0 across the
//! board, so macro F is 1.0 exactly when predictions equal gold.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Polarity;
use crate::error::{Error, Result};
use crate::stats::{count_hits, decide, LabeledUnit, StatsTable, ThresholdParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Rows are gold labels, columns predictions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub pos_as_pos: usize,
    pub pos_as_neg: usize,
    pub pos_as_neutral: usize,
    pub neg_as_pos: usize,
    pub neg_as_neg: usize,
    pub neg_as_neutral: usize,
}

impl Confusion {
    fn add(&mut self, gold: Polarity, pred: Polarity) {
        match (gold, pred) {
            (Polarity::Pos, Polarity::Pos) => self.pos_as_pos += 1,
            (Polarity::Pos, Polarity::Neg) => self.pos_as_neg += 1,
            (Polarity::Pos, _) => self.pos_as_neutral += 1,
            (_, Polarity::Pos) => self.neg_as_pos += 1,
            (_, Polarity::Neg) => self.neg_as_neg += 1,
            _ => self.neg_as_neutral += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pos_as_pos
            + self.pos_as_neg
            + self.pos_as_neutral
            + self.neg_as_pos
            + self.neg_as_neg
            + self.neg_as_neutral
    }

    fn scores(&self, class: Polarity) -> ClassScores {
        let (tp, fp, fn_) = match class {
            Polarity::Pos => (
                self.pos_as_pos,
                self.neg_as_pos,
                self.pos_as_neg + self.pos_as_neutral,
            ),
            _ => (
                self.neg_as_neg,
                self.pos_as_neg,
                self.neg_as_pos + self.neg_as_neutral,
            ),
        };
        class_scores(tp, fp, fn_)
    }

    pub fn report(&self) -> EvalReport {
        let pos = self.scores(Polarity::Pos);
        let neg = self.scores(Polarity::Neg);
        EvalReport {
            pos,
            neg,
            macro_f: (pos.f1 + neg.f1) / 2.0,
            confusion: *self,
        }
    }
}

fn class_scores(tp: usize, fp: usize, fn_: usize) -> ClassScores {
    if tp + fp + fn_ == 0 {
        return ClassScores {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        };
    }
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassScores {
        precision,
        recall,
        f1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pos: ClassScores,
    pub neg: ClassScores,
    pub macro_f: f64,
    pub confusion: Confusion,
}

pub fn evaluate(pred: &[Polarity], gold: &[Polarity]) -> Result<EvalReport> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            predictions: pred.len(),
            gold: gold.len(),
        });
    }
    let mut confusion = Confusion::default();
    for (&p, &g) in pred.iter().zip(gold) {
        if !g.is_class() {
            return Err(Error::Precondition(format!(
                "gold label must be pos or neg, got {g}"
            )));
        }
        if p == Polarity::Unlabeled {
            return Err(Error::Precondition("prediction cannot be unlabeled".into()));
        }
        confusion.add(g, p);
    }
    Ok(confusion.report())
}

/// Aligned plain-text table: classifier, Pos F1, Neg F1, Macro F.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let width = rows
        .iter()
        .map(|(name, _)| name.chars().count())
        .chain(std::iter::once("Classifier".len()))
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>6}  {:>7}",
        "Classifier", "Pos F1", "Neg F1", "Macro F"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6.4}  {:>6.4}  {:>7.4}",
            name, r.pos.f1, r.neg.f1, r.macro_f
        );
    }
    out
}

/// Candidate values for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGrid {
    pub theta_f: Vec<u64>,
    pub theta_p: Vec<f64>,
    pub theta_n: Vec<u64>,
}

impl ClassGrid {
    pub fn candidates(&self) -> Vec<ThresholdParams> {
        let mut out =
            Vec::with_capacity(self.theta_f.len() * self.theta_p.len() * self.theta_n.len());
        for &f in &self.theta_f {
            for &p in &self.theta_p {
                for &n in &self.theta_n {
                    out.push(ThresholdParams::new(f, p, n));
                }
            }
        }
        out
    }

    fn validate(&self, class: &str) -> Result<()> {
        if self.theta_f.is_empty() || self.theta_p.is_empty() || self.theta_n.is_empty() {
            return Err(Error::InvalidParams(format!(
                "{class} grid has an empty dimension"
            )));
        }
        for c in self.candidates() {
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneGrid {
    pub pos: ClassGrid,
    pub neg: ClassGrid,
}

impl TuneGrid {
    pub fn validate(&self) -> Result<()> {
        self.pos.validate("pos")?;
        self.neg.validate("neg")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let grid: TuneGrid = serde_json::from_str(text).map_err(|e| Error::json("tune grid", e))?;
        grid.validate()?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub pos: ThresholdParams,
    pub neg: ThresholdParams,
    pub report: EvalReport,
}

// Higher theta_p, then higher theta_f, then lower theta_n is preferred.
fn prefer(a: &ThresholdParams, b: &ThresholdParams) -> Ordering {
    a.theta_p
        .total_cmp(&b.theta_p)
        .then(a.theta_f.cmp(&b.theta_f))
        .then(b.theta_n.cmp(&a.theta_n))
}

fn better(a: &TuneResult, b: &TuneResult) -> Ordering {
    a.report
        .macro_f
        .total_cmp(&b.report.macro_f)
        .then_with(|| prefer(&a.pos, &b.pos))
        .then_with(|| prefer(&a.neg, &b.neg))
}

fn fires(
    dev: &[LabeledUnit],
    table: &StatsTable,
    params: &ThresholdParams,
    class: Polarity,
) -> Vec<bool> {
    dev.iter()
        .map(|u| count_hits(&u.keys, table, params, class) >= params.theta_n)
        .collect()
}

/// Joint exhaustive search over the cross-product of both class grids.
pub fn tune_thresholds(
    dev: &[LabeledUnit],
    table: &StatsTable,
    grid: &TuneGrid,
) -> Result<TuneResult> {
    grid.validate()?;
    if dev.is_empty() {
        return Err(Error::Precondition("dev set is empty".into()));
    }
    if let Some(u) = dev.iter().find(|u| !u.label.is_class()) {
        return Err(Error::Precondition(format!(
            "dev label must be pos or neg, got {}",
            u.label
        )));
    }
    let has = |p| dev.iter().any(|u| u.label == p);
    if !has(Polarity::Pos) || !has(Polarity::Neg) {
        return Err(Error::Precondition(
            "dev set must contain both classes".into(),
        ));
    }

    let pos_cands = grid.pos.candidates();
    let neg_cands = grid.neg.candidates();
    let pos_fires: Vec<Vec<bool>> = pos_cands
        .par_iter()
        .map(|p| fires(dev, table, p, Polarity::Pos))
        .collect();
    let neg_fires: Vec<Vec<bool>> = neg_cands
        .par_iter()
        .map(|p| fires(dev, table, p, Polarity::Neg))
        .collect();

    let best = pos_cands
        .par_iter()
        .zip(pos_fires.par_iter())
        .flat_map_iter(|(pos, pf)| {
            neg_cands
                .iter()
                .zip(neg_fires.iter())
                .map(move |(neg, nf)| {
                    let mut confusion = Confusion::default();
                    for (i, unit) in dev.iter().enumerate() {
                        confusion.add(unit.label, decide(pf[i], nf[i]));
                    }
                    TuneResult {
                        pos: *pos,
                        neg: *neg,
                        report: confusion.report(),
                    }
                })
        })
        .max_by(better)
        .expect("grids are non-empty");
    Ok(best)
}
