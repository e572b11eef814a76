//! Baseline sentence classifiers: a lexicon scorer that can abstain and a
//! linear unigram classifier that cannot.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Polarity, Sentence, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    scores: BTreeMap<String, f64>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, word: &str, score: f64) -> Result<()> {
        if !score.is_finite() {
            return Err(Error::InvalidParams(format!(
                "score for `{word}` is not finite"
            )));
        }
        self.scores.insert(word.to_lowercase(), score);
        Ok(())
    }

    pub fn score(&self, word: &str) -> f64 {
        self.scores.get(word).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Reads `lemma<TAB>score` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv<R: BufRead>(input: R) -> Result<Self> {
        let mut lex = Lexicon::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, score) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `lemma<TAB>score`"))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad score `{score}`")))?;
            lex.insert(word.trim(), score)
                .map_err(|e| Error::parse(i + 1, e.to_string()))?;
        }
        Ok(lex)
    }
}

fn is_negator(t: &Token) -> bool {
    t.deprel == "neg"
        || (t.base_deprel() == "advmod"
            && (matches!(t.lemma.as_str(), "not" | "n't" | "never")
                || t.feat("Polarity") == Some("Neg")))
}

/// Whether some token on the path from `tok` to the root (inclusive) has a
/// negation dependent.
fn under_negation(sentence: &Sentence, tok: &Token) -> bool {
    let mut cur = Some(tok);
    let mut steps = 0;
    while let Some(t) = cur {
        if sentence.children(t.index).any(is_negator) {
            return true;
        }
        steps += 1;
        if steps > sentence.tokens.len() {
            break;
        }
        cur = sentence.head_of(t);
    }
    false
}

pub fn lexicon_score(sentence: &Sentence, lex: &Lexicon) -> f64 {
    sentence
        .tokens
        .iter()
        .map(|t| {
            let s = lex.score(&t.lemma);
            if s != 0.0 && under_negation(sentence, t) {
                -s
            } else {
                s
            }
        })
        .sum()
}

pub fn lexicon_classify(sentence: &Sentence, lex: &Lexicon, tau: f64) -> Polarity {
    let score = lexicon_score(sentence, lex);
    if score > tau {
        Polarity::Pos
    } else if score < -tau {
        Polarity::Neg
    } else {
        Polarity::Neutral
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub bias: f64,
    /// One weight per vocabulary feature (lowercased lemma).
    pub weights: BTreeMap<String, f64>,
}

impl LinearModel {
    pub fn zero() -> Self {
        LinearModel {
            bias: 0.0,
            weights: BTreeMap::new(),
        }
    }

    pub fn score(&self, sentence: &Sentence) -> f64 {
        self.bias
            + unigram_features(sentence)
                .iter()
                .filter_map(|f| self.weights.get(f))
                .sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: LinearModel =
            serde_json::from_str(text).map_err(|e| Error::json("linear model", e))?;
        if !model.bias.is_finite() || model.weights.values().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParams("model weights must be finite".into()));
        }
        Ok(model)
    }
}

/// Binary presence of lowercased lemmas.
pub fn unigram_features(sentence: &Sentence) -> BTreeSet<String> {
    sentence
        .tokens
        .iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.lemma.to_lowercase())
        .collect()
}

/// Sign of the score; an exact zero goes to POS.
pub fn predict_linear(model: &LinearModel, sentence: &Sentence) -> Polarity {
    if model.score(sentence) >= 0.0 {
        Polarity::Pos
    } else {
        Polarity::Neg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub reg: f64,
    pub seed: u64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            epochs: 20,
            learning_rate: 0.1,
            reg: 1e-4,
            seed: 0,
        }
    }
}

/// Hinge-loss SGD with a proximal L2 step, `w <- (w + lr*y*x) / (1 + lr*reg)`,
/// which stays stable for any `reg` and shrinks weights to zero as `reg`
/// grows. Weights are kept as `scale * v` so the shrink is O(1).
struct Trainer {
    vocab: BTreeMap<String, usize>,
    examples: Vec<(Vec<usize>, f64)>,
    v: Vec<f64>,
    scale: f64,
    bias: f64,
}

impl Trainer {
    fn new(data: &[(&Sentence, Polarity)]) -> Self {
        let mut vocab = BTreeMap::new();
        let mut examples = Vec::with_capacity(data.len());
        for (sentence, label) in data {
            let feats: Vec<usize> = unigram_features(sentence)
                .into_iter()
                .map(|f| {
                    let next = vocab.len();
                    *vocab.entry(f).or_insert(next)
                })
                .collect();
            let y = if *label == Polarity::Pos { 1.0 } else { -1.0 };
            examples.push((feats, y));
        }
        let dim = vocab.len();
        Trainer {
            vocab,
            examples,
            v: vec![0.0; dim],
            scale: 1.0,
            bias: 0.0,
        }
    }

    fn margin(&self, i: usize) -> f64 {
        let (feats, y) = &self.examples[i];
        let dot: f64 = feats.iter().map(|&f| self.v[f]).sum::<f64>() * self.scale;
        y * (dot + self.bias)
    }

    fn step(&mut self, i: usize, lr: f64, reg: f64) {
        if self.margin(i) < 1.0 {
            let y = self.examples[i].1;
            let inc = lr * y / self.scale;
            for &f in &self.examples[i].0 {
                self.v[f] += inc;
            }
            self.bias += lr * y;
        }
        self.scale /= 1.0 + lr * reg;
        if self.scale < 1e-9 {
            for w in &mut self.v {
                *w *= self.scale;
            }
            self.scale = 1.0;
        }
    }

    fn objective(&self, reg: f64) -> f64 {
        let n = self.examples.len() as f64;
        let hinge: f64 = (0..self.examples.len())
            .map(|i| (1.0 - self.margin(i)).max(0.0))
            .sum::<f64>()
            / n;
        let sq: f64 = self.v.iter().map(|w| w * w).sum::<f64>() * self.scale * self.scale;
        hinge + 0.5 * reg * sq
    }

    fn into_model(self) -> LinearModel {
        let weights = self
            .vocab
            .into_iter()
            .map(|(f, i)| (f, self.v[i] * self.scale))
            .collect();
        LinearModel {
            bias: self.bias,
            weights,
        }
    }
}

/// Trains and also returns the regularized hinge objective after each epoch.
pub fn train_linear_traced(
    data: &[(&Sentence, Polarity)],
    config: &LinearConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    if config.epochs < 1 {
        return Err(Error::InvalidParams("epochs must be >= 1".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidParams(
            "learning_rate must be positive".into(),
        ));
    }
    if !(config.reg >= 0.0 && config.reg.is_finite()) {
        return Err(Error::InvalidParams("reg must be nonnegative".into()));
    }
    if let Some((s, l)) = data.iter().find(|(_, l)| !l.is_class()) {
        return Err(Error::Precondition(format!(
            "training sentence `{}` is {l}",
            s.sent_id
        )));
    }
    let has = |p| data.iter().any(|(_, l)| *l == p);
    if !has(Polarity::Pos) || !has(Polarity::Neg) {
        return Err(Error::Precondition(
            "training data must contain both classes".into(),
        ));
    }

    let mut trainer = Trainer::new(data);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            trainer.step(i, config.learning_rate, config.reg);
        }
        losses.push(trainer.objective(config.reg));
    }
    Ok((trainer.into_model(), losses))
}

pub fn train_linear(data: &[(&Sentence, Polarity)], config: &LinearConfig) -> Result<LinearModel> {
    train_linear_traced(data, config).map(|(m, _)| m)
}
