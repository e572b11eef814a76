//! Weakly-supervised learning of lexico-syntactic affect patterns from
//! first-person narratives.
//!
//! The pipeline: parse CoNLL-U stories ([`corpus`]), instantiate extraction
//! templates ([`patterns`]), score patterns by class-conditional probability
//! ([`stats`]), expand a seed corpus ([`bootstrap`]), and combine the
//! resulting pattern classifier with baselines ([`baselines`]) in
//! neutral-fallthrough cascades ([`cascade`]), scored by [`eval`].
//! [`affect`] relates learned possession patterns to object polarity.

pub mod affect;
pub mod baselines;
pub mod bootstrap;
pub mod cascade;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod patterns;
pub mod stats;

pub use affect::{
    compose_possession, first_person_object_affect, AffectValue, PossessionPredicate,
};
pub use baselines::{
    lexicon_classify, predict_linear, train_linear, Lexicon, LinearConfig, LinearModel,
};
pub use bootstrap::{bootstrap_round, run_bootstrap, BootstrapConfig};
pub use cascade::{cascade_classify, CascadeSpec, Classifier, Stage};
pub use corpus::{
    inherit_labels, is_first_person, parse_conllu, write_conllu, Document, Polarity, Sentence,
    Token,
};
pub use error::{Error, Result};
pub use eval::{evaluate, tune_thresholds, EvalReport, TuneGrid};
pub use patterns::{
    canonical_key, extract_patterns, PatternExtractor, PatternInstance, TemplateId,
};
pub use stats::{
    classify_threshold, collect_stats, merge_stats, LabeledUnit, StatsTable, ThresholdParams,
    UnitKind,
};
