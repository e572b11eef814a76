//! Command-line front end for the affectlog pipeline.
//!
//! Every subcommand reads its inputs, calls into `affectlog`, and writes its
//! outputs atomically (temporary file in the target directory, then rename).

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use affectlog::affect::{affect_report_tsv, induce_object_affect, InductionConfig};
use affectlog::bootstrap::{run_bootstrap, BootstrapConfig};
use affectlog::cascade::Classifier;
use affectlog::corpus::{is_first_person, read_corpus, write_conllu, Document, Polarity, Sentence};
use affectlog::eval::{evaluate, render_table, tune_thresholds, TuneGrid};
use affectlog::manifest::{load_cascade, load_classifier, load_stats, StageKind};
use affectlog::patterns::{ExtractConfig, PatternExtractor};
use affectlog::stats::{collect_stats, LabeledUnit, ThresholdParams, UnitKind};

pub const THREADS_ENV: &str = "AFFECTLOG_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "affectlog",
    version,
    about = "Learn first-person affect patterns from parsed narratives"
)]
pub struct Cli {
    /// Seed for the linear trainer's shuffling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump pattern instances of a corpus as JSON lines.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Build a pattern statistics table from a labeled corpus.
    Learn {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Unit::Sentence)]
        unit: Unit,
        /// Sentence units only: keep first-person sentences.
        #[arg(long)]
        first_person_only: bool,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Label unlabeled stories with the high-precision story classifier.
    Bootstrap {
        #[arg(long)]
        seed_corpus: PathBuf,
        #[arg(long)]
        unlabeled: PathBuf,
        /// Expanded labeled corpus (seed plus new labels).
        #[arg(long)]
        out: PathBuf,
        /// TSV log of newly labeled stories: doc_id, label, round.
        #[arg(long)]
        log: PathBuf,
        /// Stories that stayed unlabeled.
        #[arg(long)]
        remaining: Option<PathBuf>,
        #[command(flatten)]
        thresholds: BootstrapArgs,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Label every sentence with a single classifier.
    Classify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: StageKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        first_person_only: bool,
    },
    /// Label every sentence with a neutral-fallthrough cascade.
    Cascade {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        first_person_only: bool,
    },
    /// Grid-search sentence-level thresholds on a dev corpus.
    Tune {
        #[arg(long)]
        dev: PathBuf,
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Best parameters and dev report as JSON.
        #[arg(long)]
        out: PathBuf,
        /// Plain-text report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        extract: ExtractArgs,
    },
    /// Score predictions against gold labels.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        /// Gold labels: a labeled CoNLL-U corpus or a predictions-style TSV.
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "classifier")]
        name: String,
        /// Plain-text report (also printed to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Induce object polarities from possession patterns in a stats table.
    InduceAffect {
        #[arg(long)]
        stats: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        min_freq: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Story,
    Sentence,
}

#[derive(Debug, Clone, Args)]
pub struct ExtractArgs {
    /// Do not emit object-lexicalized keys such as ACTVP_DOBJ:HAVE_FUN.
    #[arg(long)]
    pub no_lexicalize: bool,
}

impl ExtractArgs {
    pub fn extractor(&self) -> PatternExtractor {
        PatternExtractor::new(ExtractConfig {
            lexicalize_objects: !self.no_lexicalize,
            ..Default::default()
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_POS.theta_f)]
    pub pos_theta_f: u64,
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_POS.theta_p)]
    pub pos_theta_p: f64,
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_POS.theta_n)]
    pub pos_theta_n: u64,
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_NEG.theta_f)]
    pub neg_theta_f: u64,
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_NEG.theta_p)]
    pub neg_theta_p: f64,
    #[arg(long, default_value_t = ThresholdParams::BOOTSTRAP_NEG.theta_n)]
    pub neg_theta_n: u64,
    #[arg(long, default_value_t = 1)]
    pub max_rounds: usize,
}

impl BootstrapArgs {
    pub fn config(&self) -> BootstrapConfig {
        BootstrapConfig {
            pos: ThresholdParams::new(self.pos_theta_f, self.pos_theta_p, self.pos_theta_n),
            neg: ThresholdParams::new(self.neg_theta_f, self.neg_theta_p, self.neg_theta_n),
            max_rounds: self.max_rounds,
        }
    }
}

fn parse_kind(s: &str) -> Result<StageKind, String> {
    s.parse()
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temporary file in {}", dir.display()))?;
    tmp.write_all(contents)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .map_err(|e| anyhow!("renaming into {}: {}", path.display(), e.error))?;
    Ok(())
}

fn load_corpus(path: &Path) -> Result<Vec<Document>> {
    read_corpus(path).with_context(|| format!("reading corpus {}", path.display()))
}

/// Sentences to label, in corpus order.
pub fn select_sentences(docs: &[Document], first_person_only: bool) -> Vec<&Sentence> {
    docs.iter()
        .flat_map(|d| d.sentences.iter())
        .filter(|s| !first_person_only || is_first_person(s))
        .collect()
}

/// `doc_id<TAB>sent_id<TAB>label` lines.
pub fn predictions_tsv(sentences: &[&Sentence], labels: &[Polarity]) -> String {
    sentences
        .iter()
        .zip(labels)
        .map(|(s, l)| format!("{}\t{}\t{}\n", s.doc_id, s.sent_id, l))
        .collect()
}

pub fn classify_all<C: Classifier<Sentence> + ?Sized>(
    classifier: &C,
    sentences: &[&Sentence],
) -> affectlog::Result<Vec<Polarity>> {
    sentences
        .par_iter()
        .map(|s| classifier.classify(s))
        .collect()
}

pub fn sentence_units(
    extractor: &PatternExtractor,
    docs: &[Document],
    first_person_only: bool,
) -> Vec<LabeledUnit> {
    docs.iter()
        .filter(|d| d.label.is_class())
        .flat_map(|d| {
            d.sentences
                .iter()
                .filter(move |s| !first_person_only || is_first_person(s))
                .map(move |s| LabeledUnit::new(extractor.sentence_keys(s), d.label))
        })
        .collect()
}

pub fn story_units(extractor: &PatternExtractor, docs: &[Document]) -> Vec<LabeledUnit> {
    docs.iter()
        .filter(|d| d.label.is_class())
        .map(|d| LabeledUnit::new(extractor.document_keys(d), d.label))
        .collect()
}

type LabelMap = HashMap<(String, String), Polarity>;

fn parse_label_tsv(path: &Path) -> Result<Vec<((String, String), Polarity)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            bail!(
                "{}:{}: expected doc_id<TAB>sent_id<TAB>label",
                path.display(),
                i + 1
            );
        }
        let label: Polarity = cols[2]
            .parse()
            .map_err(|e| anyhow!("{}:{}: {}", path.display(), i + 1, e))?;
        rows.push(((cols[0].to_string(), cols[1].to_string()), label));
    }
    Ok(rows)
}

fn read_gold(path: &Path) -> Result<LabelMap> {
    if path.extension().is_some_and(|e| e == "conllu") {
        let docs = load_corpus(path)?;
        let mut map = HashMap::new();
        for d in &docs {
            if !d.label.is_class() {
                bail!(
                    "{}: gold story `{}` has no pos/neg label",
                    path.display(),
                    d.doc_id
                );
            }
            for s in &d.sentences {
                map.insert((s.doc_id.clone(), s.sent_id.clone()), d.label);
            }
        }
        Ok(map)
    } else {
        Ok(parse_label_tsv(path)?.into_iter().collect())
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| anyhow!("{THREADS_ENV} must be a nonnegative integer, got `{raw}`"))?;
    // 0 leaves rayon's default; a pool may already exist when called twice in-process.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Extract {
            corpus,
            out,
            extract,
        } => {
            let docs = load_corpus(&corpus)?;
            let extractor = extract.extractor();
            let mut buf = String::new();
            for doc in &docs {
                for rec in extractor.records(doc) {
                    buf.push_str(&serde_json::to_string(&rec)?);
                    buf.push('\n');
                }
            }
            write_atomic(&out, buf.as_bytes())
        }
        Command::Learn {
            corpus,
            out,
            unit,
            first_person_only,
            extract,
        } => {
            let docs = load_corpus(&corpus)?;
            let extractor = extract.extractor();
            let table = match unit {
                Unit::Story => collect_stats(&story_units(&extractor, &docs), UnitKind::Story)?,
                Unit::Sentence => collect_stats(
                    &sentence_units(&extractor, &docs, first_person_only),
                    UnitKind::Sentence,
                )?,
            };
            write_atomic(&out, table.to_jsonl_string().as_bytes())
        }
        Command::Bootstrap {
            seed_corpus,
            unlabeled,
            out,
            log,
            remaining,
            thresholds,
            extract,
        } => {
            let seed = load_corpus(&seed_corpus)?;
            let pool = load_corpus(&unlabeled)?;
            let outcome = run_bootstrap(&extract.extractor(), seed, pool, &thresholds.config())?;
            let log_text: String = outcome
                .new_labels
                .iter()
                .map(|n| format!("{}\t{}\t{}\n", n.doc_id, n.label, n.round))
                .collect();
            write_atomic(&out, write_conllu(&outcome.corpus).as_bytes())?;
            write_atomic(&log, log_text.as_bytes())?;
            if let Some(path) = remaining {
                write_atomic(&path, write_conllu(&outcome.remaining).as_bytes())?;
            }
            eprintln!(
                "labeled {} stories in {} round(s); {} remain unlabeled",
                outcome.new_labels.len(),
                outcome.rounds_run,
                outcome.remaining.len()
            );
            Ok(())
        }
        Command::Classify {
            corpus,
            kind,
            config,
            out,
            first_person_only,
        } => {
            let docs = load_corpus(&corpus)?;
            let classifier = load_classifier(kind, &config, cli.seed).with_context(|| {
                format!(
                    "loading {} classifier from {}",
                    kind.as_str(),
                    config.display()
                )
            })?;
            let sentences = select_sentences(&docs, first_person_only);
            let labels = classify_all(classifier.as_ref(), &sentences)?;
            write_atomic(&out, predictions_tsv(&sentences, &labels).as_bytes())
        }
        Command::Cascade {
            corpus,
            manifest,
            out,
            first_person_only,
        } => {
            let docs = load_corpus(&corpus)?;
            let cascade = load_cascade(&manifest, cli.seed)
                .with_context(|| format!("loading manifest {}", manifest.display()))?;
            let sentences = select_sentences(&docs, first_person_only);
            let labels = classify_all(&cascade, &sentences)?;
            write_atomic(&out, predictions_tsv(&sentences, &labels).as_bytes())
        }
        Command::Tune {
            dev,
            stats,
            grid,
            out,
            report,
            extract,
        } => {
            let docs = load_corpus(&dev)?;
            let table = load_stats(&stats, UnitKind::Sentence)?;
            let grid_text =
                fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let grid = TuneGrid::from_json(&grid_text)?;
            let units = sentence_units(&extract.extractor(), &docs, false);
            let best = tune_thresholds(&units, &table, &grid)?;
            write_atomic(
                &out,
                (serde_json::to_string_pretty(&best)? + "\n").as_bytes(),
            )?;
            let text = format!(
                "pos: {}\nneg: {}\n{}",
                best.pos,
                best.neg,
                render_table(&[("pattern (dev)", &best.report)])
            );
            match report {
                Some(path) => write_atomic(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Command::Eval {
            pred,
            gold,
            name,
            out,
            json,
        } => {
            let predictions = parse_label_tsv(&pred)?;
            let mut gold_map = read_gold(&gold)?;
            let mut p = Vec::with_capacity(predictions.len());
            let mut g = Vec::with_capacity(predictions.len());
            for (id, label) in predictions {
                let gold_label = gold_map
                    .remove(&id)
                    .ok_or_else(|| anyhow!("no gold label for {}/{}", id.0, id.1))?;
                p.push(label);
                g.push(gold_label);
            }
            if let Some(((doc, sent), _)) = gold_map.iter().min_by(|a, b| a.0.cmp(b.0)) {
                bail!(
                    "{} gold sentences lack predictions, e.g. {doc}/{sent}",
                    gold_map.len()
                );
            }
            let report = evaluate(&p, &g)?;
            let text = render_table(&[(name.as_str(), &report)]);
            print!("{text}");
            if let Some(path) = out {
                write_atomic(&path, text.as_bytes())?;
            }
            if let Some(path) = json {
                write_atomic(
                    &path,
                    (serde_json::to_string_pretty(&report)? + "\n").as_bytes(),
                )?;
            }
            Ok(())
        }
        Command::InduceAffect {
            stats,
            out,
            threshold,
            min_freq,
        } => {
            let table = load_stats(&stats, UnitKind::Sentence)?;
            let config = InductionConfig {
                threshold,
                min_freq,
                ..Default::default()
            };
            let rows = induce_object_affect(&table, &config);
            write_atomic(&out, affect_report_tsv(&rows).as_bytes())
        }
    }
}
