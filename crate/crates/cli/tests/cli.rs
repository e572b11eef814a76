use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;

use affectlog::bootstrap::BootstrapConfig;
use affectlog::corpus::read_corpus;
use affectlog::patterns::PatternExtractor;
use affectlog::stats::{classify_threshold, collect_stats, LabeledUnit, ThresholdParams, UnitKind};
use affectlog_cli::{Cli, Command as Sub};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affectlog"))
        .args(args)
        .env_remove("AFFECTLOG_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn learn_then_classify_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let seed = fixtures().join("seed.conllu");
    let stats = dir.path().join("stats.jsonl");
    let preds = dir.path().join("pred.tsv");
    let cfg = dir.path().join("aslog.json");
    fs::write(
        &cfg,
        r#"{"stats": "stats.jsonl", "pos": {"theta_f": 2, "theta_p": 0.7, "theta_n": 1},
            "neg": {"theta_f": 2, "theta_p": 0.7, "theta_n": 1}}"#,
    )
    .unwrap();
    ok(&["learn", "--corpus", s(&seed), "--out", s(&stats)]);
    ok(&[
        "classify",
        "--corpus",
        s(&seed),
        "--kind",
        "pattern",
        "--config",
        s(&cfg),
        "--out",
        s(&preds),
    ]);

    let docs = read_corpus(&seed).unwrap();
    let ex = PatternExtractor::default();
    let units: Vec<LabeledUnit> = docs
        .iter()
        .flat_map(|d| {
            d.sentences
                .iter()
                .map(|s| LabeledUnit::new(ex.sentence_keys(s), d.label))
        })
        .collect();
    let table = collect_stats(&units, UnitKind::Sentence).unwrap();
    assert_eq!(fs::read_to_string(&stats).unwrap(), table.to_jsonl_string());

    let p = ThresholdParams::new(2, 0.7, 1);
    let mut want = String::new();
    for d in &docs {
        for sent in &d.sentences {
            let label = classify_threshold(&ex.sentence_keys(sent), &table, &p, &p);
            want += &format!("{}\t{}\t{}\n", d.doc_id, sent.sent_id, label);
        }
    }
    assert_eq!(fs::read_to_string(&preds).unwrap(), want);
}

#[test]
fn eval_prints_perfect_macro() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.tsv");
    let gold = dir.path().join("gold.tsv");
    fs::write(&pred, "d1\ts1\tpos\nd2\ts1\tneg\n").unwrap();
    fs::write(&gold, "d2\ts1\tneg\nd1\ts1\tpos\n").unwrap();
    let json = dir.path().join("report.json");
    let out = ok(&[
        "eval",
        "--pred",
        s(&pred),
        "--gold",
        s(&gold),
        "--json",
        s(&json),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with("1.0000"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["macro_f"], 1.0);
}

#[test]
fn eval_reads_gold_from_conllu() {
    let dir = tempfile::tempdir().unwrap();
    let test = fixtures().join("test.conllu");
    let pred = dir.path().join("pred.tsv");
    let rows: String = read_corpus(&test)
        .unwrap()
        .iter()
        .map(|d| format!("{}\t{}\t{}\n", d.doc_id, d.sentences[0].sent_id, d.label))
        .collect();
    fs::write(&pred, rows).unwrap();
    let out = ok(&["eval", "--pred", s(&pred), "--gold", s(&test)]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("1.0000  1.0000   1.0000"));

    fs::write(&pred, "test01\ttest01-1\tpos\n").unwrap();
    let out = run(&["eval", "--pred", s(&pred), "--gold", s(&test)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bootstrap_defaults_are_the_high_precision_settings() {
    let cli = Cli::try_parse_from([
        "affectlog",
        "bootstrap",
        "--seed-corpus",
        "a",
        "--unlabeled",
        "b",
        "--out",
        "c",
        "--log",
        "d",
    ])
    .unwrap();
    let Sub::Bootstrap { thresholds, .. } = cli.command else {
        panic!("wrong subcommand")
    };
    assert_eq!(thresholds.config(), BootstrapConfig::default());
    assert_eq!(thresholds.config().pos, ThresholdParams::new(10, 0.7, 3));
    assert_eq!(thresholds.config().neg, ThresholdParams::new(10, 0.85, 4));
    assert_eq!(cli.seed, 0);
}

#[test]
fn bootstrap_writes_corpus_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("expanded.conllu");
    let log = dir.path().join("log.tsv");
    let rem = dir.path().join("rest.conllu");
    ok(&[
        "bootstrap",
        "--seed-corpus",
        s(&fixtures().join("seed.conllu")),
        "--unlabeled",
        s(&fixtures().join("unlabeled.conllu")),
        "--out",
        s(&out),
        "--log",
        s(&log),
        "--remaining",
        s(&rem),
    ]);
    assert_eq!(
        fs::read_to_string(&log).unwrap(),
        "u01\tpos\t1\nu02\tpos\t1\nu03\tpos\t1\nu04\tneg\t1\nu05\tneg\t1\nu10\tpos\t1\n"
    );
    assert_eq!(read_corpus(&out).unwrap().len(), 12);
    assert_eq!(read_corpus(&rem).unwrap().len(), 4);
}

#[test]
fn usage_and_runtime_errors_exit_differently() {
    assert_eq!(run(&["learn"]).status.code(), Some(2));
    assert_eq!(
        run(&["classify", "--kind", "svm", "--corpus", "x", "--config", "y", "--out", "z"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "learn",
        "--corpus",
        "/nonexistent/x.conllu",
        "--out",
        "/tmp/never",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_affectlog"))
        .args(["induce-affect", "--stats", "x", "--out", "y"])
        .env("AFFECTLOG_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("AFFECTLOG_THREADS"));
}

#[test]
fn failed_run_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("stats.jsonl");
    let bad = dir.path().join("bad.conllu");
    fs::write(&bad, "1\tI\tI\tPRON\t_\t_\t5\tnsubj\t_\t_\n\n").unwrap();
    assert_eq!(
        run(&["learn", "--corpus", s(&bad), "--out", s(&target)])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn extract_dumps_one_record_per_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("patterns.jsonl");
    ok(&[
        "extract",
        "--corpus",
        s(&fixtures().join("templates.conllu")),
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let recs: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let neg = recs.iter().find(|r| r["doc_id"] == "negated").unwrap();
    assert_eq!(neg["key"], "NOT_SUBJ_ACTVP:COME");
    assert_eq!(neg["negated"], true);
    assert!(recs.iter().any(|r| r["key"] == "ACTVP_DOBJ:USE_RECIPE"));

    let plain = dir.path().join("plain.jsonl");
    ok(&[
        "extract",
        "--no-lexicalize",
        "--corpus",
        s(&fixtures().join("templates.conllu")),
        "--out",
        s(&plain),
    ]);
    assert!(!fs::read_to_string(plain).unwrap().contains("USE_RECIPE"));
}
