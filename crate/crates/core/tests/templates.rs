use std::path::PathBuf;

use affectlog::corpus::{read_corpus, Document};
use affectlog::patterns::{extract_patterns, PatternInstance, TemplateId};
use TemplateId::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn docs() -> Vec<Document> {
    read_corpus(&fixture("templates.conllu")).unwrap()
}

fn p(t: TemplateId, anchors: &[&str], neg: bool, filler: &str) -> PatternInstance {
    PatternInstance::new(t, anchors, neg, filler)
}

fn expected() -> Vec<(&'static str, Vec<PatternInstance>)> {
    vec![
        (
            "subj-actvp",
            vec![
                p(SubjActVp, &["cry"], false, "i"),
                p(ActVpPrepNp, &["cry", "at"], false, "thought"),
                p(NpPrepNp, &["thought", "of"], false, "it"),
            ],
        ),
        (
            "subj-actinfvp",
            vec![
                p(SubjActVp, &["get"], false, "i"),
                p(SubjActInfVp, &["get", "swim"], false, "i"),
            ],
        ),
        (
            "subj-auxvp-dobj",
            vec![
                p(SubjAuxVpDobj, &["molar"], false, "it"),
                p(SubjAuxVpDobjObj, &["it"], false, "molar"),
            ],
        ),
        (
            "actvp-dobj",
            vec![
                p(SubjActVp, &["use"], false, "i"),
                p(ActVpDobj, &["use"], false, "recipe"),
            ],
        ),
        (
            "passinfvp-dobj",
            vec![p(PassInfVpDobj, &["surprise", "find"], false, "festival")],
        ),
        (
            "subj-auxvp-dobj-obj",
            vec![p(SubjAuxVpDobjObj, &["relationship"], false, "nonexistent")],
        ),
        (
            "np-prep-np",
            vec![
                p(SubjActVp, &["show"], false, "i"),
                p(ActVpDobj, &["show"], false, "care"),
                p(NpPrepNp, &["care", "for"], false, "he"),
            ],
        ),
        (
            "actvp-prep-np",
            vec![
                p(SubjActVp, &["cheat"], false, "he"),
                p(ActVpPrepNp, &["cheat", "on"], false, "i"),
            ],
        ),
        (
            "infvp-prep-np",
            vec![
                p(SubjAuxVpDobjObj, &["he"], false, "generous"),
                p(InfVpPrepNp, &["offer", "to"], false, "we"),
            ],
        ),
        (
            "negated",
            vec![
                p(SubjActVp, &["come"], true, "i"),
                p(ActVpPrepNp, &["come", "home"], true, "home"),
            ],
        ),
    ]
}

#[test]
fn each_fixture_yields_exactly_its_instances() {
    let docs = docs();
    for (id, want) in expected() {
        let doc = docs.iter().find(|d| d.doc_id == id).unwrap();
        assert_eq!(doc.sentences.len(), 1);
        assert_eq!(extract_patterns(&doc.sentences[0]), want, "{id}");
    }
}

#[test]
fn every_template_is_covered() {
    let all: Vec<TemplateId> = expected()
        .into_iter()
        .flat_map(|(_, v)| v)
        .map(|p| p.template)
        .collect();
    for t in TemplateId::ALL {
        assert!(all.contains(&t), "{t} has no fixture");
    }
}

#[test]
fn keys_of_fixture_instances() {
    let docs = docs();
    let keys = |id: &str| -> Vec<String> {
        let d = docs.iter().find(|d| d.doc_id == id).unwrap();
        extract_patterns(&d.sentences[0])
            .iter()
            .map(|p| p.key())
            .collect()
    };
    assert_eq!(
        keys("negated"),
        ["NOT_SUBJ_ACTVP:COME", "NOT_ACTVP_PREP_NP:COME_HOME"]
    );
    assert_eq!(keys("actvp-prep-np")[1], "ACTVP_PREP_NP:CHEAT_ON");
    assert_eq!(keys("passinfvp-dobj"), ["PASSINFVP_DOBJ:SURPRISE_FIND"]);
}
