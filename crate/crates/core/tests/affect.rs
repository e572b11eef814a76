use std::path::PathBuf;

use affectlog::affect::{induce_object_affect, InductionConfig};
use affectlog::corpus::{labeled_sentences, read_corpus};
use affectlog::patterns::PatternExtractor;
use affectlog::stats::{collect_stats, LabeledUnit, UnitKind};
use affectlog::{compose_possession, first_person_object_affect, AffectValue, PossessionPredicate};
use AffectValue::{Minus, Plus};
use PossessionPredicate::{Have, Lack};

#[test]
fn possession_table() {
    let rows = [
        (Plus, Plus, Plus, Minus),
        (Plus, Minus, Minus, Plus),
        (Minus, Plus, Minus, Plus),
        (Minus, Minus, Plus, Minus),
    ];
    for (x, y, have, lack) in rows {
        assert_eq!(compose_possession(x, y, Have), have, "{x} {y} have");
        assert_eq!(compose_possession(x, y, Lack), lack, "{x} {y} lack");
    }
}

#[test]
fn first_person_reduction_inverts_composition() {
    for y in [Plus, Minus] {
        for p in [Have, Lack] {
            assert_eq!(
                first_person_object_affect(compose_possession(Plus, y, p), p),
                y
            );
        }
    }
}

#[test]
fn induced_objects_from_seed_table() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/seed.conllu");
    let docs = read_corpus(&path).unwrap();
    let ex = PatternExtractor::default();
    let units: Vec<LabeledUnit> = labeled_sentences(&docs, false)
        .into_iter()
        .map(|(s, l)| LabeledUnit::new(ex.sentence_keys(s), l))
        .collect();
    let table = collect_stats(&units, UnitKind::Sentence).unwrap();
    let rows = induce_object_affect(&table, &InductionConfig::default());
    let find = |o: &str| {
        rows.iter()
            .find(|r| r.object == o)
            .map(|r| (r.predicate, r.affect))
    };
    assert_eq!(find("cancer"), Some((Have, Minus)));
    assert_eq!(find("fun"), Some((Have, Plus)));
    assert_eq!(find("party"), Some((Have, Plus)));
    assert!(rows.iter().all(|r| r.p_class >= 0.7));
}
