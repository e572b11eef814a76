use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use affectlog::cascade::{cascade_classify, CascadeSpec, Stage};
use affectlog::corpus::Polarity::{self, *};
use affectlog::Error;

const UNITS: usize = 1000;

/// Scripted answers plus one invocation counter per unit.
struct Mock {
    answers: Vec<Polarity>,
    calls: Vec<AtomicUsize>,
}

impl Mock {
    fn random(rng: &mut ChaCha8Rng) -> Arc<Self> {
        let answers = (0..UNITS)
            .map(|_| match rng.gen_range(0..4) {
                0 => Pos,
                1 => Neg,
                _ => Neutral,
            })
            .collect();
        Arc::new(Mock {
            answers,
            calls: (0..UNITS).map(|_| AtomicUsize::new(0)).collect(),
        })
    }
}

fn stage(name: &str, mock: &Arc<Mock>) -> Stage<usize> {
    let m = Arc::clone(mock);
    Stage::new(name, move |u: &usize| {
        m.calls[*u].fetch_add(1, Ordering::Relaxed);
        Ok(m.answers[*u])
    })
}

fn spec(mocks: &[Arc<Mock>]) -> CascadeSpec<usize> {
    let stages = mocks
        .iter()
        .enumerate()
        .map(|(i, m)| stage(&format!("s{i}"), m))
        .collect();
    CascadeSpec::new(stages).unwrap()
}

#[test]
fn later_stages_run_only_after_neutral() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mocks: Vec<Arc<Mock>> = (0..3).map(|_| Mock::random(&mut rng)).collect();
        let cascade = spec(&mocks);
        let labels: Vec<Polarity> = (0..UNITS)
            .into_par_iter()
            .map(|u| cascade_classify(&u, &cascade).unwrap())
            .collect();

        for (u, label) in labels.iter().enumerate() {
            let mut all_neutral_before = true;
            let mut want = Neutral;
            for m in &mocks {
                let calls = m.calls[u].load(Ordering::Relaxed);
                assert_eq!(calls, usize::from(all_neutral_before), "unit {u}");
                if all_neutral_before && m.answers[u] != Neutral {
                    want = m.answers[u];
                    all_neutral_before = false;
                }
            }
            assert_eq!(*label, want);
        }
    }
}

#[test]
fn truncating_after_the_deciding_stage_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mocks: Vec<Arc<Mock>> = (0..3).map(|_| Mock::random(&mut rng)).collect();
    let full = spec(&mocks);
    let prefixes: Vec<CascadeSpec<usize>> = (1..=3).map(|k| spec(&mocks[..k])).collect();
    for u in 0..UNITS {
        let decision = full.classify_traced(&u).unwrap();
        match decision.stage {
            Some(i) => {
                for p in &prefixes[i..] {
                    assert_eq!(p.classify(&u).unwrap(), decision.label);
                }
                assert_eq!(decision.label, mocks[i].answers[u]);
            }
            None => {
                assert_eq!(decision.label, Neutral);
                assert!(prefixes.iter().all(|p| p.classify(&u).unwrap() == Neutral));
            }
        }
    }
}

#[test]
fn stage_errors_name_the_stage() {
    let ok = |_: &usize| Ok(Neutral);
    let bad =
        |_: &usize| -> affectlog::Result<Polarity> { Err(Error::Precondition("boom".into())) };
    let cascade =
        CascadeSpec::new(vec![Stage::new("first", ok), Stage::new("second", bad)]).unwrap();
    match cascade.classify(&0).unwrap_err() {
        Error::Stage { stage, .. } => assert_eq!(stage, "second"),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn stage_count_and_names_are_checked() {
    let n = |_: &usize| Ok(Neutral);
    assert!(CascadeSpec::<usize>::new(vec![]).is_err());
    assert!(CascadeSpec::new((0..4).map(|i| Stage::new(format!("s{i}"), n)).collect()).is_err());
    assert!(CascadeSpec::new(vec![Stage::new("a", n), Stage::new("a", n)]).is_err());
    assert!(CascadeSpec::new(vec![
        Stage::new("a", n),
        Stage::new("b", n),
        Stage::new("c", n)
    ])
    .is_ok());
}
