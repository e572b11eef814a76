//! Synthetic workloads for the criterion benches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use affectlog::corpus::{parse_conllu_str, Document};

const SUBJECTS: [&str; 4] = ["I", "we", "she", "he"];
const VERBS: [&str; 12] = [
    "have", "get", "lose", "miss", "love", "hate", "visit", "call", "watch", "cook", "find",
    "leave",
];
const NOUNS: [&str; 12] = [
    "party", "dinner", "job", "cancer", "fun", "beach", "friend", "mom", "movie", "wallet", "time",
    "trip",
];
const PREPS: [&str; 4] = ["at", "with", "for", "in"];

/// One sentence: `SUBJ [not] VERB NOUN [PREP NOUN] .` in CoNLL-U.
fn sentence(rng: &mut ChaCha8Rng, out: &mut String) {
    let mut rows: Vec<(String, String, &str, usize, &str)> = Vec::new();
    let subj = *SUBJECTS.choose(rng).unwrap();
    let negated = rng.gen_bool(0.15);
    let verb_at = if negated { 4 } else { 2 };
    rows.push((subj.into(), subj.to_lowercase(), "PRON", verb_at, "nsubj"));
    if negated {
        rows.push(("did".into(), "do".into(), "AUX", verb_at, "aux"));
        rows.push(("not".into(), "not".into(), "PART", verb_at, "advmod"));
    }
    let verb = *VERBS.choose(rng).unwrap();
    rows.push((verb.into(), verb.into(), "VERB", 0, "root"));
    let noun = *NOUNS.choose(rng).unwrap();
    rows.push((noun.into(), noun.into(), "NOUN", verb_at, "obj"));
    if rng.gen_bool(0.5) {
        let prep = *PREPS.choose(rng).unwrap();
        let np = *NOUNS.choose(rng).unwrap();
        let np_at = rows.len() + 2;
        rows.push((prep.into(), prep.into(), "ADP", np_at, "case"));
        rows.push((np.into(), np.into(), "NOUN", verb_at, "obl"));
    }
    rows.push((".".into(), ".".into(), "PUNCT", verb_at, "punct"));
    for (i, (form, lemma, upos, head, rel)) in rows.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_\n",
            i + 1
        ));
    }
    out.push('\n');
}

/// Labeled (alternating pos/neg) or unlabeled stories of random sentences.
pub fn synthetic_corpus(
    stories: usize,
    sentences_per_story: usize,
    labeled: bool,
    seed: u64,
) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::new();
    for d in 0..stories {
        text.push_str(&format!("# newdoc id = s{d}\n"));
        if labeled {
            text.push_str(if d % 2 == 0 {
                "# label = pos\n"
            } else {
                "# label = neg\n"
            });
        }
        for _ in 0..sentences_per_story {
            sentence(&mut rng, &mut text);
        }
    }
    parse_conllu_str(&text).expect("synthetic corpus is well-formed")
}
