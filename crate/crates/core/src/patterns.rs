//! AutoSlog-TS extraction templates over Universal Dependencies parses.
//!
//! Each template localizes a pattern to a predicate plus one dependent.
//! The bracketed constituent of a template (its slot) is recorded as
//! `slot_filler` but does not take part in the pattern key.
//!
//! | template              | anchors                      | slot                 |
//! |-----------------------|------------------------------|----------------------|
//! | `SUBJ_ACTVP`          | verb                         | subject              |
//! | `SUBJ_ACTINFVP`       | verb, infinitive             | subject              |
//! | `SUBJ_AUXVP_DOBJ`     | predicate nominal            | subject              |
//! | `ACTVP_DOBJ`          | verb                         | direct object        |
//! | `PASSINFVP_DOBJ`      | participle, infinitive       | object of infinitive |
//! | `SUBJ_AUXVP_DOBJ_OBJ` | subject                      | copular predicate    |
//! | `NP_PREP_NP`          | noun, preposition            | prepositional NP     |
//! | `ACTVP_PREP_NP`       | verb, preposition            | prepositional NP     |
//! | `INFVP_PREP_NP`       | infinitive, preposition      | prepositional NP     |
//!
//! Finite active verbs drive the `ACTVP` templates; infinitives (verbs with a
//! `to` marker) only drive `INFVP_PREP_NP` and the infinitival halves of the
//! two-verb templates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Sentence, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    #[serde(rename = "SUBJ_ACTVP")]
    SubjActVp,
    #[serde(rename = "SUBJ_ACTINFVP")]
    SubjActInfVp,
    #[serde(rename = "SUBJ_AUXVP_DOBJ")]
    SubjAuxVpDobj,
    #[serde(rename = "ACTVP_DOBJ")]
    ActVpDobj,
    #[serde(rename = "PASSINFVP_DOBJ")]
    PassInfVpDobj,
    #[serde(rename = "SUBJ_AUXVP_DOBJ_OBJ")]
    SubjAuxVpDobjObj,
    #[serde(rename = "NP_PREP_NP")]
    NpPrepNp,
    #[serde(rename = "ACTVP_PREP_NP")]
    ActVpPrepNp,
    #[serde(rename = "INFVP_PREP_NP")]
    InfVpPrepNp,
}

impl TemplateId {
    pub const ALL: [TemplateId; 9] = [
        TemplateId::SubjActVp,
        TemplateId::SubjActInfVp,
        TemplateId::SubjAuxVpDobj,
        TemplateId::ActVpDobj,
        TemplateId::PassInfVpDobj,
        TemplateId::SubjAuxVpDobjObj,
        TemplateId::NpPrepNp,
        TemplateId::ActVpPrepNp,
        TemplateId::InfVpPrepNp,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TemplateId::SubjActVp => "SUBJ_ACTVP",
            TemplateId::SubjActInfVp => "SUBJ_ACTINFVP",
            TemplateId::SubjAuxVpDobj => "SUBJ_AUXVP_DOBJ",
            TemplateId::ActVpDobj => "ACTVP_DOBJ",
            TemplateId::PassInfVpDobj => "PASSINFVP_DOBJ",
            TemplateId::SubjAuxVpDobjObj => "SUBJ_AUXVP_DOBJ_OBJ",
            TemplateId::NpPrepNp => "NP_PREP_NP",
            TemplateId::ActVpPrepNp => "ACTVP_PREP_NP",
            TemplateId::InfVpPrepNp => "INFVP_PREP_NP",
        }
    }

    /// Templates that also get an object-lexicalized key variant.
    pub fn lexicalizable(self) -> bool {
        matches!(self, TemplateId::ActVpDobj | TemplateId::SubjAuxVpDobj)
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TemplateId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| format!("unknown template `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatternInstance {
    pub template: TemplateId,
    pub anchors: Vec<String>,
    pub negated: bool,
    pub slot_filler: String,
}

impl PatternInstance {
    pub fn new(template: TemplateId, anchors: &[&str], negated: bool, slot_filler: &str) -> Self {
        PatternInstance {
            template,
            anchors: anchors.iter().map(|a| a.to_lowercase()).collect(),
            negated,
            slot_filler: slot_filler.to_lowercase(),
        }
    }

    pub fn key(&self) -> String {
        canonical_key(self)
    }

    /// The same pattern with the slot filler appended as a final anchor, for
    /// templates where the object lexeme carries the affect (`HAVE_FUN`).
    pub fn lexicalized(&self) -> Option<PatternInstance> {
        if !self.template.lexicalizable() || self.slot_filler.is_empty() {
            return None;
        }
        let mut anchors = self.anchors.clone();
        anchors.push(self.slot_filler.clone());
        Some(PatternInstance {
            anchors,
            ..self.clone()
        })
    }
}

/// Key components recovered from a canonical key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedKey {
    pub template: TemplateId,
    pub anchors: Vec<String>,
    pub negated: bool,
}

const NEGATION_PREFIX: &str = "NOT_";

fn escape_anchor(anchor: &str) -> String {
    let mut out = String::with_capacity(anchor.len());
    for ch in anchor.chars() {
        if ch == '%' || ch == '_' || ch == ':' || ch.is_whitespace() || ch.is_control() {
            let mut buf = [0u8; 4];
            for b in ch.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.extend(ch.to_uppercase());
        }
    }
    out
}

fn unescape_anchor(raw: &str) -> Option<String> {
    let mut bytes = Vec::with_capacity(raw.len());
    let mut iter = raw.bytes();
    while let Some(b) = iter.next() {
        if b == b'%' {
            let hi = iter.next()?;
            let lo = iter.next()?;
            let hex = [hi, lo];
            let hex = std::str::from_utf8(&hex).ok()?;
            bytes.push(u8::from_str_radix(hex, 16).ok()?);
        } else {
            bytes.push(b);
        }
    }
    String::from_utf8(bytes).ok().map(|s| s.to_lowercase())
}

/// `[NOT_]TEMPLATE:ANCHOR_ANCHOR`, uppercase. The slot filler is excluded.
pub fn canonical_key(p: &PatternInstance) -> String {
    let anchors: Vec<String> = p.anchors.iter().map(|a| escape_anchor(a)).collect();
    format!(
        "{}{}:{}",
        if p.negated { NEGATION_PREFIX } else { "" },
        p.template.tag(),
        anchors.join("_")
    )
}

pub fn parse_key(key: &str) -> Option<ParsedKey> {
    let (negated, rest) = match key.strip_prefix(NEGATION_PREFIX) {
        Some(rest) => (true, rest),
        None => (false, key),
    };
    let (tag, anchors) = rest.split_once(':')?;
    let template = tag.parse().ok()?;
    let anchors = anchors
        .split('_')
        .map(unescape_anchor)
        .collect::<Option<Vec<_>>>()?;
    Some(ParsedKey {
        template,
        anchors,
        negated,
    })
}

/// Extraction settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractConfig {
    /// Emit `ACTVP_DOBJ:HAVE_FUN`-style keys alongside the plain ones.
    pub lexicalize_objects: bool,
    /// Maps non-UD relation names onto their UD counterparts.
    pub deprel_aliases: BTreeMap<String, String>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        let aliases = [
            ("dobj", "obj"),
            ("nsubjpass", "nsubj:pass"),
            ("csubjpass", "csubj:pass"),
            ("auxpass", "aux:pass"),
            ("prt", "compound:prt"),
            ("poss", "nmod:poss"),
        ];
        ExtractConfig {
            lexicalize_objects: true,
            deprel_aliases: aliases
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        }
    }
}

/// Read-only view of a sentence with normalized relations and child lists.
struct Tree<'s> {
    sentence: &'s Sentence,
    rels: Vec<String>,
    children: Vec<Vec<usize>>,
}

impl<'s> Tree<'s> {
    fn new(sentence: &'s Sentence, config: &ExtractConfig) -> Self {
        let n = sentence.tokens.len();
        let rels = sentence
            .tokens
            .iter()
            .map(|t| {
                config
                    .deprel_aliases
                    .get(&t.deprel)
                    .cloned()
                    .unwrap_or_else(|| t.deprel.clone())
            })
            .collect();
        let mut children = vec![Vec::new(); n + 1];
        for t in &sentence.tokens {
            if t.head <= n {
                children[t.head].push(t.index);
            }
        }
        Tree {
            sentence,
            rels,
            children,
        }
    }

    fn tok(&self, index: usize) -> &'s Token {
        &self.sentence.tokens[index - 1]
    }

    fn rel(&self, index: usize) -> &str {
        &self.rels[index - 1]
    }

    fn base_rel(&self, index: usize) -> &str {
        self.rel(index).split(':').next().unwrap_or("")
    }

    fn kids(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.children[index].iter().copied()
    }

    fn kids_with<'a>(&'a self, index: usize, rel: &'a str) -> impl Iterator<Item = usize> + 'a {
        self.kids(index).filter(move |&c| self.rel(c) == rel)
    }

    fn is_negation(&self, index: usize) -> bool {
        let t = self.tok(index);
        self.rel(index) == "neg"
            || (self.base_rel(index) == "advmod"
                && (matches!(t.lemma.as_str(), "not" | "n't" | "never")
                    || t.feat("Polarity") == Some("Neg")))
    }

    fn negated(&self, index: usize) -> bool {
        self.kids(index).any(|c| self.is_negation(c))
    }

    fn is_infinitival(&self, index: usize) -> bool {
        self.tok(index).upos == "VERB"
            && self
                .kids_with(index, "mark")
                .any(|c| self.tok(c).lemma == "to")
    }

    fn is_passive(&self, index: usize) -> bool {
        self.tok(index).feat("Voice") == Some("Pass")
            || self
                .kids(index)
                .any(|c| matches!(self.rel(c), "aux:pass" | "nsubj:pass" | "csubj:pass"))
    }

    fn is_finite_active_verb(&self, index: usize) -> bool {
        self.tok(index).upos == "VERB" && !self.is_passive(index) && !self.is_infinitival(index)
    }

    fn subject(&self, index: usize) -> Option<usize> {
        self.kids(index)
            .find(|&c| matches!(self.rel(c), "nsubj" | "csubj"))
    }

    fn has_be_auxiliary(&self, index: usize) -> bool {
        self.kids(index)
            .any(|c| matches!(self.rel(c), "aux" | "aux:pass" | "cop") && self.tok(c).lemma == "be")
    }

    fn is_participle(&self, index: usize) -> bool {
        let t = self.tok(index);
        if !matches!(t.upos.as_str(), "VERB" | "ADJ") {
            return false;
        }
        let surface = t.surface.to_lowercase();
        t.feat("VerbForm") == Some("Part")
            || t.xpos.as_deref() == Some("VBN")
            || self.is_passive(index)
            || surface.ends_with("ed")
            || surface.ends_with("en")
    }

    fn case_marker(&self, index: usize) -> Option<usize> {
        self.kids_with(index, "case").next()
    }

    /// Prepositional dependents as (slot head, preposition lemma). A bare
    /// `obl` without a case marker (`come home`) uses its own lemma.
    fn prepositional(&self, index: usize, rels: &[&str]) -> Vec<(usize, String)> {
        self.kids(index)
            .filter(|&c| rels.contains(&self.base_rel(c)) && self.rel(c) != "nmod:poss")
            .filter_map(|c| match self.case_marker(c) {
                Some(m) => Some((c, self.tok(m).lemma.clone())),
                None if self.rel(c) == "obl" => Some((c, self.tok(c).lemma.clone())),
                None => None,
            })
            .collect()
    }

    fn lemma(&self, index: usize) -> &'s str {
        &self.tok(index).lemma
    }
}

/// Instantiates the nine templates with a fixed configuration.
#[derive(Debug, Clone, Default)]
pub struct PatternExtractor {
    config: ExtractConfig,
}

impl PatternExtractor {
    pub fn new(config: ExtractConfig) -> Self {
        PatternExtractor { config }
    }

    pub fn config(&self) -> &ExtractConfig {
        &self.config
    }

    /// Every template instantiation in the sentence, in token order.
    pub fn extract(&self, sentence: &Sentence) -> Vec<PatternInstance> {
        let tree = Tree::new(sentence, &self.config);
        let mut out = Vec::new();
        let push = |out: &mut Vec<PatternInstance>, t, anchors: &[&str], neg, filler: &str| {
            out.push(PatternInstance::new(t, anchors, neg, filler));
        };

        for tok in &sentence.tokens {
            let i = tok.index;
            let lemma = tree.lemma(i);
            let negated = tree.negated(i);

            if tree.is_finite_active_verb(i) {
                if let Some(subj) = tree.subject(i) {
                    push(
                        &mut out,
                        TemplateId::SubjActVp,
                        &[lemma],
                        negated,
                        tree.lemma(subj),
                    );
                    for x in tree
                        .kids_with(i, "xcomp")
                        .filter(|&x| tree.is_infinitival(x))
                    {
                        push(
                            &mut out,
                            TemplateId::SubjActInfVp,
                            &[lemma, tree.lemma(x)],
                            negated,
                            tree.lemma(subj),
                        );
                    }
                }
                for obj in tree.kids_with(i, "obj") {
                    push(
                        &mut out,
                        TemplateId::ActVpDobj,
                        &[lemma],
                        negated,
                        tree.lemma(obj),
                    );
                }
                for (np, prep) in tree.prepositional(i, &["obl", "nmod"]) {
                    push(
                        &mut out,
                        TemplateId::ActVpPrepNp,
                        &[lemma, &prep],
                        negated,
                        tree.lemma(np),
                    );
                }
            }

            if tree.is_infinitival(i) {
                for (np, prep) in tree.prepositional(i, &["obl", "nmod"]) {
                    push(
                        &mut out,
                        TemplateId::InfVpPrepNp,
                        &[lemma, &prep],
                        negated,
                        tree.lemma(np),
                    );
                }
            }

            if tree.has_be_auxiliary(i) && tree.is_participle(i) {
                for x in tree
                    .kids(i)
                    .filter(|&x| matches!(tree.base_rel(x), "xcomp" | "advcl"))
                    .filter(|&x| tree.is_infinitival(x))
                {
                    for obj in tree.kids_with(x, "obj") {
                        push(
                            &mut out,
                            TemplateId::PassInfVpDobj,
                            &[lemma, tree.lemma(x)],
                            negated,
                            tree.lemma(obj),
                        );
                    }
                }
            }

            if tree.kids_with(i, "cop").next().is_some() {
                if let Some(subj) = tree.subject(i) {
                    if matches!(tok.upos.as_str(), "NOUN" | "PROPN" | "NUM" | "PRON") {
                        push(
                            &mut out,
                            TemplateId::SubjAuxVpDobj,
                            &[lemma],
                            negated,
                            tree.lemma(subj),
                        );
                    }
                    push(
                        &mut out,
                        TemplateId::SubjAuxVpDobjObj,
                        &[tree.lemma(subj)],
                        negated,
                        lemma,
                    );
                }
            }

            if matches!(tok.upos.as_str(), "NOUN" | "PROPN") {
                for (np, prep) in tree.prepositional(i, &["nmod"]) {
                    push(
                        &mut out,
                        TemplateId::NpPrepNp,
                        &[lemma, &prep],
                        false,
                        tree.lemma(np),
                    );
                }
            }
        }
        out
    }

    /// Extracted instances plus, when enabled, their lexicalized variants.
    pub fn instances(&self, sentence: &Sentence) -> Vec<PatternInstance> {
        let base = self.extract(sentence);
        if !self.config.lexicalize_objects {
            return base;
        }
        let mut out = Vec::with_capacity(base.len() * 2);
        for p in base {
            let variant = p.lexicalized();
            out.push(p);
            out.extend(variant);
        }
        out
    }

    /// Keys of a sentence, one per occurrence.
    pub fn sentence_keys(&self, sentence: &Sentence) -> Vec<String> {
        self.instances(sentence).iter().map(canonical_key).collect()
    }

    /// Keys of a whole story: all sentences, not just first-person ones.
    pub fn document_keys(&self, doc: &Document) -> Vec<String> {
        doc.sentences
            .iter()
            .flat_map(|s| self.sentence_keys(s))
            .collect()
    }

    pub fn records(&self, doc: &Document) -> Vec<PatternRecord> {
        doc.sentences
            .iter()
            .flat_map(|s| {
                self.instances(s)
                    .into_iter()
                    .map(move |p| PatternRecord::new(&p, &s.doc_id, &s.sent_id))
            })
            .collect()
    }
}

/// Extracts with the default configuration.
pub fn extract_patterns(sentence: &Sentence) -> Vec<PatternInstance> {
    PatternExtractor::default().extract(sentence)
}

/// One line of the pattern dump.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub key: String,
    pub template: TemplateId,
    pub anchors: Vec<String>,
    pub negated: bool,
    pub slot_filler: String,
    pub doc_id: String,
    pub sent_id: String,
}

impl PatternRecord {
    pub fn new(p: &PatternInstance, doc_id: &str, sent_id: &str) -> Self {
        PatternRecord {
            key: canonical_key(p),
            template: p.template,
            anchors: p.anchors.clone(),
            negated: p.negated,
            slot_filler: p.slot_filler.clone(),
            doc_id: doc_id.to_string(),
            sent_id: sent_id.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conllu_str;
    use proptest::prelude::*;

    fn parse(rows: &str) -> Sentence {
        let text: String = rows
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.split_whitespace().collect::<Vec<_>>().join("\t") + "\n")
            .collect();
        parse_conllu_str(&text)
            .unwrap()
            .remove(0)
            .sentences
            .remove(0)
    }

    // columns: id form lemma upos xpos feats head deprel deps misc
    const I_DID_NOT_COME_HOME: &str = "
        1 I i PRON _ _ 4 nsubj _ _
        2 did do AUX _ _ 4 aux _ _
        3 not not PART _ _ 4 advmod _ _
        4 come come VERB _ _ 0 root _ _
        5 home home NOUN _ _ 4 obl _ _";

    #[test]
    fn key_examples() {
        let p = PatternInstance::new(TemplateId::SubjActVp, &["cry"], false, "i");
        assert_eq!(canonical_key(&p), "SUBJ_ACTVP:CRY");
        let p = PatternInstance::new(TemplateId::ActVpDobj, &["have"], false, "fun");
        assert_eq!(canonical_key(&p), "ACTVP_DOBJ:HAVE");
        assert_eq!(p.lexicalized().unwrap().key(), "ACTVP_DOBJ:HAVE_FUN");
        let p = PatternInstance::new(TemplateId::SubjActVp, &["come"], true, "i");
        assert_eq!(canonical_key(&p), "NOT_SUBJ_ACTVP:COME");
    }

    #[test]
    fn negated_come_home() {
        let s = parse(I_DID_NOT_COME_HOME);
        let found = extract_patterns(&s);
        assert!(found.contains(&PatternInstance::new(
            TemplateId::SubjActVp,
            &["come"],
            true,
            "i"
        )));
        let keys: Vec<_> = found.iter().map(canonical_key).collect();
        assert!(keys.contains(&"NOT_SUBJ_ACTVP:COME".to_string()));
        assert!(keys.contains(&"NOT_ACTVP_PREP_NP:COME_HOME".to_string()));
    }

    #[test]
    fn lexicalization_flag() {
        let s = parse(
            "1 We we PRON _ _ 2 nsubj _ _
             2 had have VERB _ _ 0 root _ _
             3 fun fun NOUN _ _ 2 obj _ _",
        );
        let on = PatternExtractor::default().sentence_keys(&s);
        assert_eq!(
            on,
            vec!["SUBJ_ACTVP:HAVE", "ACTVP_DOBJ:HAVE", "ACTVP_DOBJ:HAVE_FUN"]
        );
        let off = PatternExtractor::new(ExtractConfig {
            lexicalize_objects: false,
            ..Default::default()
        })
        .sentence_keys(&s);
        assert_eq!(off, vec!["SUBJ_ACTVP:HAVE", "ACTVP_DOBJ:HAVE"]);
    }

    #[test]
    fn stanford_aliases_normalized() {
        let s = parse(
            "1 I i PRON _ _ 2 nsubj _ _
             2 lost lose VERB _ _ 0 root _ _
             3 it it PRON _ _ 2 dobj _ _",
        );
        let keys = PatternExtractor::default().sentence_keys(&s);
        assert!(keys.contains(&"ACTVP_DOBJ:LOSE".to_string()));
    }

    #[test]
    fn passive_verb_is_not_active() {
        let s = parse(
            "1 I i PRON _ _ 3 nsubj:pass _ _
             2 was be AUX _ _ 3 aux:pass _ _
             3 fired fire VERB _ _ 0 root _ _",
        );
        assert!(extract_patterns(&s).is_empty());
    }

    #[test]
    fn no_match_is_empty() {
        let s = parse("1 Wow wow INTJ _ _ 0 root _ _");
        assert!(extract_patterns(&s).is_empty());
    }

    #[test]
    fn parse_key_roundtrip_with_escapes() {
        let p = PatternInstance::new(TemplateId::NpPrepNp, &["ice_cream", "of:x"], false, "y");
        let key = canonical_key(&p);
        assert_eq!(key, "NP_PREP_NP:ICE%5FCREAM_OF%3AX");
        let parsed = parse_key(&key).unwrap();
        assert_eq!(parsed.anchors, vec!["ice_cream", "of:x"]);
        assert_eq!(parsed.template, TemplateId::NpPrepNp);
        assert!(!parsed.negated);
        assert!(parse_key("BOGUS:X").is_none());
    }

    proptest! {
        #[test]
        fn key_injective(
            a in prop::collection::vec("[a-z_:% ]{1,6}", 1..3),
            b in prop::collection::vec("[a-z_:% ]{1,6}", 1..3),
            ta in 0usize..9, tb in 0usize..9,
            na: bool, nb: bool,
        ) {
            let pa = PatternInstance { template: TemplateId::ALL[ta], anchors: a, negated: na, slot_filler: String::new() };
            let pb = PatternInstance { template: TemplateId::ALL[tb], anchors: b, negated: nb, slot_filler: String::new() };
            let same = pa.template == pb.template && pa.anchors == pb.anchors && pa.negated == pb.negated;
            prop_assert_eq!(canonical_key(&pa) == canonical_key(&pb), same);
            let parsed = parse_key(&canonical_key(&pa)).unwrap();
            prop_assert_eq!(parsed.anchors, pa.anchors);
        }
    }
}
