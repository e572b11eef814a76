//! Dependency-parsed narratives in CoNLL-U.
//!
//! Document boundaries and story labels travel as comments:
//!
//! ```text
//! # newdoc id = story-17
//! # label = pos
//! # sent_id = story-17-1
//! # text = I cry
//! 1  I    I    PRON  _  _  2  nsubj  _  _
//! 2  cry  cry  VERB  _  _  0  root   _  _
//! ```
//!
//! Token columns are tab-separated.
//!
//! Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are skipped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Story labels (gold) and classifier outputs share one type.
///
/// `Neutral` is only ever produced by a classifier; `Unlabeled` only ever
/// marks a story without a gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Pos,
    Neg,
    Neutral,
    Unlabeled,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Pos => "pos",
            Polarity::Neg => "neg",
            Polarity::Neutral => "neutral",
            Polarity::Unlabeled => "unlabeled",
        }
    }

    /// True for the two gold sentiment classes.
    pub fn is_class(self) -> bool {
        matches!(self, Polarity::Pos | Polarity::Neg)
    }

    /// The other sentiment class. Identity on `Neutral` and `Unlabeled`.
    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
            other => other,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pos" | "positive" => Ok(Polarity::Pos),
            "neg" | "negative" => Ok(Polarity::Neg),
            "neutral" => Ok(Polarity::Neutral),
            "unlabeled" => Ok(Polarity::Unlabeled),
            other => Err(format!("unknown polarity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    /// Always lowercase.
    pub lemma: String,
    pub upos: String,
    pub xpos: Option<String>,
    /// Head token index, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub feats: BTreeMap<String, String>,
}

impl Token {
    pub fn feat(&self, key: &str) -> Option<&str> {
        self.feats.get(key).map(String::as_str)
    }

    /// Universal relation without its subtype (`nsubj:pass` -> `nsubj`).
    pub fn base_deprel(&self) -> &str {
        self.deprel.split(':').next().unwrap_or("")
    }

    pub fn is_punct(&self) -> bool {
        self.upos == "PUNCT"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: String,
    pub sent_id: String,
    pub text: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Token at a 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn head_of(&self, token: &Token) -> Option<&Token> {
        self.token(token.head)
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    pub fn root(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    /// Checks the dependency tree: heads in range, no self-loops, one root,
    /// no cycles, contiguous indices.
    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::tree(&self.sent_id, "sentence has no tokens"));
        }
        let n = self.tokens.len();
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(Error::tree(
                    &self.sent_id,
                    format!("token indices not contiguous at position {}", i + 1),
                ));
            }
            if tok.head > n {
                return Err(Error::tree(
                    &self.sent_id,
                    format!(
                        "token {} has head {} beyond sentence length {n}",
                        tok.index, tok.head
                    ),
                ));
            }
            if tok.head == tok.index {
                return Err(Error::tree(
                    &self.sent_id,
                    format!("token {} is its own head", tok.index),
                ));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(Error::tree(
                &self.sent_id,
                format!("expected exactly one root, found {roots}"),
            ));
        }
        for tok in &self.tokens {
            let mut cur = tok.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(Error::tree(
                        &self.sent_id,
                        format!("cyclic head chain through token {}", tok.index),
                    ));
                }
                cur = self.tokens[cur - 1].head;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub label: Polarity,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }
}

pub const FIRST_PERSON_MARKERS: &[&str] = &[
    "i",
    "we",
    "me",
    "my",
    "us",
    "our",
    "mine",
    "ours",
    "myself",
    "ourselves",
];

const SUBJECT_RELS: &[&str] = &["nsubj", "csubj", "expl"];

fn grammatical_role(base_deprel: &str) -> &str {
    if SUBJECT_RELS.contains(&base_deprel) {
        "subj"
    } else {
        base_deprel
    }
}

/// A sentence counts as first-person when it carries an explicit
/// first-person marker, or opens with a progressive verb or a pleonastic
/// `it`.
pub fn is_first_person(sentence: &Sentence) -> bool {
    let has_marker = sentence
        .tokens
        .iter()
        .any(|t| FIRST_PERSON_MARKERS.contains(&t.surface.to_lowercase().as_str()));
    if has_marker {
        return true;
    }

    let Some(first) = sentence.tokens.iter().find(|t| !t.is_punct()) else {
        return false;
    };
    starts_progressive(first) || is_pleonastic_it(sentence, first)
}

fn starts_progressive(tok: &Token) -> bool {
    if tok.upos != "VERB" {
        return false;
    }
    let participle = tok.feat("VerbForm") == Some("Part") && tok.feat("Tense") == Some("Pres");
    participle || tok.surface.to_lowercase().ends_with("ing")
}

// `it` is taken as pleonastic when its head is a verb and no other dependent
// of that verb fills the same grammatical role.
fn is_pleonastic_it(sentence: &Sentence, tok: &Token) -> bool {
    if tok.surface.to_lowercase() != "it" {
        return false;
    }
    let Some(head) = sentence.head_of(tok) else {
        return false;
    };
    if head.upos != "VERB" && head.upos != "AUX" {
        return false;
    }
    let role = grammatical_role(tok.base_deprel());
    !sentence
        .children(head.index)
        .any(|c| c.index != tok.index && grammatical_role(c.base_deprel()) == role)
}

/// Pairs each sentence of a labeled story with the story label.
pub fn inherit_labels(
    doc: &Document,
    first_person_only: bool,
) -> Result<Vec<(&Sentence, Polarity)>> {
    if !doc.label.is_class() {
        return Err(Error::Precondition(format!(
            "document `{}` is {}; label inheritance needs pos or neg",
            doc.doc_id, doc.label
        )));
    }
    Ok(doc
        .sentences
        .iter()
        .filter(|s| !first_person_only || is_first_person(s))
        .map(|s| (s, doc.label))
        .collect())
}

/// Sentence-level training pairs from every labeled story; unlabeled stories
/// are skipped.
pub fn labeled_sentences(docs: &[Document], first_person_only: bool) -> Vec<(&Sentence, Polarity)> {
    docs.iter()
        .filter(|d| d.label.is_class())
        .flat_map(|d| inherit_labels(d, first_person_only).expect("label checked above"))
        .collect()
}

const DEFAULT_DOC_ID: &str = "default";

#[derive(Default)]
struct PendingSentence {
    sent_id: Option<String>,
    text: Option<String>,
    tokens: Vec<Token>,
    has_header: bool,
    start_line: usize,
}

struct Parser {
    documents: Vec<Document>,
    seen_ids: HashSet<String>,
    pending: PendingSentence,
}

impl Parser {
    fn new() -> Self {
        Parser {
            documents: Vec::new(),
            seen_ids: HashSet::new(),
            pending: PendingSentence::default(),
        }
    }

    fn open_document(&mut self, doc_id: &str, line: usize) -> Result<()> {
        if !self.seen_ids.insert(doc_id.to_string()) {
            return Err(Error::parse(
                line,
                format!("duplicate document id `{doc_id}`"),
            ));
        }
        self.documents.push(Document {
            doc_id: doc_id.to_string(),
            label: Polarity::Unlabeled,
            sentences: Vec::new(),
        });
        Ok(())
    }

    fn current_document(&mut self, line: usize) -> Result<&mut Document> {
        if self.documents.is_empty() {
            self.open_document(DEFAULT_DOC_ID, line)?;
        }
        Ok(self.documents.last_mut().expect("document opened above"))
    }

    fn flush(&mut self, line: usize) -> Result<()> {
        let pending = std::mem::take(&mut self.pending);
        if pending.tokens.is_empty() {
            if pending.has_header {
                return Err(Error::parse(
                    pending.start_line,
                    "sentence header without any token lines",
                ));
            }
            return Ok(());
        }
        let doc = self.current_document(line)?;
        let sent_id = pending
            .sent_id
            .unwrap_or_else(|| format!("{}-{}", doc.doc_id, doc.sentences.len() + 1));
        let text = pending.text.unwrap_or_else(|| {
            pending
                .tokens
                .iter()
                .map(|t| t.surface.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        });
        let sentence = Sentence {
            doc_id: doc.doc_id.clone(),
            sent_id,
            text,
            tokens: pending.tokens,
        };
        sentence.validate()?;
        doc.sentences.push(sentence);
        Ok(())
    }

    fn comment(&mut self, body: &str, line: usize) -> Result<()> {
        let Some((key, value)) = body.split_once('=') else {
            return Ok(());
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "newdoc id" => {
                self.flush(line)?;
                self.open_document(value, line)?;
            }
            "label" => {
                let label = match value.to_ascii_lowercase().as_str() {
                    "pos" => Polarity::Pos,
                    "neg" => Polarity::Neg,
                    other => {
                        return Err(Error::parse(line, format!("unknown label `{other}`")));
                    }
                };
                self.current_document(line)?.label = label;
            }
            "sent_id" => {
                self.start_header(line);
                self.pending.sent_id = Some(value.to_string());
            }
            "text" => {
                self.start_header(line);
                self.pending.text = Some(value.to_string());
            }
            _ => {}
        }
        Ok(())
    }

    fn start_header(&mut self, line: usize) {
        if !self.pending.has_header && self.pending.tokens.is_empty() {
            self.pending.start_line = line;
        }
        self.pending.has_header = true;
    }

    fn token(&mut self, raw: &str, line: usize) -> Result<()> {
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                line,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            return Ok(());
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad token id `{}`", cols[0])))?;
        let expected = self.pending.tokens.len() + 1;
        if index != expected {
            return Err(Error::parse(
                line,
                format!("token id {index} out of sequence, expected {expected}"),
            ));
        }
        let head: usize = cols[6]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad head `{}`", cols[6])))?;
        let surface = cols[1].to_string();
        let lemma = match cols[2] {
            "_" | "" => surface.to_lowercase(),
            l => l.to_lowercase(),
        };
        let feats = parse_feats(cols[5]).map_err(|m| Error::parse(line, m))?;
        if self.pending.tokens.is_empty() && !self.pending.has_header {
            self.pending.start_line = line;
        }
        self.pending.tokens.push(Token {
            index,
            surface,
            lemma,
            upos: cols[3].to_string(),
            xpos: (cols[4] != "_").then(|| cols[4].to_string()),
            head,
            deprel: cols[7].to_string(),
            feats,
        });
        Ok(())
    }
}

fn parse_feats(raw: &str) -> Result<BTreeMap<String, String>, String> {
    let mut feats = BTreeMap::new();
    if raw == "_" || raw.is_empty() {
        return Ok(feats);
    }
    for pair in raw.split('|') {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("malformed feature `{pair}`"))?;
        feats.insert(k.to_string(), v.to_string());
    }
    Ok(feats)
}

/// Reads CoNLL-U into documents, enforcing tree well-formedness.
pub fn parse_conllu<R: Read>(reader: R) -> Result<Vec<Document>> {
    let mut parser = Parser::new();
    let mut last_line = 0;
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            parser.flush(lineno)?;
        } else if let Some(body) = trimmed.strip_prefix('#') {
            parser.comment(body, lineno)?;
        } else {
            parser.token(trimmed, lineno)?;
        }
    }
    parser.flush(last_line + 1)?;
    Ok(parser.documents)
}

pub fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(file)
}

pub fn parse_conllu_str(input: &str) -> Result<Vec<Document>> {
    parse_conllu(input.as_bytes())
}

/// Serializes documents back to the CoNLL-U dialect read by [`parse_conllu`].
pub fn write_conllu(documents: &[Document]) -> String {
    let mut out = String::new();
    for doc in documents {
        out.push_str(&format!("# newdoc id = {}\n", doc.doc_id));
        if doc.label.is_class() {
            out.push_str(&format!("# label = {}\n", doc.label));
        }
        for sentence in &doc.sentences {
            out.push_str(&format!("# sent_id = {}\n", sentence.sent_id));
            out.push_str(&format!("# text = {}\n", sentence.text));
            for t in &sentence.tokens {
                let feats = if t.feats.is_empty() {
                    "_".to_string()
                } else {
                    t.feats
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect::<Vec<_>>()
                        .join("|")
                };
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t_\n",
                    t.index,
                    t.surface,
                    t.lemma,
                    t.upos,
                    t.xpos.as_deref().unwrap_or("_"),
                    feats,
                    t.head,
                    t.deprel
                ));
            }
            out.push('\n');
        }
    }
    out
}
