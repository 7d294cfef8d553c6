//! Vertical POS-tagged corpus format.
//!
//! One token per line as `surface<TAB>lemma<TAB>tag`. A blank line ends a
//! sentence, lines starting with `#` are comments, and both LF and CRLF line
//! endings are accepted. Tags are a coarse category optionally refined with a
//! fine subtag after a colon, e.g. `VERB:PART` or `PART:POSS`.
//!
//! ```text
//! # doc 1
//! During	during	ADP
//! the	the	DET
//! war	war	NOUN
//!
//! ```

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, BufRead};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("empty sentence")]
    EmptySentence,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Malformed { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// Coarse part-of-speech category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Coarse {
    Noun,
    Propn,
    Verb,
    Aux,
    Adj,
    Adv,
    Det,
    Adp,
    Pron,
    Num,
    Conj,
    Part,
    Punct,
    Other,
}

impl Coarse {
    pub const ALL: [Coarse; 14] = [
        Coarse::Noun,
        Coarse::Propn,
        Coarse::Verb,
        Coarse::Aux,
        Coarse::Adj,
        Coarse::Adv,
        Coarse::Det,
        Coarse::Adp,
        Coarse::Pron,
        Coarse::Num,
        Coarse::Conj,
        Coarse::Part,
        Coarse::Punct,
        Coarse::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Coarse::Noun => "NOUN",
            Coarse::Propn => "PROPN",
            Coarse::Verb => "VERB",
            Coarse::Aux => "AUX",
            Coarse::Adj => "ADJ",
            Coarse::Adv => "ADV",
            Coarse::Det => "DET",
            Coarse::Adp => "ADP",
            Coarse::Pron => "PRON",
            Coarse::Num => "NUM",
            Coarse::Conj => "CONJ",
            Coarse::Part => "PART",
            Coarse::Punct => "PUNCT",
            Coarse::Other => "OTHER",
        }
    }
}

impl FromStr for Coarse {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coarse::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown coarse tag `{}`", s))
    }
}

impl fmt::Display for Coarse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A coarse tag with an optional fine refinement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    pub coarse: Coarse,
    pub fine: Option<String>,
}

impl Tag {
    pub fn coarse(coarse: Coarse) -> Self {
        Tag { coarse, fine: None }
    }

    pub fn refined(coarse: Coarse, fine: impl Into<String>) -> Self {
        Tag {
            coarse,
            fine: Some(fine.into()),
        }
    }

    /// `self` used as a pattern: a coarse-only pattern matches any refinement.
    pub fn admits(&self, tag: &Tag) -> bool {
        self.coarse == tag.coarse
            && match &self.fine {
                None => true,
                Some(f) => tag.fine.as_deref() == Some(f.as_str()),
            }
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None => Ok(Tag::coarse(s.parse()?)),
            Some((c, f)) if !f.is_empty() && !f.contains(':') => Ok(Tag::refined(c.parse()?, f)),
            Some(_) => Err(format!("malformed tag `{}`", s)),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.fine {
            None => write!(f, "{}", self.coarse),
            Some(fine) => write!(f, "{}:{}", self.coarse, fine),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub lemma: String,
    pub tag: Tag,
}

impl TaggedToken {
    /// Lowercases the lemma. Empty surface or lemma is rejected.
    pub fn new(surface: impl Into<String>, lemma: &str, tag: Tag) -> Result<Self, String> {
        let surface = surface.into();
        if surface.is_empty() {
            return Err("empty surface".into());
        }
        if lemma.is_empty() {
            return Err("empty lemma".into());
        }
        Ok(TaggedToken {
            surface,
            lemma: lemma.to_lowercase(),
            tag,
        })
    }

    pub fn is_noun(&self) -> bool {
        self.tag.coarse == Coarse::Noun
    }
}

/// A non-empty token sequence. Cue matching never crosses sentence boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    tokens: Vec<TaggedToken>,
}

impl Sentence {
    pub fn new(tokens: Vec<TaggedToken>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        Ok(Sentence { tokens })
    }

    pub fn tokens(&self) -> &[TaggedToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// The first malformed line aborts parsing.
    #[default]
    Strict,
    /// Malformed lines are logged and skipped.
    Lenient,
}

/// Parses one token line (without its line terminator).
pub fn parse_token_line(line: &str) -> Result<TaggedToken, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    if let Some(i) = fields.iter().position(|f| f.is_empty()) {
        return Err(format!("field {} is empty", i + 1));
    }
    let tag: Tag = fields[2].parse()?;
    TaggedToken::new(fields[0], fields[1], tag)
}

/// Lazy sentence stream over a tagged corpus.
pub struct SentenceReader<R> {
    input: R,
    mode: ParseMode,
    line_no: usize,
    skipped: usize,
    buf: String,
    done: bool,
}

/// Streams sentences from `input` in file order.
pub fn parse_tagged_corpus<R: BufRead>(input: R, mode: ParseMode) -> SentenceReader<R> {
    SentenceReader {
        input,
        mode,
        line_no: 0,
        skipped: 0,
        buf: String::new(),
        done: false,
    }
}

impl<R: BufRead> SentenceReader<R> {
    /// Number of malformed lines skipped in lenient mode.
    pub fn skipped_lines(&self) -> usize {
        self.skipped
    }

    fn next_sentence(&mut self) -> Result<Option<Sentence>, CorpusError> {
        let mut tokens = Vec::new();
        loop {
            self.buf.clear();
            if self.input.read_line(&mut self.buf)? == 0 {
                self.done = true;
                break;
            }
            self.line_no += 1;
            let line = self.buf.strip_suffix('\n').unwrap_or(&self.buf);
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                break;
            }
            if line.starts_with('#') {
                continue;
            }
            match parse_token_line(line) {
                Ok(tok) => tokens.push(tok),
                Err(reason) => match self.mode {
                    ParseMode::Strict => {
                        self.done = true;
                        return Err(CorpusError::Malformed {
                            line: self.line_no,
                            reason,
                        });
                    }
                    ParseMode::Lenient => {
                        log::warn!("skipping line {}: {}", self.line_no, reason);
                        self.skipped += 1;
                    }
                },
            }
        }
        if tokens.is_empty() {
            Ok(None)
        } else {
            Sentence::new(tokens).map(Some)
        }
    }
}

impl<R: BufRead> Iterator for SentenceReader<R> {
    type Item = Result<Sentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.next_sentence().transpose()
    }
}

/// Parses a whole in-memory corpus.
pub fn parse_str(text: &str, mode: ParseMode) -> Result<Vec<Sentence>, CorpusError> {
    parse_tagged_corpus(text.as_bytes(), mode).collect()
}

/// Writes sentences in the vertical format, each followed by a blank line.
///
/// Surfaces starting with `#` would read back as comments and are not
/// representable.
pub fn write_corpus<'a, W: io::Write>(
    out: &mut W,
    sentences: impl IntoIterator<Item = &'a Sentence>,
) -> io::Result<()> {
    for s in sentences {
        for t in s.tokens() {
            writeln!(out, "{}\t{}\t{}", t.surface, t.lemma, t.tag)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn to_corpus_string<'a>(sentences: impl IntoIterator<Item = &'a Sentence>) -> String {
    let mut buf = Vec::new();
    write_corpus(&mut buf, sentences).expect("write to Vec");
    String::from_utf8(buf).expect("utf-8")
}

/// Counts NOUN-tagged tokens per lemma. Every queried lemma is present in the
/// result, unseen ones with 0.
pub fn count_noun_occurrences<'a>(
    corpus: impl IntoIterator<Item = &'a Sentence>,
    lemmas: &BTreeSet<String>,
) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> = lemmas.iter().map(|l| (l.clone(), 0)).collect();
    for sentence in corpus {
        for tok in sentence.tokens() {
            if tok.is_noun() {
                if let Some(c) = counts.get_mut(&tok.lemma) {
                    *c += 1;
                }
            }
        }
    }
    counts
}
