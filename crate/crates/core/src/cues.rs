//! Lexico-syntactic cue rules and the shallow matcher that applies them.
//!
//! A rule is a linear sequence of token constraints, one of which is the
//! `TARGET` slot: the noun whose lemma receives the hit. Rules are kept as data
//! in a small line-oriented format so that users can add or tune cues without
//! rebuilding:
//!
//! ```text
//! # id   polarity  pattern                                  [off]
//! EN-1	positive	lemma=during tag=DET? tag=ADJ* TARGET
//! EN-14	negative	TARGET lemma=by&tag=ADP
//! EN-11	positive	tag=ADJ TARGET	off
//! ```
//!
//! Pattern atoms are separated by spaces. An atom is `TARGET`, the wildcard
//! `_`, or one or more `key=v1|v2` tests joined by `&` (keys `lemma`,
//! `surface`, `tag`). A trailing `?` makes the atom optional and a trailing `*`
//! lets it repeat zero to three times (`*1`..`*3` give a smaller bound).
//! Several lines with the same id are alternative patterns of one rule.
//! Lemma and surface tests are case-insensitive.

#![allow(clippy::tabs_in_doc_comments)]

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Coarse, Sentence, Tag, TaggedToken};

/// Upper bound on `*` repetition.
pub const MAX_REPEAT: u8 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CueError {
    #[error("unknown language `{0}` (expected ES or EN)")]
    UnknownLanguage(String),
    #[error("rule file line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("rule {id}: {reason}")]
    InvalidRule { id: String, reason: String },
    #[error("duplicate rule id {0}")]
    DuplicateId(String),
    #[error("unknown rule id {0}")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Language {
    #[serde(rename = "ES")]
    Es,
    #[serde(rename = "EN")]
    En,
}

impl FromStr for Language {
    type Err = CueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ES" => Ok(Language::Es),
            "EN" => Ok(Language::En),
            _ => Err(CueError::UnknownLanguage(s.to_string())),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Language::Es => "ES",
            Language::En => "EN",
        })
    }
}

/// Whether a cue was designed as evidence for or against eventhood. Both kinds
/// contribute plain counts; the learner finds the direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "positive" | "+" => Ok(Polarity::Positive),
            "negative" | "-" => Ok(Polarity::Negative),
            _ => Err(format!("unknown polarity `{}`", s)),
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Repetition {
    One,
    Optional,
    /// Zero to `k` tokens.
    UpTo(u8),
}

impl Repetition {
    fn bounds(self) -> (usize, usize) {
        match self {
            Repetition::One => (1, 1),
            Repetition::Optional => (0, 1),
            Repetition::UpTo(k) => (0, k as usize),
        }
    }
}

/// Conjunction of optional lemma, surface and tag tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenConstraint {
    pub lemma_in: Option<BTreeSet<String>>,
    pub surface_in: Option<BTreeSet<String>>,
    pub tag_in: Option<Vec<Tag>>,
    pub repetition: Repetition,
}

impl TokenConstraint {
    /// The noun slot of a rule.
    pub fn target() -> Self {
        TokenConstraint {
            lemma_in: None,
            surface_in: None,
            tag_in: Some(vec![Tag::coarse(Coarse::Noun)]),
            repetition: Repetition::One,
        }
    }

    pub fn is_wildcard(&self) -> bool {
        self.lemma_in.is_none() && self.surface_in.is_none() && self.tag_in.is_none()
    }

    pub fn is_target_slot(&self) -> bool {
        self.lemma_in.is_none()
            && self.surface_in.is_none()
            && self.tag_in.as_deref() == Some(&[Tag::coarse(Coarse::Noun)][..])
            && self.repetition == Repetition::One
    }

    fn validate(&self) -> Result<(), String> {
        if let Repetition::UpTo(k) = self.repetition {
            if k == 0 || k > MAX_REPEAT {
                return Err(format!("repetition bound {} outside 1..={}", k, MAX_REPEAT));
            }
        }
        if self.is_wildcard() && self.repetition == Repetition::One {
            return Err("wildcard must be optional or bounded".into());
        }
        for set in [&self.lemma_in, &self.surface_in].into_iter().flatten() {
            if set.is_empty() {
                return Err("empty value set".into());
            }
        }
        if matches!(&self.tag_in, Some(t) if t.is_empty()) {
            return Err("empty tag set".into());
        }
        Ok(())
    }

    pub fn admits(&self, tok: &TaggedToken) -> bool {
        if let Some(l) = &self.lemma_in {
            if !l.contains(&tok.lemma) {
                return false;
            }
        }
        if let Some(s) = &self.surface_in {
            if !s.contains(&tok.surface.to_lowercase()) {
                return false;
            }
        }
        if let Some(tags) = &self.tag_in {
            if !tags.iter().any(|t| t.admits(&tok.tag)) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for TokenConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let join = |vals: Vec<String>| vals.join("|");
        if let Some(l) = &self.lemma_in {
            parts.push(format!("lemma={}", join(l.iter().cloned().collect())));
        }
        if let Some(s) = &self.surface_in {
            parts.push(format!("surface={}", join(s.iter().cloned().collect())));
        }
        if let Some(t) = &self.tag_in {
            parts.push(format!("tag={}", join(t.iter().map(|t| t.to_string()).collect())));
        }
        if parts.is_empty() {
            parts.push("_".into());
        }
        f.write_str(&parts.join("&"))?;
        match self.repetition {
            Repetition::One => Ok(()),
            Repetition::Optional => f.write_str("?"),
            Repetition::UpTo(MAX_REPEAT) => f.write_str("*"),
            Repetition::UpTo(k) => write!(f, "*{}", k),
        }
    }
}

fn parse_atom(atom: &str) -> Result<TokenConstraint, String> {
    if atom == "TARGET" {
        return Ok(TokenConstraint::target());
    }
    let (body, repetition) = if let Some(b) = atom.strip_suffix('?') {
        (b, Repetition::Optional)
    } else if let Some(pos) = atom.rfind('*') {
        let bound = &atom[pos + 1..];
        let k = if bound.is_empty() {
            MAX_REPEAT
        } else {
            bound
                .parse::<u8>()
                .map_err(|_| format!("bad repetition bound in `{}`", atom))?
        };
        (&atom[..pos], Repetition::UpTo(k))
    } else {
        (atom, Repetition::One)
    };
    let mut c = TokenConstraint {
        lemma_in: None,
        surface_in: None,
        tag_in: None,
        repetition,
    };
    if body != "_" {
        for test in body.split('&') {
            let (key, vals) = test
                .split_once('=')
                .ok_or_else(|| format!("expected key=value in `{}`", atom))?;
            let vals: Vec<&str> = vals.split('|').filter(|v| !v.is_empty()).collect();
            match key {
                "lemma" => c.lemma_in = Some(vals.iter().map(|v| v.to_lowercase()).collect()),
                "surface" => c.surface_in = Some(vals.iter().map(|v| v.to_lowercase()).collect()),
                "tag" => {
                    c.tag_in = Some(vals.iter().map(|v| v.parse()).collect::<Result<_, _>>()?)
                }
                _ => return Err(format!("unknown key `{}`", key)),
            }
        }
    }
    c.validate()?;
    Ok(c)
}

/// One linear alternative of a rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub elements: Vec<TokenConstraint>,
    pub target_index: usize,
}

impl Pattern {
    pub fn parse(text: &str) -> Result<Self, String> {
        let atoms: Vec<&str> = text.split_whitespace().collect();
        let elements = atoms
            .iter()
            .map(|a| parse_atom(a))
            .collect::<Result<Vec<_>, _>>()?;
        let targets: Vec<usize> = atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == "TARGET")
            .map(|(i, _)| i)
            .collect();
        match targets.as_slice() {
            [t] => Ok(Pattern {
                elements,
                target_index: *t,
            }),
            [] => Err("pattern has no TARGET".into()),
            _ => Err("pattern has more than one TARGET".into()),
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self.elements.get(self.target_index) {
            Some(e) if e.is_target_slot() => {}
            Some(_) => return Err("target element must be exactly-one NOUN".into()),
            None => return Err("target index out of range".into()),
        }
        self.elements.iter().try_for_each(|e| e.validate())
    }

    /// Attempts a match starting at `start`; returns the bound target position.
    fn match_at(&self, tokens: &[TaggedToken], start: usize, policy: TargetPolicy) -> Option<usize> {
        let mut target = None;
        self.step(tokens, start, start, 0, policy, &mut target)
            .then_some(target)
            .flatten()
    }

    fn step(
        &self,
        tokens: &[TaggedToken],
        start: usize,
        pos: usize,
        elem: usize,
        policy: TargetPolicy,
        target: &mut Option<usize>,
    ) -> bool {
        let Some(c) = self.elements.get(elem) else {
            return true;
        };
        if elem == self.target_index {
            let Some(tok) = tokens.get(pos) else {
                return false;
            };
            if !c.admits(tok) {
                return false;
            }
            let mut end = pos + 1;
            if policy == TargetPolicy::LastNounOfCompound {
                // a compound is bound once, from its first noun
                if pos == start && pos > 0 && tokens[pos - 1].is_noun() {
                    return false;
                }
                while end < tokens.len() && tokens[end].is_noun() {
                    end += 1;
                }
            }
            *target = Some(end - 1);
            return self.step(tokens, start, end, elem + 1, policy, target);
        }
        let (min, max) = c.repetition.bounds();
        let mut taken = 0;
        while taken < min {
            match tokens.get(pos + taken) {
                Some(t) if c.admits(t) => taken += 1,
                _ => return false,
            }
        }
        loop {
            if self.step(tokens, start, pos + taken, elem + 1, policy, target) {
                return true;
            }
            if taken == max {
                return false;
            }
            match tokens.get(pos + taken) {
                Some(t) if c.admits(t) => taken += 1,
                _ => return false,
            }
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| if i == self.target_index { "TARGET".to_string() } else { e.to_string() })
            .collect();
        f.write_str(&atoms.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueRule {
    pub id: String,
    pub language: Language,
    pub polarity: Polarity,
    /// Alternatives; at most one hit per start position.
    pub patterns: Vec<Pattern>,
    pub enabled: bool,
}

impl CueRule {
    pub fn validate(&self) -> Result<(), CueError> {
        let invalid = |reason: String| CueError::InvalidRule {
            id: self.id.clone(),
            reason,
        };
        if self.patterns.is_empty() {
            return Err(invalid("no patterns".into()));
        }
        self.patterns
            .iter()
            .try_for_each(|p| p.validate())
            .map_err(invalid)
    }

    fn match_at(&self, tokens: &[TaggedToken], start: usize, policy: TargetPolicy) -> Option<usize> {
        self.patterns
            .iter()
            .find_map(|p| p.match_at(tokens, start, policy))
    }
}

/// How the `TARGET` slot binds inside noun-noun compounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TargetPolicy {
    /// Bind the first noun after the prefix (`during the first world war` binds
    /// `world`).
    #[default]
    FirstNoun,
    /// Bind the last noun of a contiguous noun run.
    LastNounOfCompound,
}

/// An ordered rule inventory; its size fixes the feature dimensionality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueSet {
    pub language: Language,
    rules: Vec<CueRule>,
    #[serde(default)]
    pub policy: TargetPolicy,
}

impl CueSet {
    pub fn new(language: Language, rules: Vec<CueRule>) -> Result<Self, CueError> {
        let mut seen = BTreeSet::new();
        for r in &rules {
            r.validate()?;
            if !seen.insert(r.id.as_str()) {
                return Err(CueError::DuplicateId(r.id.clone()));
            }
        }
        Ok(CueSet {
            language,
            rules,
            policy: TargetPolicy::default(),
        })
    }

    /// Parses the rule-file format described in the module docs.
    pub fn parse(text: &str, language: Language) -> Result<Self, CueError> {
        let mut rules: Vec<CueRule> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let syntax = |reason: String| CueError::Syntax { line: i + 1, reason };
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(syntax(format!(
                    "expected `id<TAB>polarity<TAB>pattern[<TAB>off]`, found {} fields",
                    fields.len()
                )));
            }
            let polarity: Polarity = fields[1].parse().map_err(syntax)?;
            let pattern = Pattern::parse(fields[2]).map_err(syntax)?;
            let enabled = match fields.get(3) {
                None => true,
                Some(&"off") => false,
                Some(&"on") => true,
                Some(other) => return Err(syntax(format!("unknown flag `{}`", other))),
            };
            match rules.iter_mut().find(|r| r.id == fields[0]) {
                Some(rule) => {
                    if rule.polarity != polarity || rule.enabled != enabled {
                        return Err(syntax(format!(
                            "alternative of {} disagrees on polarity or flag",
                            rule.id
                        )));
                    }
                    rule.patterns.push(pattern);
                }
                None => rules.push(CueRule {
                    id: fields[0].to_string(),
                    language,
                    polarity,
                    patterns: vec![pattern],
                    enabled,
                }),
            }
        }
        CueSet::new(language, rules)
    }

    /// Renders the set in the rule-file format.
    pub fn to_rule_file(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            for p in &r.patterns {
                out.push_str(&format!("{}\t{}\t{}", r.id, r.polarity, p));
                if !r.enabled {
                    out.push_str("\toff");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn rules(&self) -> &[CueRule] {
        &self.rules
    }

    /// Number of rules, enabled or not.
    pub fn n(&self) -> usize {
        self.rules.len()
    }

    pub fn ids(&self) -> Vec<String> {
        self.rules.iter().map(|r| r.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.id == id)
    }

    pub fn with_policy(mut self, policy: TargetPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn set_enabled(&mut self, id: &str, enabled: bool) -> Result<(), CueError> {
        let r = self
            .rules
            .iter_mut()
            .find(|r| r.id == id)
            .ok_or_else(|| CueError::UnknownId(id.to_string()))?;
        r.enabled = enabled;
        Ok(())
    }

    /// Copy with exactly the listed rules enabled.
    pub fn only_enabled(&self, ids: &[&str]) -> Result<Self, CueError> {
        if let Some(bad) = ids.iter().find(|id| self.index_of(id).is_none()) {
            return Err(CueError::UnknownId(bad.to_string()));
        }
        let mut set = self.clone();
        for r in &mut set.rules {
            r.enabled = ids.contains(&r.id.as_str());
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CueHit {
    /// Position of the rule in its set.
    pub cue_index: usize,
    pub cue_id: String,
    pub lemma: String,
    pub sentence_index: usize,
    pub token_index: usize,
}

/// Applies every enabled rule to one sentence.
///
/// Rules are tried in set order and each is scanned left to right. At every
/// start position the pattern is matched leftmost with optional and repeated
/// elements taking as few tokens as possible; a success yields one hit for the
/// bound noun and scanning continues at the next start position.
pub fn match_sentence(sentence_index: usize, sentence: &Sentence, cue_set: &CueSet) -> Vec<CueHit> {
    let tokens = sentence.tokens();
    let mut hits = Vec::new();
    for (cue_index, rule) in cue_set.rules.iter().enumerate() {
        if !rule.enabled {
            continue;
        }
        for start in 0..tokens.len() {
            if let Some(t) = rule.match_at(tokens, start, cue_set.policy) {
                hits.push(CueHit {
                    cue_index,
                    cue_id: rule.id.clone(),
                    lemma: tokens[t].lemma.clone(),
                    sentence_index,
                    token_index: t,
                });
            }
        }
    }
    hits
}

/// Spanish rules 1-11. ES-10 is the only negative cue.
pub const SPANISH_RULES: &str = "\
ES-1	positive	lemma=durante tag=DET? tag=ADJ* TARGET
ES-2	positive	lemma=hasta lemma=el lemma=final lemma=de|del tag=DET? TARGET
ES-3	positive	lemma=desde lemma=el lemma=principio lemma=de|del tag=DET? TARGET
ES-4	positive	lemma=se lemma=producir tag=DET? tag=ADJ* TARGET
ES-5	positive	lemma=ocurrir|suceder tag=DET? tag=ADJ* TARGET
ES-6	positive	TARGET lemma=ocurrir|suceder
ES-7	positive	lemma=celebrar tag=DET? tag=ADJ* TARGET
ES-8	positive	TARGET lemma=ocurrir|producir|celebrar&tag=VERB:PART
ES-9	positive	tag=NUM lemma=semana|mes|año|día|hora|minuto lemma=de|del tag=DET? TARGET
ES-10	negative	lemma=encima|debajo|dentro|cerca lemma=de|del tag=DET? TARGET
ES-11	positive	TARGET tag=ADJ
";

/// English rules 1-16. EN-11 is shipped disabled; EN-12..16 are negative.
pub const ENGLISH_RULES: &str = "\
EN-1	positive	lemma=during tag=DET? tag=ADJ* TARGET
EN-2	positive	lemma=after|before&tag=ADP tag=DET? tag=ADJ* TARGET
EN-3	positive	lemma=at lemma=the lemma=end|beginning lemma=of tag=DET? TARGET
EN-4	positive	TARGET lemma=happen|occur|begin|start
EN-4	positive	TARGET lemma=take lemma=place
EN-5	positive	TARGET lemma=be&tag=AUX lemma=initiate|begin|start&tag=VERB:PART
EN-6	positive	lemma=frequency|occurrence|period lemma=of tag=DET? TARGET
EN-7	positive	lemma=begin|start|initiate&tag=VERB tag=DET? tag=ADJ* TARGET
EN-8	positive	lemma=carry lemma=out tag=DET? tag=ADJ* TARGET
EN-9	positive	TARGET lemma=last|continue&tag=VERB
EN-10	positive	tag=NOUN|PROPN tag=PART:POSS tag=ADJ* TARGET
EN-11	positive	tag=ADJ TARGET	off
EN-12	negative	lemma=a|an tag=ADJ* TARGET
EN-13	negative	lemma=on|under|inside|near|behind|above|below&tag=ADP tag=DET? TARGET
EN-14	negative	TARGET lemma=by&tag=ADP
EN-15	negative	TARGET lemma=of&tag=ADP
EN-16	negative	lemma=on lemma=top lemma=of tag=DET? TARGET
EN-16	negative	lemma=in lemma=front lemma=of tag=DET? TARGET
";

/// The shipped cue inventory for a language.
pub fn builtin_cue_set(language: Language) -> CueSet {
    let text = match language {
        Language::Es => SPANISH_RULES,
        Language::En => ENGLISH_RULES,
    };
    CueSet::parse(text, language).expect("built-in rules are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_str, ParseMode};

    /// `word/TAG` or `word/lemma/TAG`, space separated.
    fn sent(spec: &str) -> Sentence {
        let tokens = spec
            .split_whitespace()
            .map(|t| {
                let parts: Vec<&str> = t.split('/').collect();
                let (surface, lemma, tag) = match parts.as_slice() {
                    [s, tag] => (*s, *s, *tag),
                    [s, l, tag] => (*s, *l, *tag),
                    _ => panic!("bad token {}", t),
                };
                TaggedToken::new(surface, lemma, tag.parse().unwrap()).unwrap()
            })
            .collect();
        Sentence::new(tokens).unwrap()
    }

    fn ids(hits: &[CueHit]) -> Vec<(&str, &str)> {
        hits.iter().map(|h| (h.cue_id.as_str(), h.lemma.as_str())).collect()
    }

    #[test]
    fn spanish_set_shape() {
        let es = builtin_cue_set(Language::Es);
        assert_eq!(es.n(), 11);
        let neg: Vec<_> = es.rules().iter().filter(|r| r.polarity == Polarity::Negative).collect();
        assert_eq!(neg.len(), 1);
        assert_eq!(neg[0].id, "ES-10");
        assert!(es.rules().iter().all(|r| r.enabled));
    }

    #[test]
    fn english_set_shape() {
        let en = builtin_cue_set(Language::En);
        assert_eq!(en.n(), 16);
        let neg = en.rules().iter().filter(|r| r.polarity == Polarity::Negative).count();
        assert_eq!(neg, 5);
        let disabled: Vec<_> = en.rules().iter().filter(|r| !r.enabled).map(|r| r.id.as_str()).collect();
        assert_eq!(disabled, ["EN-11"]);
    }

    #[test]
    fn every_target_slot_requires_noun() {
        for lang in [Language::Es, Language::En] {
            for r in builtin_cue_set(lang).rules() {
                for p in &r.patterns {
                    let t = &p.elements[p.target_index];
                    assert!(t.is_target_slot(), "{}", r.id);
                    assert_eq!(t.tag_in.as_deref(), Some(&[Tag::coarse(Coarse::Noun)][..]));
                }
            }
        }
    }

    #[test]
    fn durante_la_guerra() {
        let es = builtin_cue_set(Language::Es);
        let hits = match_sentence(0, &sent("durante/ADP la/el/DET guerra/NOUN"), &es);
        assert_eq!(ids(&hits), [("ES-1", "guerra")]);
        assert_eq!(hits[0].token_index, 2);
    }

    #[test]
    fn compound_binds_first_noun_by_default() {
        let en = builtin_cue_set(Language::En);
        let s = sent("during/ADP the/DET first/ADJ world/NOUN war/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-1", "world")]);
        let last = en.with_policy(TargetPolicy::LastNounOfCompound);
        assert_eq!(ids(&match_sentence(0, &s, &last)), [("EN-1", "war")]);
    }

    #[test]
    fn last_noun_policy_binds_compound_once_for_subject_rules() {
        let en = builtin_cue_set(Language::En).with_policy(TargetPolicy::LastNounOfCompound);
        let s = sent("the/DET world/NOUN war/NOUN happened/happen/VERB");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-4", "war")]);
        let first = builtin_cue_set(Language::En);
        assert_eq!(ids(&match_sentence(0, &s, &first)), [("EN-4", "war")]);
    }

    #[test]
    fn incomplete_pattern_gives_nothing() {
        let es = builtin_cue_set(Language::Es);
        assert!(match_sentence(0, &sent("lo/el/PRON vi/ver/VERB durante/ADP"), &es).is_empty());
    }

    #[test]
    fn optional_and_starred_elements() {
        let en = builtin_cue_set(Language::En);
        assert_eq!(ids(&match_sentence(0, &sent("during/ADP war/NOUN"), &en)), [("EN-1", "war")]);
        let s = sent("during/ADP the/DET long/ADJ cold/ADJ bloody/ADJ war/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-1", "war")]);
        // four adjectives exceed the bound of three
        let s = sent("during/ADP the/DET long/ADJ cold/ADJ bloody/ADJ sad/ADJ war/NOUN");
        assert!(match_sentence(0, &s, &en).is_empty());
    }

    #[test]
    fn take_place_alternative() {
        let en = builtin_cue_set(Language::En);
        let s = sent("the/DET conflict/NOUN took/take/VERB place/NOUN ./PUNCT");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-4", "conflict")]);
        let s = sent("the/DET student/NOUN took/take/VERB exams/exam/NOUN");
        assert!(match_sentence(0, &s, &en).is_empty());
    }

    #[test]
    fn passive_and_genitive() {
        let en = builtin_cue_set(Language::En);
        let s = sent("the/DET therapy/NOUN was/be/AUX initiated/initiate/VERB:PART");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-5", "therapy")]);
        let s = sent("the/DET enzyme/NOUN 's/PART:POSS loss/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-10", "loss")]);
    }

    #[test]
    fn negative_cues_count_like_positive_ones() {
        let en = builtin_cue_set(Language::En);
        let s = sent("a/DET map/NOUN of/ADP the/DET city/NOUN");
        let hits = match_sentence(0, &s, &en);
        assert_eq!(ids(&hits), [("EN-12", "map"), ("EN-15", "map")]);
    }

    #[test]
    fn disabled_rule_is_silent() {
        let mut en = builtin_cue_set(Language::En);
        let s = sent("a/DET napoleonic/ADJ war/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-12", "war")]);
        en.set_enabled("EN-11", true).unwrap();
        assert_eq!(ids(&match_sentence(0, &s, &en)), [("EN-11", "war"), ("EN-12", "war")]);
    }

    #[test]
    fn spanish_presentative_and_participle() {
        let es = builtin_cue_set(Language::Es);
        let s = sent("se/PRON produjo/producir/VERB un/DET accidente/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &es)), [("ES-4", "accidente")]);
        let s = sent("el/DET accidente/NOUN producido/producir/VERB:PART ayer/ADV");
        assert_eq!(ids(&match_sentence(0, &s, &es)), [("ES-8", "accidente")]);
        let s = sent("dos/NUM semanas/semana/NOUN de/ADP vacaciones/vacación/NOUN");
        assert_eq!(ids(&match_sentence(0, &s, &es)), [("ES-9", "vacación")]);
        let s = sent("la/el/DET fiesta/NOUN nacional/ADJ");
        assert_eq!(ids(&match_sentence(0, &s, &es)), [("ES-11", "fiesta")]);
    }

    #[test]
    fn rule_file_round_trip() {
        for lang in [Language::Es, Language::En] {
            let set = builtin_cue_set(lang);
            let again = CueSet::parse(&set.to_rule_file(), lang).unwrap();
            assert_eq!(again, set);
        }
    }

    #[test]
    fn rule_file_errors() {
        let e = CueSet::parse("X-1\tpositive\tlemma=a tag=DET?\n", Language::En).unwrap_err();
        assert!(matches!(e, CueError::Syntax { line: 1, .. }));
        let e = CueSet::parse("X-1\tmaybe\tTARGET\n", Language::En).unwrap_err();
        assert!(matches!(e, CueError::Syntax { .. }));
        let e = CueSet::parse("X-1\tpositive\t_ TARGET\n", Language::En).unwrap_err();
        assert!(matches!(e, CueError::Syntax { .. }));
        let e = CueSet::parse("X-1\tpositive\ttag=ADJ*4 TARGET\n", Language::En).unwrap_err();
        assert!(matches!(e, CueError::Syntax { .. }));
        let ok = CueSet::parse("# c\n\nX-1\tpositive\t_*2 TARGET\n", Language::En).unwrap();
        assert_eq!(ok.rules()[0].patterns[0].elements[0].repetition, Repetition::UpTo(2));
        assert!("XX".parse::<Language>().is_err());
    }

    #[test]
    fn hits_from_a_parsed_corpus() {
        let es = builtin_cue_set(Language::Es);
        let corpus = parse_str(
            "Durante\tdurante\tADP\nla\tel\tDET\nguerra\tguerra\tNOUN\n\nla\tel\tDET\nguerra\tguerra\tNOUN\n",
            ParseMode::Strict,
        )
        .unwrap();
        let hits: Vec<_> = corpus
            .iter()
            .enumerate()
            .flat_map(|(i, s)| match_sentence(i, s, &es))
            .collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].sentence_index, 0);
    }
}
