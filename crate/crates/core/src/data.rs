//! Gold standards and a seeded synthetic corpus generator.
//!
//! The generator writes one tagged sentence per emitted cue context, built from
//! a hand-written template per rule. Templates are checked against the rules
//! they stand for when a [`TemplateBank`] is built, so an edited rule that no
//! longer matches its template is reported instead of silently producing
//! wrong counts.

use std::collections::{BTreeMap, BTreeSet};
use std::io;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::{to_corpus_string, Sentence, TaggedToken};
use crate::cues::{match_sentence, CueSet, Language, Polarity};
use crate::features::{Dataset, FeatureVector};
use crate::label::Label;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("duplicate lemma `{0}` in gold standard")]
    DuplicateLemma(String),
    #[error("gold standard line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error("invalid synthetic parameters: {0}")]
    Params(String),
    #[error("no template for rule {0}")]
    MissingTemplate(String),
    #[error("template for {rule} is out of sync with the rule: {reason}")]
    Template { rule: String, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Manually labeled lemmas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldStandard {
    pub language: Language,
    entries: BTreeMap<String, Label>,
}

impl GoldStandard {
    pub fn new(language: Language, entries: BTreeMap<String, Label>) -> Self {
        GoldStandard { language, entries }
    }

    pub fn entries(&self) -> &BTreeMap<String, Label> {
        &self.entries
    }

    pub fn get(&self, lemma: &str) -> Option<Label> {
        self.entries.get(lemma).copied()
    }

    pub fn lemmas(&self) -> BTreeSet<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.values().filter(|&&l| l == label).count()
    }

    /// Writes `lemma,label` rows with a header.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lemma", "label"])?;
        for (lemma, label) in &self.entries {
            w.write_record([lemma.as_str(), label.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

const ENGLISH_EVENT: &str = "accident, assembly, audience, battle, boycott, campaign, catastrophe, \
ceremony, cold, collapse, conference, conflict, course, crime, crisis, cycle, cyclone, change, \
choice, decline, disease, disaster, drought, earthquake, epidemic, event, excursion, fair, famine, \
feast, festival, fever, fight, fire, flight, flood, growth, holiday, hurricane, impact, incident, \
increase, injury, interview, journey, lecture, loss, meal, measurement, meiosis, marriage, mitosis, \
monsoon, period, process, program, quake, response, seminar, snowstorm, speech, storm, strike, \
struggle, summit, symposium, therapy, tour, treaty, trial, trip, vacation, war";

const ENGLISH_NON_EVENT: &str = "agency, airport, animal, architecture, bag, battery, bird, bridge, \
bus, canal, circle, city, climate, community, company, computer, constitution, country, creature, \
customer, chain, chair, channel, characteristic, child, defence, director, drug, economy, ecosystem, \
energy, face, family, firm, folder, food, grade, grant, group, health, hope, hospital, house, \
illusion, information, intelligence, internet, island, malaria, mammal, map, market, mountain, \
nation, nature, ocean, office, organism, pencil, people, perspective, phone, pipe, plan, plant, \
profile, profit, reserve, river, role, satellite, school, sea, shape, source, space, star, \
statistics, store, technology, television, temperature, theme, theory, tree, medicine, tube, \
university, visa, visitor, water, weather, window, world";

/// The English EVENT and NON_EVENT lemma lists, in source order.
pub fn english_gold_lists() -> (Vec<&'static str>, Vec<&'static str>) {
    let split = |s: &'static str| s.split(',').map(str::trim).collect::<Vec<_>>();
    (split(ENGLISH_EVENT), split(ENGLISH_NON_EVENT))
}

/// Built-in English gold standard.
pub fn english_gold() -> GoldStandard {
    let (pos, neg) = english_gold_lists();
    let entries = pos
        .into_iter()
        .map(|l| (l.to_lowercase(), Label::Event))
        .chain(neg.into_iter().map(|l| (l.to_lowercase(), Label::NonEvent)))
        .collect();
    GoldStandard::new(Language::En, entries)
}

/// A six-lemma illustration, not a complete Spanish gold standard.
pub fn spanish_sample_gold() -> GoldStandard {
    let entries = [
        ("guerra", Label::Event),
        ("accidente", Label::Event),
        ("fiesta", Label::Event),
        ("terremoto", Label::Event),
        ("tren", Label::NonEvent),
        ("mapa", Label::NonEvent),
    ]
    .into_iter()
    .map(|(l, c)| (l.to_string(), c))
    .collect();
    GoldStandard::new(Language::Es, entries)
}

/// Reads `lemma,label` rows. A leading `lemma,label` header is optional,
/// labels are case-insensitive and lemmas are lowercased.
pub fn load_gold<R: io::Read>(input: R, language: Language) -> Result<GoldStandard, DataError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut entries = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(DataError::BadLine {
                line,
                reason: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        if i == 0 && rec[0].eq_ignore_ascii_case("lemma") && rec[1].eq_ignore_ascii_case("label") {
            continue;
        }
        let lemma = rec[0].to_lowercase();
        if lemma.is_empty() {
            return Err(DataError::BadLine {
                line,
                reason: "empty lemma".into(),
            });
        }
        let label: Label = rec[1].parse().map_err(|e: crate::label::UnknownLabel| DataError::BadLine {
            line,
            reason: e.to_string(),
        })?;
        if entries.insert(lemma.clone(), label).is_some() {
            return Err(DataError::DuplicateLemma(lemma));
        }
    }
    Ok(GoldStandard::new(language, entries))
}

/// Marks the slot filled by the generated lemma in template specs.
const SLOT: &str = "@";

const SPANISH_TEMPLATES: &[(&str, &str)] = &[
    ("ES-1", "Durante/durante/ADP la/el/DET @ llovió/llover/VERB ./PUNCT"),
    ("ES-2", "Hasta/hasta/ADP el/DET final/NOUN de/ADP la/el/DET @ hubo/haber/VERB calma/NOUN ./PUNCT"),
    ("ES-3", "Desde/desde/ADP el/DET principio/NOUN de/ADP la/el/DET @ ,/PUNCT nadie/PRON habló/hablar/VERB ./PUNCT"),
    ("ES-4", "Ayer/ayer/ADV se/PRON produjo/producir/VERB un/uno/DET @ ./PUNCT"),
    ("ES-5", "Ocurrió/ocurrir/VERB un/uno/DET @ en/ADP Madrid/PROPN ./PUNCT"),
    ("ES-6", "El/el/DET @ ocurrió/ocurrir/VERB ayer/ADV ./PUNCT"),
    ("ES-7", "Se/se/PRON celebró/celebrar/VERB la/el/DET @ ./PUNCT"),
    ("ES-8", "El/el/DET @ producido/producir/VERB:PART ayer/ADV ./PUNCT"),
    ("ES-9", "Hubo/haber/VERB dos/NUM semanas/semana/NOUN de/ADP @ ./PUNCT"),
    ("ES-10", "El/el/DET gato/NOUN está/estar/VERB encima/ADV de/ADP la/el/DET @ ./PUNCT"),
    ("ES-11", "La/el/DET @ nacional/ADJ ./PUNCT"),
];

const SPANISH_DISTRACTORS: &[&str] = &[
    "Vimos/ver/VERB el/DET @ ./PUNCT",
    "El/el/DET @ es/ser/VERB importante/ADJ ./PUNCT",
];

const ENGLISH_TEMPLATES: &[(&str, &str)] = &[
    ("EN-1", "During/during/ADP the/DET @ ,/PUNCT prices/price/NOUN rose/rise/VERB ./PUNCT"),
    ("EN-2", "After/after/ADP the/DET @ ,/PUNCT we/PRON left/leave/VERB ./PUNCT"),
    ("EN-3", "At/at/ADP the/DET end/NOUN of/ADP the/DET @ ,/PUNCT we/PRON left/leave/VERB ./PUNCT"),
    ("EN-4", "The/the/DET @ happened/happen/VERB yesterday/ADV ./PUNCT"),
    ("EN-5", "The/the/DET @ was/be/AUX initiated/initiate/VERB:PART ./PUNCT"),
    ("EN-6", "The/the/DET frequency/NOUN of/ADP @ increased/increase/VERB ./PUNCT"),
    ("EN-7", "They/they/PRON began/begin/VERB the/DET @ ./PUNCT"),
    ("EN-8", "They/they/PRON carried/carry/VERB out/ADP the/DET @ ./PUNCT"),
    ("EN-9", "The/the/DET @ lasted/last/VERB two/NUM hours/hour/NOUN ./PUNCT"),
    ("EN-10", "John/john/PROPN 's/PART:POSS @ was/be/AUX long/ADJ ./PUNCT"),
    ("EN-11", "It/it/PRON was/be/AUX the/DET national/ADJ @ ./PUNCT"),
    ("EN-12", "We/we/PRON saw/see/VERB an/a/DET @ ./PUNCT"),
    ("EN-13", "The/the/DET cat/NOUN sat/sit/VERB on/ADP the/DET @ ./PUNCT"),
    ("EN-14", "The/the/DET @ by/ADP the/DET lake/NOUN was/be/AUX quiet/ADJ ./PUNCT"),
    ("EN-15", "The/the/DET @ of/ADP the/DET town/NOUN was/be/AUX quiet/ADJ ./PUNCT"),
    ("EN-16", "The/the/DET cat/NOUN sat/sit/VERB on/ADP top/NOUN of/ADP the/DET @ ./PUNCT"),
];

const ENGLISH_DISTRACTORS: &[&str] = &[
    "We/we/PRON discussed/discuss/VERB the/DET @ ./PUNCT",
    "The/the/DET @ is/be/AUX important/ADJ ./PUNCT",
];

/// Builds a sentence from `surface/TAG` or `surface/lemma/TAG` tokens, with
/// `@` replaced by `lemma` tagged NOUN.
fn instantiate(spec: &str, lemma: &str) -> Sentence {
    let tokens = spec
        .split_whitespace()
        .map(|t| {
            if t == SLOT {
                return TaggedToken::new(lemma, lemma, "NOUN".parse().unwrap()).unwrap();
            }
            let parts: Vec<&str> = t.split('/').collect();
            let (surface, lem, tag) = match parts.as_slice() {
                [s, tag] => (*s, s.to_lowercase(), *tag),
                [s, l, tag] => (*s, l.to_string(), *tag),
                _ => unreachable!("template token {}", t),
            };
            TaggedToken::new(surface, &lem, tag.parse().expect("template tag")).unwrap()
        })
        .collect();
    Sentence::new(tokens).expect("non-empty template")
}

/// Per-rule templates and distractors, validated against a cue set.
#[derive(Debug, Clone)]
pub struct TemplateBank {
    /// Indexed like the cue set's rules.
    templates: Vec<&'static str>,
    distractors: &'static [&'static str],
}

impl TemplateBank {
    /// Checks that every rule's template makes that rule (and only that rule)
    /// bind the slot lemma exactly once, and that distractors bind nothing.
    pub fn new(cue_set: &CueSet) -> Result<Self, DataError> {
        let (table, distractors) = match cue_set.language {
            Language::Es => (SPANISH_TEMPLATES, SPANISH_DISTRACTORS),
            Language::En => (ENGLISH_TEMPLATES, ENGLISH_DISTRACTORS),
        };
        let probe = "zzslot";
        let mut all_on = cue_set.clone();
        for id in cue_set.ids() {
            all_on.set_enabled(&id, true).expect("id from set");
        }
        let mut templates = Vec::with_capacity(cue_set.n());
        for rule in cue_set.rules() {
            let spec = table
                .iter()
                .find(|(id, _)| *id == rule.id)
                .map(|(_, t)| *t)
                .ok_or_else(|| DataError::MissingTemplate(rule.id.clone()))?;
            let hits = match_sentence(0, &instantiate(spec, probe), &all_on);
            let own = hits.iter().filter(|h| h.cue_id == rule.id).count();
            let on_slot: Vec<&str> = hits
                .iter()
                .filter(|h| h.lemma == probe)
                .map(|h| h.cue_id.as_str())
                .collect();
            if own != 1 || on_slot != [rule.id.as_str()] {
                return Err(DataError::Template {
                    rule: rule.id.clone(),
                    reason: format!("rule fired {} times; slot bound by {:?}", own, on_slot),
                });
            }
            templates.push(spec);
        }
        for d in distractors {
            let hits = match_sentence(0, &instantiate(d, probe), &all_on);
            if let Some(h) = hits.iter().find(|h| h.lemma == probe) {
                return Err(DataError::Template {
                    rule: h.cue_id.clone(),
                    reason: format!("distractor `{}` matches", d),
                });
            }
        }
        Ok(TemplateBank {
            templates,
            distractors,
        })
    }

    pub fn template(&self, rule_index: usize, lemma: &str) -> Sentence {
        instantiate(self.templates[rule_index], lemma)
    }

    pub fn distractor(&self, index: usize, lemma: &str) -> Sentence {
        instantiate(self.distractors[index], lemma)
    }

    pub fn distractor_count(&self) -> usize {
        self.distractors.len()
    }
}

/// Parameters of the synthetic corpus.
///
/// For every occurrence slot of a lemma, each enabled rule fires
/// independently: EVENT lemmas fire positive rules with probability `p_event`
/// and negative rules with `p_non_event`; NON_EVENT lemmas the other way
/// round. Every firing is one template sentence; a slot where nothing fires
/// becomes one distractor sentence. With probability `noise` a slot also gets
/// one context of a random rule of the opposite polarity. Silent lemmas are not
/// emitted at all.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub event_lemmas: usize,
    pub non_event_lemmas: usize,
    pub p_event: f64,
    pub p_non_event: f64,
    /// Inclusive range of occurrence slots per emitted lemma.
    pub min_occurrences: u32,
    pub max_occurrences: u32,
    /// Fraction of EVENT lemmas that are silent.
    pub silence_event: f64,
    /// Fraction of NON_EVENT lemmas that are silent.
    pub silence_non_event: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            event_lemmas: 100,
            non_event_lemmas: 100,
            p_event: 0.4,
            p_non_event: 0.02,
            min_occurrences: 5,
            max_occurrences: 30,
            silence_event: 0.1,
            silence_non_event: 0.1,
            noise: 0.05,
            seed: 1,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), DataError> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(DataError::Params(format!("{} = {} outside [0, 1]", name, v)))
            }
        };
        unit("p_event", self.p_event)?;
        unit("p_non_event", self.p_non_event)?;
        unit("silence_event", self.silence_event)?;
        unit("silence_non_event", self.silence_non_event)?;
        unit("noise", self.noise)?;
        if self.min_occurrences == 0 || self.min_occurrences > self.max_occurrences {
            return Err(DataError::Params(format!(
                "occurrence range {}..={} must be non-empty and start at 1 or more",
                self.min_occurrences, self.max_occurrences
            )));
        }
        if self.event_lemmas + self.non_event_lemmas == 0 {
            return Err(DataError::Params("no lemmas requested".into()));
        }
        Ok(())
    }

    fn lemma_name(label: Label, i: usize) -> String {
        match label {
            Label::Event => format!("ev{:03}", i),
            Label::NonEvent => format!("ne{:03}", i),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    /// Corpus in the tagged vertical format.
    pub text: String,
    pub gold: GoldStandard,
    /// What was emitted: per lemma, template sentences per rule and total
    /// NOUN occurrences. Labeled with the generating class.
    pub draw_log: Dataset<u64>,
}

/// Generates a corpus whose cue counts are known exactly.
///
/// Each lemma draws from its own ChaCha8 stream (stream `1 + index`, EVENT
/// lemmas first), so the draws of one lemma do not depend on how many other
/// lemmas are silent. Silent lemmas are the first `round(fraction * n)` of a
/// per-class permutation drawn from stream 0; raising a silence fraction only
/// silences more lemmas of the same order.
pub fn generate_synthetic_corpus(params: &SynthParams, cue_set: &CueSet) -> Result<SyntheticCorpus, DataError> {
    params.validate()?;
    let bank = TemplateBank::new(cue_set)?;
    let enabled: Vec<usize> = (0..cue_set.n()).filter(|&i| cue_set.rules()[i].enabled).collect();

    let mut perm_rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut silent = BTreeSet::new();
    for (label, n, frac) in [
        (Label::Event, params.event_lemmas, params.silence_event),
        (Label::NonEvent, params.non_event_lemmas, params.silence_non_event),
    ] {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut perm_rng);
        let k = (frac * n as f64).round() as usize;
        silent.extend(order[..k].iter().map(|&i| SynthParams::lemma_name(label, i)));
    }

    let lemmas: Vec<(String, Label)> = (0..params.event_lemmas)
        .map(|i| (SynthParams::lemma_name(Label::Event, i), Label::Event))
        .chain((0..params.non_event_lemmas).map(|i| (SynthParams::lemma_name(Label::NonEvent, i), Label::NonEvent)))
        .collect();

    let mut sentences = Vec::new();
    let mut vectors = Vec::new();
    for (index, (lemma, label)) in lemmas.iter().enumerate() {
        let mut counts = vec![0u64; cue_set.n()];
        let mut total = 0u64;
        if !silent.contains(lemma) {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(1 + index as u64);
            let favoured = match label {
                Label::Event => Polarity::Positive,
                Label::NonEvent => Polarity::Negative,
            };
            let opposite: Vec<usize> = enabled
                .iter()
                .copied()
                .filter(|&i| cue_set.rules()[i].polarity != favoured)
                .collect();
            let slots = rng.gen_range(params.min_occurrences..=params.max_occurrences);
            for _ in 0..slots {
                let mut fired = Vec::new();
                for &i in &enabled {
                    let p = if cue_set.rules()[i].polarity == favoured {
                        params.p_event
                    } else {
                        params.p_non_event
                    };
                    if rng.gen_bool(p) {
                        fired.push(i);
                    }
                }
                if rng.gen_bool(params.noise) && !opposite.is_empty() {
                    fired.push(opposite[rng.gen_range(0..opposite.len())]);
                }
                if fired.is_empty() {
                    let d = rng.gen_range(0..bank.distractor_count());
                    sentences.push(bank.distractor(d, lemma));
                    total += 1;
                }
                for i in fired {
                    sentences.push(bank.template(i, lemma));
                    counts[i] += 1;
                    total += 1;
                }
            }
        }
        vectors.push(FeatureVector {
            lemma: lemma.clone(),
            counts,
            total_occurrences: total,
        });
    }

    let gold = GoldStandard::new(cue_set.language, lemmas.into_iter().collect());
    let draw_log = Dataset::new(cue_set.ids(), vectors)
        .attach_labels(&gold)
        .expect("every generated lemma is labeled");
    let mut text = format!(
        "# synthetic corpus: seed={} lang={}\n",
        params.seed, cue_set.language
    );
    text.push_str(&to_corpus_string(&sentences));
    Ok(SyntheticCorpus {
        text,
        gold,
        draw_log,
    })
}
