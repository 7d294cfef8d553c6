//! Type-level feature vectors: per lemma, how many times each cue fired over
//! the whole corpus. Zero counts are kept; a lemma that never occurs gets an
//! all-zero vector.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::corpus::Sentence;
use crate::cues::{match_sentence, CueSet};
use crate::data::GoldStandard;
use crate::dtree::LabeledExample;
use crate::label::Label;
use crate::scalar::{FeatureValue, Scalar};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("lemmas missing from the gold standard: {}", .0.join(", "))]
    MissingFromGold(Vec<String>),
    #[error("dataset has no labels")]
    Unlabeled,
    #[error("dataset CSV: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<V = u64> {
    pub lemma: String,
    /// One value per rule of the cue set; disabled rules stay zero.
    pub counts: Vec<V>,
    /// NOUN-tagged occurrences of the lemma.
    pub total_occurrences: u64,
}

impl<V: FeatureValue> FeatureVector<V> {
    pub fn zero(lemma: impl Into<String>, n: usize) -> Self {
        FeatureVector {
            lemma: lemma.into(),
            counts: vec![V::zero(); n],
            total_occurrences: 0,
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.counts.iter().all(FeatureValue::is_zero)
    }

    pub fn to_scalars<T: Scalar>(&self) -> Vec<T> {
        self.counts.iter().map(|v| v.to_scalar()).collect()
    }
}

/// Vectors sorted by lemma, plus optional gold labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<V = u64> {
    cue_ids: Vec<String>,
    vectors: Vec<FeatureVector<V>>,
    labels: Option<BTreeMap<String, Label>>,
}

impl<V: FeatureValue> Dataset<V> {
    /// Sorts by lemma. Panics on duplicate lemmas or wrong dimensionality.
    pub fn new(cue_ids: Vec<String>, mut vectors: Vec<FeatureVector<V>>) -> Self {
        vectors.sort_by(|a, b| a.lemma.cmp(&b.lemma));
        assert!(
            vectors.windows(2).all(|w| w[0].lemma != w[1].lemma),
            "duplicate lemma in dataset"
        );
        assert!(
            vectors.iter().all(|v| v.counts.len() == cue_ids.len()),
            "vector dimensionality differs from cue count"
        );
        Dataset {
            cue_ids,
            vectors,
            labels: None,
        }
    }

    pub fn cue_ids(&self) -> &[String] {
        &self.cue_ids
    }

    pub fn dim(&self) -> usize {
        self.cue_ids.len()
    }

    pub fn vectors(&self) -> &[FeatureVector<V>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn labels(&self) -> Option<&BTreeMap<String, Label>> {
        self.labels.as_ref()
    }

    pub fn label_of(&self, lemma: &str) -> Option<Label> {
        self.labels.as_ref()?.get(lemma).copied()
    }

    pub fn get(&self, lemma: &str) -> Option<&FeatureVector<V>> {
        self.vectors
            .binary_search_by(|v| v.lemma.as_str().cmp(lemma))
            .ok()
            .map(|i| &self.vectors[i])
    }

    /// Vectors with at least one non-zero cue value.
    pub fn nonzero_count(&self) -> usize {
        self.vectors.iter().filter(|v| !v.is_all_zero()).count()
    }

    /// Labels every vector; gold lemmas absent from the dataset are added as
    /// zero vectors so that they take part in evaluation.
    pub fn attach_labels(mut self, gold: &GoldStandard) -> Result<Self, FeatureError> {
        let missing: Vec<String> = self
            .vectors
            .iter()
            .filter(|v| !gold.entries().contains_key(&v.lemma))
            .map(|v| v.lemma.clone())
            .collect();
        if !missing.is_empty() {
            return Err(FeatureError::MissingFromGold(missing));
        }
        let present: BTreeSet<String> = self.vectors.iter().map(|v| v.lemma.clone()).collect();
        let n = self.dim();
        for lemma in gold.entries().keys().filter(|l| !present.contains(*l)) {
            self.vectors.push(FeatureVector::zero(lemma.clone(), n));
        }
        self.vectors.sort_by(|a, b| a.lemma.cmp(&b.lemma));
        self.labels = Some(gold.entries().clone());
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    /// Training examples in lemma order.
    pub fn examples<T: Scalar>(&self) -> Result<Vec<LabeledExample<T>>, FeatureError> {
        let labels = self.labels.as_ref().ok_or(FeatureError::Unlabeled)?;
        Ok(self
            .vectors
            .iter()
            .map(|v| LabeledExample {
                lemma: v.lemma.clone(),
                values: v.to_scalars(),
                label: labels[&v.lemma],
            })
            .collect())
    }

    /// Writes `lemma,total,<cue ids...>[,label]`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), FeatureError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["lemma".to_string(), "total".to_string()];
        header.extend(self.cue_ids.iter().cloned());
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for v in &self.vectors {
            let mut row = vec![v.lemma.clone(), v.total_occurrences.to_string()];
            row.extend(v.counts.iter().map(|c| c.to_string()));
            if let Some(l) = self.label_of(&v.lemma) {
                row.push(l.to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<V: FeatureValue + FromStr> Dataset<V> {
    /// Reads the format written by [`Dataset::write_csv`]. A trailing `label`
    /// column makes the dataset labeled.
    pub fn read_csv<R: io::Read>(input: R) -> Result<Self, FeatureError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 2 || header[0] != "lemma" || header[1] != "total" {
            return Err(FeatureError::Format(
                "header must start with `lemma,total`".into(),
            ));
        }
        let labeled = header.last().map(String::as_str) == Some("label");
        let cue_end = if labeled { header.len() - 1 } else { header.len() };
        let cue_ids = header[2..cue_end].to_vec();
        let mut vectors = Vec::new();
        let mut labels = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let bad = |what: &str| FeatureError::Format(format!("row {}: {}", row, what));
            let lemma = rec.get(0).unwrap_or("").to_lowercase();
            if lemma.is_empty() {
                return Err(bad("empty lemma"));
            }
            if !seen.insert(lemma.clone()) {
                return Err(bad(&format!("duplicate lemma `{}`", lemma)));
            }
            let total = rec
                .get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad total"))?;
            let counts = (2..cue_end)
                .map(|j| rec.get(j).and_then(|c| c.parse::<V>().ok()))
                .collect::<Option<Vec<V>>>()
                .ok_or_else(|| bad("bad cue value"))?;
            if labeled {
                let l: Label = rec
                    .get(cue_end)
                    .unwrap_or("")
                    .parse()
                    .map_err(|e: crate::label::UnknownLabel| bad(&e.to_string()))?;
                labels.insert(lemma.clone(), l);
            }
            vectors.push(FeatureVector {
                lemma,
                counts,
                total_occurrences: total,
            });
        }
        let mut ds = Dataset::new(cue_ids, vectors);
        if labeled {
            ds.labels = Some(labels);
        }
        Ok(ds)
    }
}

impl FeatureValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Incremental extraction; shards can be merged by addition.
#[derive(Debug, Clone)]
pub struct FeatureAccumulator<'c> {
    cue_set: &'c CueSet,
    counts: BTreeMap<String, (Vec<u64>, u64)>,
    sentences: usize,
}

impl<'c> FeatureAccumulator<'c> {
    pub fn new(cue_set: &'c CueSet, targets: &BTreeSet<String>) -> Self {
        let n = cue_set.n();
        FeatureAccumulator {
            cue_set,
            counts: targets.iter().map(|t| (t.clone(), (vec![0; n], 0))).collect(),
            sentences: 0,
        }
    }

    pub fn add(&mut self, sentence: &Sentence) {
        for tok in sentence.tokens() {
            if tok.is_noun() {
                if let Some(entry) = self.counts.get_mut(&tok.lemma) {
                    entry.1 += 1;
                }
            }
        }
        for hit in match_sentence(self.sentences, sentence, self.cue_set) {
            if let Some(entry) = self.counts.get_mut(&hit.lemma) {
                entry.0[hit.cue_index] += 1;
            }
        }
        self.sentences += 1;
    }

    pub fn merge(&mut self, other: FeatureAccumulator<'_>) {
        for (lemma, (counts, total)) in other.counts {
            let entry = self
                .counts
                .entry(lemma)
                .or_insert_with(|| (vec![0; counts.len()], 0));
            for (a, b) in entry.0.iter_mut().zip(counts) {
                *a += b;
            }
            entry.1 += total;
        }
        self.sentences += other.sentences;
    }

    pub fn finish(self) -> Dataset<u64> {
        let vectors = self
            .counts
            .into_iter()
            .map(|(lemma, (counts, total))| FeatureVector {
                lemma,
                counts,
                total_occurrences: total,
            })
            .collect();
        Dataset::new(self.cue_set.ids(), vectors)
    }
}

/// One raw-count vector per target lemma.
pub fn extract_features<S: Borrow<Sentence>>(
    corpus: impl IntoIterator<Item = S>,
    cue_set: &CueSet,
    targets: &BTreeSet<String>,
) -> Dataset<u64> {
    let mut acc = FeatureAccumulator::new(cue_set, targets);
    for s in corpus {
        acc.add(s.borrow());
    }
    acc.finish()
}

/// Replaces every count by `count / max(total, 1)`, exactly.
pub fn to_relative(dataset: &Dataset<u64>) -> Dataset<Ratio<u64>> {
    let vectors = dataset
        .vectors
        .iter()
        .map(|v| FeatureVector {
            lemma: v.lemma.clone(),
            counts: v
                .counts
                .iter()
                .map(|&c| Ratio::new(c, v.total_occurrences.max(1)))
                .collect(),
            total_occurrences: v.total_occurrences,
        })
        .collect();
    Dataset {
        cue_ids: dataset.cue_ids.clone(),
        vectors,
        labels: dataset.labels.clone(),
    }
}

/// `Ratio` prints as `a/b`; datasets print decimals instead.
impl FeatureValue for Decimal {
    fn zero() -> Self {
        Decimal(Ratio::from_integer(0))
    }

    fn is_zero(&self) -> bool {
        *self.0.numer() == 0
    }

    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

/// Exact relative frequency that displays as a decimal number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Decimal(pub Ratio<u64>);

impl std::fmt::Display for Decimal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0.to_f64())
    }
}

impl Dataset<Ratio<u64>> {
    /// Same values, decimal formatting for CSV output.
    pub fn to_decimal(&self) -> Dataset<Decimal> {
        Dataset {
            cue_ids: self.cue_ids.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|v| FeatureVector {
                    lemma: v.lemma.clone(),
                    counts: v.counts.iter().map(|&r| Decimal(r)).collect(),
                    total_occurrences: v.total_occurrences,
                })
                .collect(),
            labels: self.labels.clone(),
        }
    }
}
