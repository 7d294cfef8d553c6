//! Corpus-driven acquisition of non-deverbal event nouns.
//!
//! The pipeline reads a POS-tagged corpus ([`corpus`]), matches lexico-syntactic
//! cue patterns around nouns ([`cues`]), aggregates the hits into one count vector
//! per lemma ([`features`]), and trains a pruned C4.5-style decision tree
//! ([`dtree`]) whose leaf confidence is used to split the acquired lexicon into a
//! trusted part and a part that needs manual review ([`eval`]).
//!
//! The numeric core is generic over the scalar type (see [`scalar::Scalar`]);
//! the aliases below fix it to `f64`, which is what the command-line tool uses.

pub mod cli;
pub mod corpus;
pub mod cues;
pub mod data;
pub mod dtree;
pub mod eval;
pub mod features;
pub mod label;
pub mod scalar;

pub use corpus::{Coarse, Sentence, Tag, TaggedToken};
pub use cues::{CueHit, CueRule, CueSet, Language, Polarity, TargetPolicy};
pub use features::{Dataset, FeatureVector};
pub use label::Label;
pub use scalar::{FeatureValue, Scalar};

/// Decision tree over `f64` thresholds.
pub type DecisionTree = dtree::DecisionTree<f64>;
/// Decision tree over `f32` thresholds.
pub type DecisionTreeF32 = dtree::DecisionTree<f32>;
/// Training example with `f64` attributes.
pub type LabeledExample = dtree::LabeledExample<f64>;
/// Classification result with `f64` confidence.
pub type Prediction = dtree::Prediction<f64>;
/// Point of a precision-vs-confidence curve.
pub type CurvePoint = eval::CurvePoint<f64>;
/// Cross-validation report.
pub type EvalReport = eval::EvalReport<f64>;
/// Raw cue-count dataset.
pub type CountDataset = features::Dataset<u64>;
/// Dataset of exact relative frequencies.
pub type RelativeDataset = features::Dataset<num_rational::Ratio<u64>>;
