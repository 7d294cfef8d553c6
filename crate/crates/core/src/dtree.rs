//! C4.5-style decision tree over numeric attributes.
//!
//! Binary splits `x[a] <= t` with `t` a midpoint between consecutive distinct
//! values, chosen by gain ratio. Growth stops on pure nodes, on nodes with fewer
//! than `2 * min_leaf` examples, or when no split has positive gain with both
//! sides holding at least `min_leaf` examples. Pruning is bottom-up subtree
//! replacement using the pessimistic error bound `U_CF(e, n)`.
//!
//! Leaves keep their training class counts; the confidence of a prediction is
//! the majority proportion at the reached leaf.

use std::fmt::Write as _;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::label::Label;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("cannot train on an empty example set")]
    NoExamples,
    #[error("example `{lemma}` has {found} attributes, expected {expected}")]
    Dimensionality {
        lemma: String,
        expected: usize,
        found: usize,
    },
    #[error("vector has {found} attributes but the tree was trained on {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entropy of an empty distribution")]
    EmptyDistribution,
    #[error("invalid pessimistic bound arguments: errors={errors}, n={n}, cf={cf}")]
    BoundArgs { errors: usize, n: usize, cf: f64 },
    #[error("invalid tree parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<T> {
    pub lemma: String,
    pub values: Vec<T>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub confidence_factor: f64,
    pub pruning: bool,
    pub laplace_confidence: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_leaf: 2,
            confidence_factor: 0.25,
            pruning: true,
            laplace_confidence: false,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.min_leaf == 0 {
            return Err(TreeError::Params("min_leaf must be at least 1".into()));
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor < 1.0) {
            return Err(TreeError::Params(format!(
                "confidence factor {} outside (0, 1)",
                self.confidence_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    #[serde(rename = "EVENT")]
    pub event: usize,
    #[serde(rename = "NON_EVENT")]
    pub non_event: usize,
}

impl ClassCounts {
    pub fn of_labels<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Self {
        let mut c = ClassCounts::default();
        for l in labels {
            c.add(*l);
        }
        c
    }

    pub fn add(&mut self, label: Label) {
        match label {
            Label::Event => self.event += 1,
            Label::NonEvent => self.non_event += 1,
        }
    }

    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Event => self.event,
            Label::NonEvent => self.non_event,
        }
    }

    pub fn total(&self) -> usize {
        self.event + self.non_event
    }

    /// Ties go to NON_EVENT.
    pub fn majority(&self) -> Label {
        if self.event > self.non_event {
            Label::Event
        } else {
            Label::NonEvent
        }
    }

    pub fn errors(&self) -> usize {
        self.total() - self.get(self.majority())
    }

    pub fn is_pure(&self) -> bool {
        self.event == 0 || self.non_event == 0
    }

    pub fn as_array(&self) -> [usize; 2] {
        [self.event, self.non_event]
    }
}

/// `-sum p log2 p` over the non-zero classes.
pub fn entropy<T: Scalar>(class_counts: &[usize]) -> Result<T, TreeError> {
    let total: usize = class_counts.iter().sum();
    if total == 0 {
        return Err(TreeError::EmptyDistribution);
    }
    let n = T::of_usize(total);
    Ok(class_counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = T::of_usize(c) / n;
            -p * p.log2()
        })
        .sum())
}

/// Upper limit of the one-sided binomial confidence interval on the error
/// rate after observing `errors` mistakes in `n` cases, at confidence `cf`.
///
/// Zero errors use the exact form `1 - cf^(1/n)`; otherwise the normal
/// approximation with continuity correction is used, capped at 1.
pub fn pessimistic_upper_bound<T: Scalar>(errors: usize, n: usize, cf: f64) -> Result<T, TreeError> {
    if n == 0 || errors > n || !(cf > 0.0 && cf < 1.0) {
        return Err(TreeError::BoundArgs { errors, n, cf });
    }
    let nn = T::of_usize(n);
    if errors == 0 {
        return Ok(T::one() - T::of(cf).powf(T::one() / nn));
    }
    let e = T::of_usize(errors);
    let half = T::of(0.5);
    if e + half >= nn {
        return Ok(T::one());
    }
    let z = T::of(
        Normal::new(0.0, 1.0)
            .expect("standard normal")
            .inverse_cdf(1.0 - cf),
    );
    let z2 = z * z;
    let two = T::of(2.0);
    let four = T::of(4.0);
    let f = (e + half) / nn;
    let r = (f + z2 / (two * nn) + z * (f / nn - f * f / nn + z2 / (four * nn * nn)).sqrt())
        / (T::one() + z2 / nn);
    Ok(r.min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split<T> {
    pub threshold: T,
    pub gain: T,
    pub gain_ratio: T,
}

/// Values within this distance of the best gain ratio count as tied.
fn tie_tolerance<T: Scalar>() -> T {
    T::epsilon() * T::of(1024.0)
}

/// Best threshold on one attribute, or `None` when no candidate has positive
/// gain with `min_leaf` examples on each side.
pub fn best_split<T: Scalar>(
    examples: &[LabeledExample<T>],
    attribute: usize,
    min_leaf: usize,
) -> Option<Split<T>> {
    let mut pairs: Vec<(T, Label)> = examples
        .iter()
        .map(|e| (e.values[attribute], e.label))
        .collect();
    best_split_sorted(&mut pairs, min_leaf)
}

fn best_split_sorted<T: Scalar>(pairs: &mut [(T, Label)], min_leaf: usize) -> Option<Split<T>> {
    let n = pairs.len();
    if n < 2 {
        return None;
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite attribute values"));
    let total = ClassCounts::of_labels(pairs.iter().map(|p| &p.1));
    let parent = entropy::<T>(&total.as_array()).ok()?;
    let nn = T::of_usize(n);
    let min_gain = tie_tolerance::<T>();

    let mut left = ClassCounts::default();
    let mut candidates: Vec<Split<T>> = Vec::new();
    for i in 0..n - 1 {
        left.add(pairs[i].1);
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        let right = ClassCounts {
            event: total.event - left.event,
            non_event: total.non_event - left.non_event,
        };
        let wl = T::of_usize(n_left) / nn;
        let wr = T::of_usize(n_right) / nn;
        let children = wl * entropy::<T>(&left.as_array()).ok()?
            + wr * entropy::<T>(&right.as_array()).ok()?;
        let gain = parent - children;
        if gain <= min_gain {
            continue;
        }
        let split_info = entropy::<T>(&[n_left, n_right]).ok()?;
        candidates.push(Split {
            threshold: (pairs[i].0 + pairs[i + 1].0) / T::of(2.0),
            gain,
            gain_ratio: gain / split_info,
        });
    }
    pick_best(candidates, |s| s.gain_ratio)
}

/// First candidate whose score is within tolerance of the maximum.
fn pick_best<C: Copy, T: Scalar>(candidates: Vec<C>, score: impl Fn(&C) -> T) -> Option<C> {
    let max = candidates
        .iter()
        .map(&score)
        .fold(None, |m: Option<T>, s| Some(m.map_or(s, |m| m.max(s))))?;
    let tol = tie_tolerance::<T>();
    candidates.into_iter().find(|c| score(c) >= max - tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<T> {
    Leaf {
        counts: ClassCounts,
    },
    Split {
        attribute: usize,
        threshold: T,
        /// Training distribution reaching this node.
        counts: ClassCounts,
        /// `value <= threshold`
        left: Box<Node<T>>,
        right: Box<Node<T>>,
    },
}

impl<T: Scalar> Node<T> {
    pub fn counts(&self) -> ClassCounts {
        match self {
            Node::Leaf { counts } | Node::Split { counts, .. } => *counts,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_for(&self, values: &[T]) -> &ClassCounts {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if values[*attribute] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T> {
    pub lemma: String,
    pub predicted: Label,
    pub confidence: T,
    pub gold: Option<Label>,
}

impl<T> Prediction<T> {
    pub fn is_correct(&self) -> Option<bool> {
        self.gold.map(|g| g == self.predicted)
    }
}

/// A trained tree with the attribute names it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub attributes: Vec<String>,
    pub params: TreeParams,
    pub root: Node<T>,
}

/// Grows (and, if configured, prunes) a tree.
pub fn train<T: Scalar>(
    examples: &[LabeledExample<T>],
    attributes: &[String],
    params: &TreeParams,
) -> Result<DecisionTree<T>, TreeError> {
    params.validate()?;
    if examples.is_empty() {
        return Err(TreeError::NoExamples);
    }
    let dim = attributes.len();
    if let Some(bad) = examples.iter().find(|e| e.values.len() != dim) {
        return Err(TreeError::Dimensionality {
            lemma: bad.lemma.clone(),
            expected: dim,
            found: bad.values.len(),
        });
    }
    let indices: Vec<usize> = (0..examples.len()).collect();
    let mut root = grow(examples, indices, dim, params.min_leaf);
    if params.pruning {
        root = prune(root, params.confidence_factor)?.0;
    }
    Ok(DecisionTree {
        attributes: attributes.to_vec(),
        params: *params,
        root,
    })
}

fn grow<T: Scalar>(examples: &[LabeledExample<T>], idx: Vec<usize>, dim: usize, min_leaf: usize) -> Node<T> {
    let counts = ClassCounts::of_labels(idx.iter().map(|&i| &examples[i].label));
    if counts.is_pure() || idx.len() < 2 * min_leaf {
        return Node::Leaf { counts };
    }
    let per_attribute: Vec<(usize, Split<T>)> = (0..dim)
        .filter_map(|a| {
            let mut pairs: Vec<(T, Label)> = idx
                .iter()
                .map(|&i| (examples[i].values[a], examples[i].label))
                .collect();
            best_split_sorted(&mut pairs, min_leaf).map(|s| (a, s))
        })
        .collect();
    let Some((attribute, split)) = pick_best(per_attribute, |(_, s)| s.gain_ratio) else {
        return Node::Leaf { counts };
    };
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .into_iter()
        .partition(|&i| examples[i].values[attribute] <= split.threshold);
    Node::Split {
        attribute,
        threshold: split.threshold,
        counts,
        left: Box::new(grow(examples, l, dim, min_leaf)),
        right: Box::new(grow(examples, r, dim, min_leaf)),
    }
}

/// Returns the pruned node and its estimated error count.
fn prune<T: Scalar>(node: Node<T>, cf: f64) -> Result<(Node<T>, T), TreeError> {
    let counts = node.counts();
    let n = counts.total();
    let as_leaf = T::of_usize(n) * pessimistic_upper_bound::<T>(counts.errors(), n, cf)?;
    match node {
        Node::Leaf { .. } => Ok((node, as_leaf)),
        Node::Split {
            attribute,
            threshold,
            left,
            right,
            ..
        } => {
            let (left, el) = prune(*left, cf)?;
            let (right, er) = prune(*right, cf)?;
            let subtree = el + er;
            if as_leaf <= subtree + tie_tolerance::<T>() {
                Ok((Node::Leaf { counts }, as_leaf))
            } else {
                Ok((
                    Node::Split {
                        attribute,
                        threshold,
                        counts,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    subtree,
                ))
            }
        }
    }
}

impl<T: Scalar> DecisionTree<T> {
    pub fn dim(&self) -> usize {
        self.attributes.len()
    }

    /// Majority label of the reached leaf (ties to NON_EVENT) and its share.
    pub fn classify(&self, lemma: &str, values: &[T]) -> Result<Prediction<T>, TreeError> {
        if values.len() != self.dim() {
            return Err(TreeError::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        let leaf = self.root.leaf_for(values);
        let predicted = leaf.majority();
        let maj = T::of_usize(leaf.get(predicted));
        let total = T::of_usize(leaf.total());
        let confidence = if self.params.laplace_confidence {
            (maj + T::one()) / (total + T::of(2.0))
        } else {
            maj / total
        };
        Ok(Prediction {
            lemma: lemma.to_string(),
            predicted,
            confidence,
            gold: None,
        })
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    /// Indented text rendering, one line per branch:
    ///
    /// ```text
    /// EN-1 <= 0.5
    /// |   EN-15 <= 0.5: EVENT (EVENT=12 NON_EVENT=1)
    /// |   EN-15 > 0.5: NON_EVENT (EVENT=0 NON_EVENT=40)
    /// EN-1 > 0.5: EVENT (EVENT=50 NON_EVENT=2)
    /// ```
    ///
    /// A tree that is a single leaf renders as `: LABEL (counts)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match &self.root {
            Node::Leaf { counts } => {
                let _ = writeln!(out, ": {}", leaf_text(counts));
            }
            node => self.render_node(node, 0, &mut out),
        }
        out
    }

    fn render_node(&self, node: &Node<T>, depth: usize, out: &mut String) {
        if let Node::Split {
            attribute,
            threshold,
            left,
            right,
            ..
        } = node
        {
            let name = &self.attributes[*attribute];
            for (op, child) in [("<=", left), (">", right)] {
                let indent = "|   ".repeat(depth);
                match child.as_ref() {
                    Node::Leaf { counts } => {
                        let _ = writeln!(out, "{}{} {} {}: {}", indent, name, op, threshold, leaf_text(counts));
                    }
                    inner => {
                        let _ = writeln!(out, "{}{} {} {}", indent, name, op, threshold);
                        self.render_node(inner, depth + 1, out);
                    }
                }
            }
        }
    }
}

fn leaf_text(c: &ClassCounts) -> String {
    format!("{} (EVENT={} NON_EVENT={})", c.majority(), c.event, c.non_event)
}

impl<T: Scalar + Serialize> DecisionTree<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }
}

impl<T: Scalar + DeserializeOwned> DecisionTree<T> {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
