//! Cross-validation, precision curves and confidence filtering.

use std::fmt::Write as _;
use std::io;
use std::thread;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dtree::{train, DecisionTree, LabeledExample, Prediction, TreeError, TreeParams};
use crate::label::Label;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("k must be at least 2 (got {0})")]
    TooFewFolds(usize),
    #[error("k = {k} exceeds the dataset size {n}")]
    TooManyFolds { k: usize, n: usize },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Splits item indices into `k` folds with per-class round robin.
///
/// Each class is shuffled with a seeded ChaCha8 generator (EVENT first) and
/// dealt one item per fold in turn; the fold cursor carries over from one
/// class to the next, so fold sizes differ by at most one overall and per
/// class. A class smaller than `k` ends up one item per fold until it runs
/// out. Indices within a fold are ascending.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::TooFewFolds(k));
    }
    if k > labels.len() {
        return Err(EvalError::TooManyFolds { k, n: labels.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut cursor = 0;
    for class in [Label::Event, Label::NonEvent] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[cursor].push(i);
            cursor = (cursor + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// 2x2 table indexed `[gold][predicted]` by [`Label::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 2]; 2],
}

impl ConfusionMatrix {
    pub fn from_predictions<T>(predictions: &[Prediction<T>]) -> Self {
        let mut m = ConfusionMatrix::default();
        for p in predictions {
            if let Some(g) = p.gold {
                m.counts[g.index()][p.predicted.index()] += 1;
            }
        }
        m
    }

    pub fn get(&self, gold: Label, predicted: Label) -> usize {
        self.counts[gold.index()][predicted.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    /// Writes `gold,EVENT,NON_EVENT` with one row per gold class.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gold", Label::Event.as_str(), Label::NonEvent.as_str()])?;
        for g in [Label::Event, Label::NonEvent] {
            w.write_record([
                g.as_str().to_string(),
                self.get(g, Label::Event).to_string(),
                self.get(g, Label::NonEvent).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport<T> {
    pub k: usize,
    pub seed: u64,
    pub fold_accuracies: Vec<T>,
    /// Correct pooled predictions over all predictions.
    pub mean_accuracy: T,
    /// One held-out prediction per example, in input order.
    pub predictions: Vec<Prediction<T>>,
    pub confusion: ConfusionMatrix,
}

impl<T: Scalar> EvalReport<T> {
    /// Unweighted mean of the per-fold accuracies.
    pub fn macro_accuracy(&self) -> T {
        self.fold_accuracies.iter().copied().sum::<T>() / T::of_usize(self.fold_accuracies.len())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let c = &self.confusion;
        let _ = writeln!(s, "folds: {}", self.k);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "items: {}", self.predictions.len());
        let _ = writeln!(s, "accuracy: {:.3}", self.mean_accuracy.to_f64().unwrap_or(f64::NAN));
        let _ = writeln!(s, "fold mean accuracy: {:.3}", self.macro_accuracy().to_f64().unwrap_or(f64::NAN));
        let folds: Vec<String> = self
            .fold_accuracies
            .iter()
            .map(|a| format!("{:.3}", a.to_f64().unwrap_or(f64::NAN)))
            .collect();
        let _ = writeln!(s, "per fold: {}", folds.join(" "));
        let _ = writeln!(s, "confusion (rows gold, columns predicted):");
        let _ = writeln!(s, "{:>12} {:>9} {:>9}", "", "EVENT", "NON_EVENT");
        for g in [Label::Event, Label::NonEvent] {
            let _ = writeln!(
                s,
                "{:>12} {:>9} {:>9}",
                g.as_str(),
                c.get(g, Label::Event),
                c.get(g, Label::NonEvent)
            );
        }
        s
    }
}

/// Held-out predictions of one fold, keyed by example index.
type FoldResult<T> = Result<Vec<(usize, Prediction<T>)>, EvalError>;

/// Trains one tree per fold on the other folds and classifies the held-out
/// fold. Folds run on scoped threads; results are merged in input order.
pub fn cross_validate<T: Scalar>(
    examples: &[LabeledExample<T>],
    attributes: &[String],
    params: &TreeParams,
    k: usize,
    seed: u64,
) -> Result<EvalReport<T>, EvalError> {
    params.validate()?;
    let labels: Vec<Label> = examples.iter().map(|e| e.label).collect();
    let folds = stratified_folds(&labels, k, seed)?;
    let mut owner = vec![0usize; examples.len()];
    for (f, fold) in folds.iter().enumerate() {
        for &i in fold {
            owner[i] = f;
        }
    }

    let run_fold = |f: usize| -> FoldResult<T> {
        let training: Vec<LabeledExample<T>> = examples
            .iter()
            .zip(&owner)
            .filter(|(_, &o)| o != f)
            .map(|(e, _)| e.clone())
            .collect();
        let tree: DecisionTree<T> = train(&training, attributes, params)?;
        folds[f]
            .iter()
            .map(|&i| {
                let e = &examples[i];
                let mut p = tree.classify(&e.lemma, &e.values)?;
                p.gold = Some(e.label);
                Ok((i, p))
            })
            .collect()
    };
    let results: Vec<FoldResult<T>> = thread::scope(|s| {
        let handles: Vec<_> = (0..k).map(|f| s.spawn(move || run_fold(f))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fold worker panicked"))
            .collect()
    });

    let mut slots: Vec<Option<Prediction<T>>> = vec![None; examples.len()];
    let mut fold_accuracies = Vec::with_capacity(k);
    for r in results {
        let fold = r?;
        let correct = fold.iter().filter(|(_, p)| p.is_correct() == Some(true)).count();
        fold_accuracies.push(T::of_usize(correct) / T::of_usize(fold.len()));
        for (i, p) in fold {
            slots[i] = Some(p);
        }
    }
    let predictions: Vec<Prediction<T>> = slots
        .into_iter()
        .map(|p| p.expect("every item is in exactly one fold"))
        .collect();
    let confusion = ConfusionMatrix::from_predictions(&predictions);
    let mean_accuracy = T::of_usize(confusion.correct()) / T::of_usize(confusion.total());
    Ok(EvalReport {
        k,
        seed,
        fold_accuracies,
        mean_accuracy,
        predictions,
        confusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<T> {
    pub threshold: T,
    /// `None` when nothing is retained.
    pub precision: Option<T>,
    pub retained: usize,
}

/// `0.0, 0.05, ..., 1.0`.
pub fn default_thresholds<T: Scalar>() -> Vec<T> {
    (0..=20).map(|i| T::of_usize(i) / T::of(20.0)).collect()
}

/// For each threshold, the predictions labeled `positive` with confidence at
/// least the threshold, and the share of them whose gold label agrees.
/// Predictions without a gold label count as incorrect.
pub fn precision_curve<T: Scalar>(predictions: &[Prediction<T>], positive: Label, thresholds: &[T]) -> Vec<CurvePoint<T>> {
    thresholds
        .iter()
        .map(|&theta| {
            let kept = predictions
                .iter()
                .filter(|p| p.predicted == positive && p.confidence >= theta);
            let (retained, correct) = kept.fold((0usize, 0usize), |(n, c), p| {
                (n + 1, c + usize::from(p.gold == Some(positive)))
            });
            CurvePoint {
                threshold: theta,
                precision: (retained > 0).then(|| T::of_usize(correct) / T::of_usize(retained)),
                retained,
            }
        })
        .collect()
}

/// Splits predictions into those with confidence at least `theta` and the rest,
/// keeping input order on both sides.
pub fn filter_by_confidence<T: Scalar>(predictions: &[Prediction<T>], theta: T) -> (Vec<Prediction<T>>, Vec<Prediction<T>>) {
    predictions.iter().cloned().partition(|p| p.confidence >= theta)
}

fn fmt_scalar<T: Scalar>(v: T) -> String {
    format!("{}", v)
}

/// Writes `threshold,precision,retained`; undefined precision is `NA`.
pub fn write_curve_csv<T: Scalar, W: io::Write>(curve: &[CurvePoint<T>], out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["threshold", "precision", "retained"])?;
    for p in curve {
        w.write_record([
            fmt_scalar(p.threshold),
            p.precision.map_or_else(|| "NA".to_string(), fmt_scalar),
            p.retained.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `lemma,gold,predicted,confidence`; a missing gold label is empty.
pub fn write_predictions_csv<T: Scalar, W: io::Write>(predictions: &[Prediction<T>], out: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lemma", "gold", "predicted", "confidence"])?;
    for p in predictions {
        w.write_record([
            p.lemma.clone(),
            p.gold.map_or_else(String::new, |g| g.to_string()),
            p.predicted.to_string(),
            fmt_scalar(p.confidence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the format written by [`write_predictions_csv`].
pub fn read_predictions_csv<T: Scalar, R: io::Read>(input: R) -> Result<Vec<Prediction<T>>, EvalError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| EvalError::Format(format!("predictions line {}: {}", line, what));
        if rec.len() != 4 {
            return Err(bad("expected 4 fields"));
        }
        let gold = match &rec[1] {
            "" => None,
            g => Some(g.parse::<Label>().map_err(|e| bad(&e.to_string()))?),
        };
        let predicted = rec[2].parse::<Label>().map_err(|e| bad(&e.to_string()))?;
        let confidence = rec[3]
            .parse::<f64>()
            .map_err(|_| bad("confidence is not a number"))?;
        out.push(Prediction {
            lemma: rec[0].to_string(),
            predicted,
            confidence: T::of(confidence),
            gold,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Label::{Event as E, NonEvent as N};

    fn pred(lemma: &str, predicted: Label, gold: Label, confidence: f64) -> Prediction<f64> {
        Prediction {
            lemma: lemma.into(),
            predicted,
            confidence,
            gold: Some(gold),
        }
    }

    #[test]
    fn ten_and_ten_one_each() {
        let labels: Vec<Label> = (0..20).map(|i| if i < 10 { E } else { N }).collect();
        let folds = stratified_folds(&labels, 10, 42).unwrap();
        for f in &folds {
            assert_eq!(f.iter().filter(|&&i| labels[i] == E).count(), 1);
            assert_eq!(f.iter().filter(|&&i| labels[i] == N).count(), 1);
        }
        assert_eq!(folds, stratified_folds(&labels, 10, 42).unwrap());
    }

    #[test]
    fn hundred_and_ninety_nine() {
        let labels: Vec<Label> = (0..199).map(|i| if i < 100 { E } else { N }).collect();
        let folds = stratified_folds(&labels, 10, 7).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, [19, 20, 20, 20, 20, 20, 20, 20, 20, 20]);
        for f in &folds {
            let e = f.iter().filter(|&&i| labels[i] == E).count();
            assert_eq!(e, 10);
            assert!(f.len() - e == 10 || f.len() - e == 9);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..199).collect::<Vec<_>>());
    }

    #[test]
    fn small_class_spreads_one_per_fold() {
        let labels = [E, E, E, N, N, N, N, N, N, N, N, N];
        let folds = stratified_folds(&labels, 5, 1).unwrap();
        for f in &folds {
            assert!(f.iter().filter(|&&i| labels[i] == E).count() <= 1);
        }
    }

    #[test]
    fn fold_count_errors() {
        assert!(matches!(stratified_folds(&[E, N], 1, 0), Err(EvalError::TooFewFolds(1))));
        assert!(matches!(
            stratified_folds(&[E, N], 3, 0),
            Err(EvalError::TooManyFolds { k: 3, n: 2 })
        ));
    }

    fn example(lemma: String, values: Vec<f64>, label: Label) -> LabeledExample<f64> {
        LabeledExample { lemma, values, label }
    }

    #[test]
    fn separable_cross_validation_is_perfect() {
        let examples: Vec<_> = (0..40)
            .map(|i| {
                let label = if i % 2 == 0 { E } else { N };
                let cue = if label == E { 1.0 + (i % 3) as f64 } else { 0.0 };
                example(format!("l{:02}", i), vec![cue, (i % 5) as f64], label)
            })
            .collect();
        let attrs = vec!["a".to_string(), "b".to_string()];
        let r = cross_validate(&examples, &attrs, &TreeParams::default(), 10, 3).unwrap();
        assert_eq!(r.mean_accuracy, 1.0);
        assert_eq!(r.predictions.len(), 40);
        assert_eq!(r.confusion.get(E, E), 20);
    }

    #[test]
    fn zero_vectors_give_majority_rate() {
        let examples: Vec<_> = (0..50)
            .map(|i| example(format!("l{:02}", i), vec![0.0; 3], if i < 30 { N } else { E }))
            .collect();
        let attrs: Vec<String> = (0..3).map(|i| format!("c{}", i)).collect();
        let r = cross_validate(&examples, &attrs, &TreeParams::default(), 10, 9).unwrap();
        assert!((r.mean_accuracy - 0.6).abs() < 1e-12);
        assert!(r.predictions.iter().all(|p| p.predicted == N));
    }

    #[test]
    fn pooled_predictions_follow_input_order() {
        let examples: Vec<_> = (0..30)
            .map(|i| example(format!("l{:02}", i), vec![(i % 4) as f64], if i % 3 == 0 { E } else { N }))
            .collect();
        let r = cross_validate(&examples, &["x".to_string()], &TreeParams::default(), 5, 0).unwrap();
        for (e, p) in examples.iter().zip(&r.predictions) {
            assert_eq!(e.lemma, p.lemma);
            assert_eq!(p.gold, Some(e.label));
        }
        assert_eq!(r.fold_accuracies.len(), 5);
    }

    #[test]
    fn three_item_fixture() {
        let preds = [pred("a", E, E, 0.9), pred("b", E, N, 0.6), pred("c", E, E, 0.7)];
        let c = precision_curve(&preds, E, &[0.65]);
        assert_eq!(c[0].retained, 2);
        assert_eq!(c[0].precision, Some(1.0));
        let c = precision_curve(&preds, E, &[0.0]);
        assert_eq!(c[0].retained, 3);
        assert!((c[0].precision.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_equal_to_confidence_is_kept() {
        let preds = [pred("a", E, E, 0.7)];
        assert_eq!(precision_curve(&preds, E, &[0.7])[0].retained, 1);
        let (acc, rev) = filter_by_confidence(&preds, 0.7);
        assert_eq!((acc.len(), rev.len()), (1, 0));
    }

    #[test]
    fn empty_retained_set_is_undefined() {
        let preds = [pred("a", N, N, 1.0), pred("b", E, E, 0.5)];
        let c = precision_curve(&preds, E, &[0.9]);
        assert_eq!(c[0].precision, None);
        assert_eq!(c[0].retained, 0);
        let mut buf = Vec::new();
        write_curve_csv(&c, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "threshold,precision,retained\n0.9,NA,0\n");
    }

    #[test]
    fn filter_extremes() {
        let preds = [pred("a", E, E, 0.9), pred("b", N, N, 0.6)];
        let (acc, rev) = filter_by_confidence(&preds, 0.0);
        assert_eq!((acc.len(), rev.len()), (2, 0));
        let (acc, rev) = filter_by_confidence(&preds, 0.9 + 1e-9);
        assert_eq!((acc.len(), rev.len()), (0, 2));
    }

    #[test]
    fn default_thresholds_are_twentieths() {
        let t = default_thresholds::<f64>();
        assert_eq!(t.len(), 21);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[16], 0.8);
        assert_eq!(t[20], 1.0);
    }

    #[test]
    fn confusion_csv() {
        let preds = [pred("a", E, E, 0.9), pred("b", E, N, 0.6), pred("c", N, E, 0.7)];
        let m = ConfusionMatrix::from_predictions(&preds);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "gold,EVENT,NON_EVENT\nEVENT,1,1\nNON_EVENT,1,0\n"
        );
    }

    #[test]
    fn predictions_csv_round_trip() {
        let mut preds = vec![pred("a", E, E, 0.9), pred("b", N, E, 0.6)];
        preds.push(Prediction {
            lemma: "c".into(),
            predicted: N,
            confidence: 1.0,
            gold: None,
        });
        let mut buf = Vec::new();
        write_predictions_csv(&preds, &mut buf).unwrap();
        assert_eq!(read_predictions_csv::<f64, _>(&buf[..]).unwrap(), preds);
        assert!(read_predictions_csv::<f64, _>("lemma,gold,predicted,confidence\na,EVENT,MAYBE,1\n".as_bytes()).is_err());
    }
}
