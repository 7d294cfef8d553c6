//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for data and pipeline errors, 2 for usage
//! errors (bad flags, unreadable input paths).

use std::ffi::OsString;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::corpus::{parse_tagged_corpus, ParseMode};
use crate::cues::{builtin_cue_set, CueSet, Language, TargetPolicy};
use crate::data::{english_gold, generate_synthetic_corpus, load_gold, spanish_sample_gold, GoldStandard, SynthParams};
use crate::dtree::{train, DecisionTree, LabeledExample, Prediction, TreeParams};
use crate::eval::{
    cross_validate, default_thresholds, filter_by_confidence, precision_curve, read_predictions_csv, write_curve_csv,
    write_predictions_csv,
};
use crate::features::{to_relative, Dataset, FeatureAccumulator};
use crate::label::Label;
use crate::scalar::FeatureValue;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit code 2.
    Usage(String),
    /// Bad data or a failed pipeline step; exit code 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn data<E: Display>(context: impl Display) -> impl FnOnce(E) -> CliError {
    move |e| CliError::Data(format!("{}: {}", context, e))
}

#[derive(Debug, Parser)]
#[command(name = "eventnoun", version, about = "Cue-based event noun acquisition from POS-tagged corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count cue hits per gold lemma and write a dataset CSV.
    Extract {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a tree and write it as JSON (plus a `.txt` rendering).
    Train {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a trained tree to a dataset; writes `lemma,predicted,confidence`.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validation with curve and lexicon split.
    Evaluate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        tree: TreeArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Confidence at or above which a prediction is accepted.
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Precision-vs-confidence curve from a predictions CSV.
    Curve {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_enum, default_value_t = LabelArg::Event)]
        positive: LabelArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus, its gold standard and the draw log.
    Synth {
        #[arg(long)]
        lang: Language,
        #[arg(long)]
        cues: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        event_lemmas: usize,
        #[arg(long, default_value_t = 100)]
        non_event_lemmas: usize,
        #[arg(long, default_value_t = 0.4)]
        p_event: f64,
        #[arg(long, default_value_t = 0.02)]
        p_non_event: f64,
        #[arg(long, default_value_t = SynthParams::default().min_occurrences)]
        min_occurrences: u32,
        #[arg(long, default_value_t = SynthParams::default().max_occurrences)]
        max_occurrences: u32,
        #[arg(long, default_value_t = 0.1)]
        silence_event: f64,
        #[arg(long, default_value_t = 0.1)]
        silence_non_event: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        /// Output directory for corpus.txt, gold.csv and draws.csv.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelArg {
    Event,
    NonEvent,
}

impl From<LabelArg> for Label {
    fn from(l: LabelArg) -> Self {
        match l {
            LabelArg::Event => Label::Event,
            LabelArg::NonEvent => Label::NonEvent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    First,
    Last,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub lang: Language,
    /// Tagged corpus file; repeatable.
    #[arg(long, required = true)]
    pub corpus: Vec<PathBuf>,
    /// Gold CSV `lemma,label`.
    #[arg(long, conflicts_with = "builtin_gold", required_unless_present = "builtin_gold")]
    pub gold: Option<PathBuf>,
    /// Use the built-in gold list for `--lang` (Spanish: a six-lemma sample).
    #[arg(long)]
    pub builtin_gold: bool,
    /// Rule file; defaults to the built-in set for `--lang`.
    #[arg(long)]
    pub cues: Option<PathBuf>,
    /// How the target slot binds in noun compounds.
    #[arg(long, value_enum, default_value_t = PolicyArg::First)]
    pub target_policy: PolicyArg,
    /// Skip malformed corpus lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Use relative frequencies (count / noun occurrences) instead of counts.
    #[arg(long)]
    pub relative: bool,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Labeled dataset CSV written by `extract`.
    #[arg(long, conflicts_with_all = ["lang", "corpus", "gold", "builtin_gold", "cues", "relative"])]
    pub dataset: Option<PathBuf>,
    #[arg(long, required_unless_present = "dataset")]
    pub lang: Option<Language>,
    #[arg(long)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub builtin_gold: bool,
    #[arg(long)]
    pub cues: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::First)]
    pub target_policy: PolicyArg,
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub relative: bool,
}

#[derive(Debug, Args)]
pub struct TreeArgs {
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
    /// Pruning confidence factor.
    #[arg(long, default_value_t = 0.25)]
    pub cf: f64,
    #[arg(long)]
    pub no_prune: bool,
    /// Laplace-corrected leaf confidence.
    #[arg(long)]
    pub laplace: bool,
}

impl TreeArgs {
    fn params(&self) -> Result<TreeParams, CliError> {
        let p = TreeParams {
            min_leaf: self.min_leaf,
            confidence_factor: self.cf,
            pruning: !self.no_prune,
            laplace_confidence: self.laplace,
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, A>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{}", e);
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    match cli.command {
        Command::Extract { corpus, out } => cmd_extract(&corpus, &out),
        Command::Train { source, tree, out } => cmd_train(&source, &tree, &out),
        Command::Classify { model, dataset, out } => cmd_classify(&model, &dataset, &out),
        Command::Evaluate {
            source,
            tree,
            k,
            seed,
            threshold,
            out,
        } => cmd_evaluate(&source, &tree, k, seed, threshold, &out),
        Command::Curve {
            predictions,
            positive,
            out,
        } => cmd_curve(&predictions, positive.into(), &out),
        Command::Synth {
            lang,
            cues,
            seed,
            event_lemmas,
            non_event_lemmas,
            p_event,
            p_non_event,
            min_occurrences,
            max_occurrences,
            silence_event,
            silence_non_event,
            noise,
            out,
        } => {
            let params = SynthParams {
                event_lemmas,
                non_event_lemmas,
                p_event,
                p_non_event,
                min_occurrences,
                max_occurrences,
                silence_event,
                silence_non_event,
                noise,
                seed,
            };
            params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let set = cue_set(lang, cues.as_deref(), PolicyArg::First)?;
            cmd_synth(&params, &set, &out)
        }
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {}", path.display(), e)))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot create {}: {}", path.display(), e)))
}

fn out_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Data(format!("cannot create {}: {}", path.display(), e)))
}

fn cue_set(lang: Language, path: Option<&Path>, policy: PolicyArg) -> Result<CueSet, CliError> {
    let set = match path {
        None => builtin_cue_set(lang),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {}", p.display(), e)))?;
            CueSet::parse(&text, lang).map_err(data(p.display()))?
        }
    };
    Ok(set.with_policy(match policy {
        PolicyArg::First => TargetPolicy::FirstNoun,
        PolicyArg::Last => TargetPolicy::LastNounOfCompound,
    }))
}

fn gold(lang: Language, path: Option<&Path>, builtin: bool) -> Result<GoldStandard, CliError> {
    match (path, builtin) {
        (Some(p), _) => load_gold(open(p)?, lang).map_err(data(p.display())),
        (None, true) => Ok(match lang {
            Language::En => english_gold(),
            Language::Es => {
                warn!("the built-in Spanish gold standard is a six-lemma sample");
                spanish_sample_gold()
            }
        }),
        (None, false) => Err(CliError::Usage("one of --gold or --builtin-gold is required".into())),
    }
}

fn extract(
    lang: Language,
    corpora: &[PathBuf],
    gold_path: Option<&Path>,
    builtin_gold: bool,
    cues: Option<&Path>,
    policy: PolicyArg,
    lenient: bool,
) -> Result<Dataset<u64>, CliError> {
    if corpora.is_empty() {
        return Err(CliError::Usage("at least one --corpus is required".into()));
    }
    let set = cue_set(lang, cues, policy)?;
    let gold = gold(lang, gold_path, builtin_gold)?;
    let files = corpora.iter().map(|p| open(p).map(|f| (p, f))).collect::<Result<Vec<_>, _>>()?;
    let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let mut acc = FeatureAccumulator::new(&set, &gold.lemmas());
    for (path, file) in files {
        let mut reader = parse_tagged_corpus(BufReader::new(file), mode);
        for sentence in reader.by_ref() {
            acc.add(&sentence.map_err(data(path.display()))?);
        }
        if reader.skipped_lines() > 0 {
            warn!("{}: skipped {} malformed lines", path.display(), reader.skipped_lines());
        }
        info!("read {}", path.display());
    }
    acc.finish().attach_labels(&gold).map_err(data("gold standard"))
}

fn write_dataset<V: FeatureValue>(ds: &Dataset<V>, out: &Path) -> Result<(), CliError> {
    ds.write_csv(create(out)?).map_err(data(out.display()))
}

fn cmd_extract(a: &CorpusArgs, out: &Path) -> Result<(), CliError> {
    let ds = extract(
        a.lang,
        &a.corpus,
        a.gold.as_deref(),
        a.builtin_gold,
        a.cues.as_deref(),
        a.target_policy,
        a.lenient,
    )?;
    println!("lemmas: {}", ds.len());
    println!("nonzero vectors: {}", ds.nonzero_count());
    if a.relative {
        write_dataset(&to_relative(&ds).to_decimal(), out)
    } else {
        write_dataset(&ds, out)
    }
}

/// Examples plus attribute names, from a dataset file or from corpora.
fn load_examples(s: &SourceArgs) -> Result<(Vec<LabeledExample<f64>>, Vec<String>), CliError> {
    if let Some(p) = &s.dataset {
        let ds: Dataset<f64> = Dataset::read_csv(open(p)?).map_err(data(p.display()))?;
        let ex = ds.examples().map_err(data(p.display()))?;
        return Ok((ex, ds.cue_ids().to_vec()));
    }
    let lang = s.lang.ok_or_else(|| CliError::Usage("--lang is required without --dataset".into()))?;
    if s.gold.is_some() && s.builtin_gold {
        return Err(CliError::Usage("--gold and --builtin-gold are exclusive".into()));
    }
    let ds = extract(
        lang,
        &s.corpus,
        s.gold.as_deref(),
        s.builtin_gold,
        s.cues.as_deref(),
        s.target_policy,
        s.lenient,
    )?;
    let ids = ds.cue_ids().to_vec();
    let ex = if s.relative {
        to_relative(&ds).examples()
    } else {
        ds.examples()
    }
    .map_err(data("dataset"))?;
    Ok((ex, ids))
}

fn cmd_train(s: &SourceArgs, t: &TreeArgs, out: &Path) -> Result<(), CliError> {
    let params = t.params()?;
    let (examples, ids) = load_examples(s)?;
    let tree = train(&examples, &ids, &params).map_err(data("training"))?;
    fs::write(out, tree.to_json()).map_err(data(out.display()))?;
    let txt = out.with_extension("txt");
    fs::write(&txt, tree.render()).map_err(data(txt.display()))?;
    println!("nodes: {}", tree.node_count());
    Ok(())
}

fn cmd_classify(model: &Path, dataset: &Path, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(model).map_err(|e| CliError::Usage(format!("cannot read {}: {}", model.display(), e)))?;
    let tree: DecisionTree<f64> = DecisionTree::from_json(&text).map_err(data(model.display()))?;
    let ds: Dataset<f64> = Dataset::read_csv(open(dataset)?).map_err(data(dataset.display()))?;
    if ds.dim() != tree.dim() {
        return Err(CliError::Data(format!(
            "dimension mismatch: model has {} cues, dataset has {}",
            tree.dim(),
            ds.dim()
        )));
    }
    if ds.cue_ids() != tree.attributes.as_slice() {
        warn!("dataset cue ids differ from the model's; columns are matched by position");
    }
    let mut preds: Vec<Prediction<f64>> = ds
        .vectors()
        .iter()
        .map(|v| tree.classify(&v.lemma, &v.to_scalars()))
        .collect::<Result<_, _>>()
        .map_err(data("classification"))?;
    preds.sort_by(|a, b| b.confidence.total_cmp(&a.confidence).then_with(|| a.lemma.cmp(&b.lemma)));
    let mut w = csv::Writer::from_writer(create(out)?);
    let mut write = || -> Result<(), csv::Error> {
        w.write_record(["lemma", "predicted", "confidence"])?;
        for p in &preds {
            w.write_record([p.lemma.as_str(), p.predicted.as_str(), &p.confidence.to_string()])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(data(out.display()))?;
    println!("classified: {}", preds.len());
    Ok(())
}

fn cmd_evaluate(s: &SourceArgs, t: &TreeArgs, k: usize, seed: u64, theta: f64, out: &Path) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(CliError::Usage(format!("--threshold {} outside [0, 1]", theta)));
    }
    let params = t.params()?;
    let (examples, ids) = load_examples(s)?;
    if k < 2 || k > examples.len() {
        return Err(CliError::Usage(format!(
            "--k {} must be between 2 and the dataset size {}",
            k,
            examples.len()
        )));
    }
    let report = cross_validate(&examples, &ids, &params, k, seed).map_err(data("cross-validation"))?;
    let curve = precision_curve(&report.predictions, Label::Event, &default_thresholds());
    let (accepted, to_review) = filter_by_confidence(&report.predictions, theta);
    out_dir(out)?;

    let mut summary = report.summary();
    summary.push_str(&format!(
        "threshold: {}\naccepted: {}\nto review: {}\n",
        theta,
        accepted.len(),
        to_review.len()
    ));
    let path = out.join("report.txt");
    fs::write(&path, summary).map_err(data(path.display()))?;
    let path = out.join("predictions.csv");
    write_predictions_csv(&report.predictions, create(&path)?).map_err(data(path.display()))?;
    let path = out.join("curve.csv");
    write_curve_csv(&curve, create(&path)?).map_err(data(path.display()))?;
    let path = out.join("confusion.csv");
    report.confusion.write_csv(create(&path)?).map_err(data(path.display()))?;
    let path = out.join("accepted.csv");
    write_predictions_csv(&accepted, create(&path)?).map_err(data(path.display()))?;
    let path = out.join("to_review.csv");
    write_predictions_csv(&to_review, create(&path)?).map_err(data(path.display()))?;

    println!("accuracy: {:.3}", report.mean_accuracy);
    Ok(())
}

fn cmd_curve(predictions: &Path, positive: Label, out: &Path) -> Result<(), CliError> {
    let preds: Vec<Prediction<f64>> = read_predictions_csv(open(predictions)?).map_err(data(predictions.display()))?;
    let curve = precision_curve(&preds, positive, &default_thresholds());
    write_curve_csv(&curve, create(out)?).map_err(data(out.display()))
}

fn cmd_synth(params: &SynthParams, set: &CueSet, out: &Path) -> Result<(), CliError> {
    let synth = generate_synthetic_corpus(params, set).map_err(data("synthetic corpus"))?;
    out_dir(out)?;
    let path = out.join("corpus.txt");
    fs::write(&path, &synth.text).map_err(data(path.display()))?;
    let path = out.join("gold.csv");
    synth.gold.write_csv(create(&path)?).map_err(data(path.display()))?;
    let path = out.join("draws.csv");
    write_dataset(&synth.draw_log, &path)?;
    let mut stdout = io::stdout().lock();
    let _ = writeln!(stdout, "lemmas: {}", synth.gold.len());
    let _ = writeln!(stdout, "nonzero vectors: {}", synth.draw_log.nonzero_count());
    Ok(())
}
