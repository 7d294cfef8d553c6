use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eventnoun::data::english_gold;
use tempfile::TempDir;

fn eventnoun(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eventnoun"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TINY: &str = "\
During\tduring\tADP
the\tthe\tDET
war\twar\tNOUN
,\t,\tPUNCT

The\tthe\tDET
map\tmap\tNOUN
of\tof\tADP
the\tthe\tDET
city\tcity\tNOUN
";

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--lang", "en", "--seed", "11", "--out", "s"];
    args.extend_from_slice(extra);
    let o = eventnoun(&args, dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn extract_with_builtin_gold_writes_every_gold_lemma() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("tiny.txt"), TINY).unwrap();
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "tiny.txt", "--builtin-gold", "--out", "ds.csv"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(&format!("lemmas: {}", english_gold().len())));
    assert!(stdout(&o).contains("nonzero vectors: 2"));
    let csv = fs::read_to_string(dir.path().join("ds.csv")).unwrap();
    assert_eq!(csv.lines().count(), english_gold().len() + 1);
    let war = csv.lines().find(|l| l.starts_with("war,")).unwrap();
    assert!(war.starts_with("war,1,1,"));
    assert!(war.ends_with(",EVENT"));
    let map = csv.lines().find(|l| l.starts_with("map,")).unwrap();
    assert!(map.ends_with(",NON_EVENT"));
}

#[test]
fn missing_corpus_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "nowhere.txt", "--builtin-gold", "--out", "ds.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.txt"));
}

#[test]
fn malformed_line_is_a_data_error_with_line_number() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.txt"), "war\twar\tNOUN\n\nthe\tDET\n").unwrap();
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "bad.txt", "--builtin-gold", "--out", "ds.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "bad.txt", "--builtin-gold", "--lenient", "--out", "ds.csv"],
        dir.path(),
    );
    assert!(o.status.success());
}

#[test]
fn unknown_flag_and_missing_gold_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("tiny.txt"), TINY).unwrap();
    let o = eventnoun(&["extract", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = eventnoun(&["extract", "--lang", "en", "--corpus", "tiny.txt", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = eventnoun(&["extract", "--lang", "xx", "--corpus", "tiny.txt", "--builtin-gold", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn separable_synthetic_run_is_perfect() {
    let dir = TempDir::new().unwrap();
    synth(
        dir.path(),
        &["--p-non-event", "0", "--p-event", "0.5", "--silence-event", "0", "--silence-non-event", "0", "--noise", "0"],
    );
    let o = eventnoun(
        &["evaluate", "--lang", "en", "--corpus", "s/corpus.txt", "--gold", "s/gold.csv", "--seed", "3", "--out", "ev"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy: 1.000"), "{}", stdout(&o));
}

#[test]
fn evaluate_is_byte_identical_across_runs_and_partitions() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &[]);
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "s/corpus.txt", "--gold", "s/gold.csv", "--out", "ds.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    for out in ["a", "b"] {
        let o = eventnoun(
            &["evaluate", "--dataset", "ds.csv", "--k", "10", "--seed", "5", "--threshold", "0.8", "--out", out],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["report.txt", "predictions.csv", "curve.csv", "confusion.csv", "accepted.csv", "to_review.csv"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{} differs", f);
    }
    let rows = |f: &str| fs::read_to_string(dir.path().join("a").join(f)).unwrap().lines().count() - 1;
    assert_eq!(rows("accepted.csv") + rows("to_review.csv"), 200);
    assert_eq!(rows("predictions.csv"), 200);
    assert_eq!(rows("curve.csv"), 21);

    let o = eventnoun(&["curve", "--predictions", "a/predictions.csv", "--out", "c.csv"], dir.path());
    assert!(o.status.success());
    assert_eq!(
        fs::read(dir.path().join("c.csv")).unwrap(),
        fs::read(dir.path().join("a/curve.csv")).unwrap()
    );
}

#[test]
fn train_then_classify() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &[]);
    let run = |args: &[&str]| {
        let o = eventnoun(args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        o
    };
    run(&["extract", "--lang", "en", "--corpus", "s/corpus.txt", "--gold", "s/gold.csv", "--out", "ds.csv"]);
    run(&["train", "--dataset", "ds.csv", "--out", "model.json"]);
    assert!(dir.path().join("model.txt").exists());
    run(&["classify", "--model", "model.json", "--dataset", "ds.csv", "--out", "lex.csv"]);
    let lex = fs::read_to_string(dir.path().join("lex.csv")).unwrap();
    let rows: Vec<(String, f64)> = lex
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].to_string(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 200);
    for w in rows.windows(2) {
        assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
    }

    // zero vectors all take the same path to the same leaf
    let ds = fs::read_to_string(dir.path().join("ds.csv")).unwrap();
    let zeros: Vec<&str> = ds
        .lines()
        .skip(1)
        .filter(|r| r.split(',').skip(2).take(16).all(|c| c == "0"))
        .map(|r| r.split(',').next().unwrap())
        .collect();
    assert!(zeros.len() >= 2);
    let outcomes: std::collections::BTreeSet<String> = lex
        .lines()
        .filter(|l| zeros.contains(&l.split(',').next().unwrap()))
        .map(|l| l.split_once(',').unwrap().1.to_string())
        .collect();
    assert_eq!(outcomes.len(), 1, "{:?}", outcomes);

    let es = run(&["synth", "--lang", "es", "--seed", "1", "--out", "es"]);
    assert!(stdout(&es).contains("lemmas: 200"));
    run(&["extract", "--lang", "es", "--corpus", "es/corpus.txt", "--gold", "es/gold.csv", "--out", "es.csv"]);
    let o = eventnoun(&["classify", "--model", "model.json", "--dataset", "es.csv", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("16") && stderr(&o).contains("11"), "{}", stderr(&o));
}

#[test]
fn relative_frequencies_are_written_as_decimals() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("tiny.txt"), TINY).unwrap();
    let o = eventnoun(
        &["extract", "--lang", "en", "--corpus", "tiny.txt", "--builtin-gold", "--relative", "--out", "r.csv"],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("war,1,1,")));
    // `map of` fires EN-15 once out of one occurrence
    let map = csv.lines().find(|l| l.starts_with("map,")).unwrap();
    assert_eq!(map.split(',').nth(16), Some("1"));
}
