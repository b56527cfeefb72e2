use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/toy").join(name)
}

fn elixa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elixa")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["pol", "cv", "--help"], &["--version"]] {
        let out = elixa(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &[][..],
        &["ote"],
        &["pol", "cv", "--folds", "many", "x"],
        &["convert", "--from", "csv", "a", "b"],
    ] {
        let out = elixa(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn data_errors_exit_two_and_name_the_file() {
    let out = elixa(&["ote", "cv", "no/such/file.jsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no/such/file.jsonl"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{not json\n").unwrap();
    let out = elixa(&["pol", "cv", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.jsonl"), "{}", stderr(&out));
}

#[test]
fn polarity_cv_reports_folds_mean_and_baseline() {
    let out = elixa(&[
        "pol",
        "cv",
        "--config",
        toy("pol.json").to_str().unwrap(),
        "--folds",
        "5",
        toy("restaurants.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for label in ["fold 1", "fold 5", "mean", "majority baseline"] {
        assert!(
            text.lines().any(|l| l.trim_start().starts_with(label)),
            "{label} missing from\n{text}"
        );
    }
}

#[test]
fn csv_output_has_a_header_and_one_row_per_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ablation.csv");
    let out = elixa(&[
        "pol",
        "ablate",
        "--csv",
        csv.to_str().unwrap(),
        "--folds",
        "5",
        "--configs",
        toy("ablation").to_str().unwrap(),
        toy("restaurants.jsonl").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Features,Accuracy");
    assert!(stdout(&out).contains("1lgram+Lgen"));
    assert_eq!(lines.len(), 6);
}

#[test]
fn same_seed_gives_same_output() {
    let run = |seed: &str| {
        let out = elixa(&[
            "--seed",
            seed,
            "ote",
            "cv",
            "--folds",
            "4",
            toy("restaurants.jsonl").to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        stdout(&out)
    };
    assert_eq!(run("3"), run("3"));
}
