//! End-to-end tests of the `mfsir` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfsir::experiment::RESULTS_HEADER;
use mfsir::synthetic::sparse_recovery;
use mfsir::{save_dataset, FeatureRanking};

fn mfsir(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfsir"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Writes a synthetic dataset into `dir` and returns its ARFF and XML paths.
fn write_dataset(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let d = sparse_recovery(80, 12, 3, 3, seed).unwrap().dataset;
    let arff = dir.join(format!("{}.arff", d.name()));
    let xml = arff.with_extension("xml");
    save_dataset(&d, &arff, &xml).unwrap();
    (arff, xml)
}

#[test]
fn summarize_prints_header_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let (arff, xml) = write_dataset(dir.path(), 0);
    let o = mfsir(
        &["summarize", arff.to_str().unwrap(), xml.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,n,m,q,lcard,lden");
    assert!(lines[1].contains(",80,12,3,"), "{text}");
}

#[test]
fn rank_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let (arff, xml) = write_dataset(dir.path(), 1);
    let ranking = dir.path().join("ranking.csv");
    let model = dir.path().join("model");
    let o = mfsir(
        &[
            "rank",
            "--dataset",
            arff.to_str().unwrap(),
            "--labels",
            xml.to_str().unwrap(),
            "--eta",
            "1e-3",
            "--tmax",
            "50",
            "--out",
            ranking.to_str().unwrap(),
            "--model-dir",
            model.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = FeatureRanking::read_csv(&ranking).unwrap();
    assert_eq!(r.order.len(), 12);
    for f in ["G.csv", "H.csv", "V.csv", "B.csv"] {
        assert!(model.join(f).exists(), "{f}");
    }

    let o = mfsir(
        &[
            "evaluate",
            "--dataset",
            arff.to_str().unwrap(),
            "--labels",
            xml.to_str().unwrap(),
            "--ranking",
            ranking.to_str().unwrap(),
            "--fractions",
            "0.25,0.5",
            "--folds",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    // Header plus one row per fraction and fold.
    assert_eq!(stdout(&o).lines().count(), 1 + 2 * 2);
}

#[test]
fn run_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = String::new();
    for seed in 0..3 {
        let (arff, _) = write_dataset(dir.path(), seed);
        config.push_str(&format!(
            "dataset = {}\n",
            arff.file_name().unwrap().to_string_lossy()
        ));
    }
    config.push_str("fractions = 0.25\ncv_folds = 2\ntmax = 20\noutput = out\n");
    std::fs::write(dir.path().join("exp.conf"), config).unwrap();

    let o = mfsir(
        &["run", "--config", "exp.conf", "--seeds", "0,1"],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(lines.next().unwrap(), RESULTS_HEADER.join(","));
    // 3 datasets × 3 algorithms × 1 fraction × 2 folds × 2 seeds.
    assert_eq!(lines.count(), 36);
    for f in ["summary.csv", "summary_by_fraction.csv", "convergence.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }

    let o = mfsir(
        &[
            "compare",
            "--results",
            "out/results.csv",
            "--metric",
            "hl",
            "--direction",
            "min",
            "--out",
            "cd",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("Nemenyi CD"));
    let ranks = std::fs::read_to_string(dir.path().join("cd/cd_diagram.csv")).unwrap();
    assert_eq!(ranks.lines().count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (arff, xml) = write_dataset(dir.path(), 2);

    // Usage error.
    assert_eq!(
        mfsir(&["rank", "--dataset"], dir.path()).status.code(),
        Some(1)
    );
    // Missing input file.
    let o = mfsir(&["summarize", "missing.arff", "missing.xml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    // A step size far too large diverges.
    let o = mfsir(
        &[
            "rank",
            "--dataset",
            arff.to_str().unwrap(),
            "--labels",
            xml.to_str().unwrap(),
            "--eta",
            "1e6",
            "--varpi",
            "1",
            "--tol",
            "1e-15",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
