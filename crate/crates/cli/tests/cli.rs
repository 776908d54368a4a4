use std::path::Path;
use std::process::{Command, Output};

fn autogmm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autogmm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn synth_then_fit_recovers_three_spherical_components() {
    let dir = tempfile::tempdir().unwrap();
    let synth = autogmm(
        &[
            "synth",
            "--kind",
            "three_component",
            "--seed",
            "7",
            "--out",
            "d.csv",
        ],
        dir.path(),
    );
    assert!(synth.status.success());
    assert!(dir.path().join("d_truth.csv").exists());
    let fit = autogmm(
        &["fit", "d.csv", "--seed", "7", "--out-dir", "out"],
        dir.path(),
    );
    assert_eq!(fit.status.code(), Some(0));
    assert!(
        stdout(&fit).starts_with("k=3 constraint=spherical"),
        "{}",
        stdout(&fit)
    );
    for f in ["labels.csv", "model.json", "grid.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn ari_of_identical_files_is_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "2\n2\n0\n1\n").unwrap();
    let o = autogmm(&["ari", "a.csv", "a.csv"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1");
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = autogmm(&["fit", "missing.csv"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("missing.csv"));

    std::fs::write(dir.path().join("ragged.csv"), "1,2\n3\n").unwrap();
    let ragged = autogmm(&["fit", "ragged.csv"], dir.path());
    assert_eq!(ragged.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&ragged.stderr).contains("line 2"));

    assert_eq!(
        autogmm(&["fit", "x.csv", "--no-such-flag"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        autogmm(&["synth", "--kind", "spiral", "--out", "s.csv"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(autogmm(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn all_failed_search_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.csv"), "0\n1\n2\n").unwrap();
    let o = autogmm(&["fit", "x.csv", "--kmin", "4", "--kmax", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hfit_writes_dendrogram_and_cuts() {
    let dir = tempfile::tempdir().unwrap();
    autogmm(
        &[
            "synth",
            "--kind",
            "hierarchy",
            "--n",
            "400",
            "--out",
            "h.csv",
        ],
        dir.path(),
    );
    for level in 1..=3 {
        assert!(dir
            .path()
            .join(format!("h_truth_level{level}.csv"))
            .exists());
    }
    let o = autogmm(
        &[
            "hfit",
            "h.csv",
            "--affinities",
            "l2,none",
            "--out-dir",
            "tree",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("root_k=2"));
    let tree = dir.path().join("tree");
    assert!(tree.join("dendrogram.json").exists());
    assert!(tree.join("labels_depth1.csv").exists());
    let ari = autogmm(
        &["ari", "tree/labels_depth1.csv", "h_truth_level1.csv"],
        dir.path(),
    );
    assert_eq!(stdout(&ari), "1");
}
