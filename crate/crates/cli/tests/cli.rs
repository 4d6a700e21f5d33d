use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hetpart_cli::manifest::DEFAULT_BUDGETS;

fn hetpart(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetpart"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = hetpart(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn em_then_compare_gives_a_zero_gap_em_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["run", "em"]);
    let run = csv_rows(&out.join("reports/run_em.csv"));
    assert_eq!(run[1][0], "EM");

    ok(out, &["compare", "--no-ml", "--budgets", "50,100", "--seeds", "3"]);
    let rows = csv_rows(&out.join("reports/comparison.csv"));
    assert_eq!(
        rows[0].join(","),
        "method,budget,true_energy_s,abs_diff_s,pct_diff,speedup_host,speedup_device,evals"
    );
    let em = rows.iter().find(|r| r[0] == "EM").unwrap();
    assert_eq!((em[3].as_str(), em[4].as_str()), ("0", "0"));
    assert_eq!(em[2], run[1][10], "compare and run agree on the EM energy");
    assert_eq!(rows.iter().filter(|r| r[0] == "SAM").count(), 2);
    assert_eq!(csv_rows(&out.join("reports/comparison_runs.csv")).len(), 1 + 1 + 2 * 3);
}

#[test]
fn default_budget_grid() {
    assert_eq!(DEFAULT_BUDGETS, [250, 500, 750, 1000, 1250, 1500, 1750, 2000]);
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["compare", "--no-ml", "--seeds", "1"]);
    let rows = csv_rows(&dir.path().join("reports/comparison.csv"));
    let budgets: Vec<&str> = rows.iter().filter(|r| r[0] == "SAM").map(|r| r[1].as_str()).collect();
    assert_eq!(budgets, ["250", "500", "750", "1000", "1250", "1500", "1750", "2000"]);
}

#[test]
fn step_by_step_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["--seed", "5", "generate", "--noise", "0", "--workloads", "3170"]);
    assert_eq!(csv_rows(&out.join("data/training.csv")).len(), 1 + 1800);
    ok(out, &["--seed", "5", "train", "--trees", "40"]);
    for f in ["data/train.csv", "data/eval.csv", "models/model.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let table = ok(out, &["eval-model", "--group-by", "side"]);
    assert!(table.contains("host") && table.contains("device"));
    ok(out, &["--seed", "9", "run", "saml", "--iterations", "200"]);
    let trace = csv_rows(&out.join("traces/saml_200_seed9.csv"));
    assert_eq!(trace.len(), 1 + 201);
    assert_eq!(trace[0][0], "iteration");
    let sweep = ok(out, &["sweep", "--workload", "190", "--name", "small.csv"]);
    assert!(sweep.contains("best host fraction: 100%"), "{sweep}");
    assert_eq!(csv_rows(&out.join("reports/small.csv")).len(), 12);
}

#[test]
fn reference_manifest_pipeline_writes_every_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../reference/manifest.json");
    let o = Command::new(env!("CARGO_BIN_EXE_hetpart"))
        .arg("--manifest")
        .arg(&manifest)
        .arg("--out")
        .arg(dir.path())
        .args(["report", "--seeds", "2"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "data/training.csv",
        "data/train.csv",
        "data/eval.csv",
        "models/model.json",
        "traces/sam_1000_seed42.csv",
        "traces/saml_1000_seed42.csv",
        "reports/model_error.csv",
        "reports/run_em.csv",
        "reports/run_sam.csv",
        "reports/run_saml.csv",
        "reports/comparison.csv",
        "reports/comparison_runs.csv",
        "reports/comparison.txt",
        "reports/sweep_small_48.csv",
        "reports/sweep_large_48.csv",
        "reports/sweep_large_4.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let bad_space = out.join("space.json");
    fs::write(&bad_space, r#"{"host_threads": []}"#).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--space", bad_space.to_str().unwrap(), "run", "em"],
        vec!["--platform", "missing.json", "run", "em"],
        vec!["run", "eml", "--model", "missing.json"],
        vec!["run", "bogus"],
        vec!["generate", "--noise", "-1"],
        vec!["eval-model", "--group-by", "colour"],
        vec!["compare", "--budgets", "0"],
        vec!["train"],
    ];
    for args in cases {
        let o = hetpart(out, &args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty(), "{args:?} should explain itself");
    }
}

#[test]
fn failed_stage_is_named_and_partial_outputs_removed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    // a directory where the model file should go makes `train` fail after
    // `generate` has already written its data
    fs::create_dir_all(out.join("models/model.json")).unwrap();
    let o = hetpart(out, &["report", "--seeds", "1"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("stage `train` failed"), "{err}");
    for f in ["data/training.csv", "data/train.csv", "data/eval.csv"] {
        assert!(!out.join(f).exists(), "{f} left behind");
    }
}
