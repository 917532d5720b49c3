use std::path::Path;
use std::process::{Command, Output};

fn otood(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otood"))
        .args(args)
        .env_remove("OTOOD_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fixture(dir: &Path) {
    let out = otood(&[
        "synth", "--out", p(dir), "--n-train", "200", "--n-id", "60", "--n-ood", "60", "--dim", "16",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_score_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let (train, test, labels) = (
        dir.path().join("train.feat"),
        dir.path().join("test.feat"),
        dir.path().join("labels.txt"),
    );
    let scores = dir.path().join("scores.csv");
    let out = otood(&[
        "score", "--train", p(&train), "--test", p(&test), "--labels", p(&labels),
        "--batch-size", "32", "--out", p(&scores),
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("AUROC"));

    let text = std::fs::read_to_string(&scores).unwrap();
    assert!(text.starts_with("index,score,converged\n0,"));
    assert_eq!(text.lines().count(), 121);

    let metrics = dir.path().join("metrics.csv");
    let out = otood(&["eval", "--scores", p(&scores), "--labels", p(&labels), "--out", p(&metrics)]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&metrics).unwrap();
    assert!(csv.starts_with("fpr95,auroc,aupr,n_id,n_ood,threshold_at_tpr95\n"));
    assert!(csv.lines().nth(1).unwrap().contains(",60,60,"));

    // stdout carries the same rows when no --out is given
    let out = otood(&["score", "--train", p(&train), "--test", p(&test), "--batch-size", "32"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn runs_are_bit_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_otood"))
            .args([
                "score", "--train", p(&dir.path().join("train.feat")), "--test",
                p(&dir.path().join("test.feat")), "--batch-size", "8", "--shuffle", "3",
            ])
            .env("OTOOD_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
}

#[test]
fn baselines_write_scores() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let (train, test) = (dir.path().join("train.feat"), dir.path().join("test.feat"));
    for method in ["knn", "mahalanobis"] {
        let out = otood(&["baseline", "--method", method, "--k", "10", "--train", p(&train), "--test", p(&test)]);
        assert_eq!(code(&out), 0);
        assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 121);
    }
    let out = otood(&["baseline", "--method", "knn", "--k", "500", "--train", p(&train), "--test", p(&test)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn csv_features_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = otood(&["synth", "--out", p(dir.path()), "--n-train", "30", "--n-id", "5", "--n-ood", "5", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let out = otood(&[
        "score", "--train", p(&dir.path().join("train.csv")), "--test", p(&dir.path().join("test.csv")),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn oracle_prints_both_plans() {
    let out = otood(&["oracle", "--cost", "0,1;1,0", "--lambda", "0.1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("oracle plan") && text.contains("sinkhorn plan"));
    assert!(text.contains("0.499977301"));
    let out = otood(&["oracle", "--cost", "0,0,0,0,0", "--lambda", "0.1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn format_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let train = dir.path().join("train.feat");
    let junk = dir.path().join("junk.feat");
    std::fs::write(&junk, b"NOPE0000000000000000").unwrap();
    for args in [
        vec!["score", "--train", p(&train), "--test", p(&junk)],
        vec!["score", "--train", p(&train), "--test", "/nonexistent.feat"],
        vec!["score", "--train", p(&train), "--test", p(&train), "--lambda", "0"],
        vec!["score", "--train", p(&train), "--test", p(&train), "--batch-size", "0"],
        vec!["score", "--train", p(&train), "--test", p(&train), "--no-normalize", "--tol", "-1"],
        vec!["frobnicate"],
    ] {
        let out = otood(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_otood"))
        .args(["oracle", "--cost", "0"])
        .env("OTOOD_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn overflow_without_log_domain_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fixture(dir.path());
    let (train, test) = (dir.path().join("train.feat"), dir.path().join("test.feat"));
    let out = otood(&[
        "score", "--train", p(&train), "--test", p(&test), "--lambda", "0.001", "--log-domain", "off",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("log-domain"));
}

#[test]
fn single_class_labels_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("s.csv");
    let labels = dir.path().join("l.txt");
    std::fs::write(&scores, "index,score,converged\n0,0.5,true\n1,0.7,true\n").unwrap();
    std::fs::write(&labels, "1\n1\n").unwrap();
    let out = otood(&["eval", "--scores", p(&scores), "--labels", p(&labels)]);
    assert_eq!(code(&out), 4);
}
