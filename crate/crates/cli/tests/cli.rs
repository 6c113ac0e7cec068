use std::path::Path;
use std::process::{Command, Output};

fn wlsppmi(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlsppmi"))
        .args(args)
        .current_dir(dir)
        .env_remove("WLSPPMI_DATA_DIR")
        .env_remove("WLSPPMI_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

const SMALL: &str = r#"
[experiment]
output = "out/report.csv"
cache_dir = "cache"
models = ["SPPMI", "WLSPPMI", "SGNS", "LDA"]
dims = [8]
classifiers = ["NB", "SVM"]
seeds = [3]

[dataset]
name = "synthetic"
source = "synthetic"
min_count = 2

[wlsppmi]
base_dim = 12
high_min_count = 5

[lda]
iterations = 10
infer_iterations = 5

[sgns]
epochs = 1

[classifier]
svm_epochs = 10

[synthetic]
categories = 3
train_per_category = 40
test_per_category = 15
doc_len = 30
shared_words = 80
topical_words = 20
rare_words = 30
"#;

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = wlsppmi(&["cooc", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn missing_dataset_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(
        &cfg,
        "[dataset]\nsource = \"newsgroups\"\ntrain = \"absent/train\"\ntest = \"absent/test\"\n",
    )
    .unwrap();
    let out = wlsppmi(&["experiment", "--config", "c.cfg"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("absent/train"), "{err}");
}

#[test]
fn bad_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.cfg"), "[cooc]\nwindw = 3\n").unwrap();
    let out = wlsppmi(&["experiment", "--config", "c.cfg"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("windw"));
}

#[test]
fn experiment_is_reproducible_and_cache_neutral() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    ok(&wlsppmi(
        &["experiment", "--config", "small.cfg"],
        dir.path(),
    ));
    let report = dir.path().join("out/report.csv");
    let first = std::fs::read_to_string(&report).unwrap();
    assert_eq!(first.lines().count(), 1 + 4 * 2);
    assert!(!first.contains("error:"), "{first}");
    ok(&wlsppmi(
        &["experiment", "--config", "small.cfg"],
        dir.path(),
    ));
    assert_eq!(first, std::fs::read_to_string(&report).unwrap());
    ok(&wlsppmi(
        &[
            "experiment",
            "--config",
            "small.cfg",
            "--no-cache",
            "--output",
            "cold.csv",
        ],
        dir.path(),
    ));
    assert_eq!(
        first,
        std::fs::read_to_string(dir.path().join("cold.csv")).unwrap()
    );
}

#[test]
fn flag_overrides_reshape_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    ok(&wlsppmi(
        &[
            "experiment",
            "--config",
            "small.cfg",
            "--models",
            "SPPMI",
            "--dims",
            "4,6",
            "--classifiers",
            "KNN",
            "--output",
            "o.csv",
        ],
        dir.path(),
    ));
    let text = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    let dims: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(dims, ["4", "6"]);
}

#[test]
fn stage_by_stage_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("small.cfg"), SMALL).unwrap();
    let run = |args: &[&str]| {
        let mut full = vec!["--config", "small.cfg"];
        full.extend_from_slice(args);
        let out = wlsppmi(&full, d);
        ok(&out);
        out
    };
    run(&[
        "ingest",
        "--split",
        "train",
        "--out",
        "train.tok",
        "--vocab-out",
        "vocab.tsv",
    ]);
    run(&["ingest", "--split", "test", "--out", "test.tok"]);
    let cv = ["--corpus", "train.tok", "--vocab", "vocab.tsv"];
    run(&[&["cooc"][..], &cv, &["--out", "counts.mtx"]].concat());
    run(&[
        "assoc",
        "--counts",
        "counts.mtx",
        "--kind",
        "sppmi",
        "--out",
        "sppmi.mtx",
    ]);
    run(&[
        "assoc",
        "--counts",
        "counts.mtx",
        "--kind",
        "pmi",
        "--out",
        "pmi.mtx",
    ]);
    run(&[
        "assoc",
        "--counts",
        "counts.mtx",
        "--kind",
        "wlsppmi",
        "--out",
        "base.mtx",
    ]);
    run(&[
        &["reweight", "--matrix", "base.mtx"][..],
        &cv,
        &["--out", "wl.mtx", "--pairs-out", "pairs.tsv"],
    ]
    .concat());
    run(&[
        "svd",
        "--matrix",
        "wl.mtx",
        "--vocab",
        "vocab.tsv",
        "--dim",
        "8",
        "--out",
        "wl.vec",
    ]);
    run(&[&["sgns"][..], &cv, &["--dim", "8", "--out", "sgns.vec"]].concat());
    for (emb, tag) in [("wl.vec", "wl"), ("sgns.vec", "sgns")] {
        run(&[
            "docvec",
            "--corpus",
            "train.tok",
            "--vocab",
            "vocab.tsv",
            "--embeddings",
            emb,
            "--out",
            &format!("{tag}-train.csv"),
        ]);
        run(&[
            "docvec",
            "--corpus",
            "test.tok",
            "--vocab",
            "vocab.tsv",
            "--embeddings",
            emb,
            "--out",
            &format!("{tag}-test.csv"),
        ]);
    }
    run(&[
        &["lda"][..],
        &cv,
        &[
            "--topics",
            "4",
            "--phi-out",
            "phi.csv",
            "--theta-out",
            "theta.csv",
            "--features-out",
            "lda-train.csv",
            "--test-corpus",
            "test.tok",
            "--test-features-out",
            "lda-test.csv",
        ],
    ]
    .concat());
    for tag in ["wl", "sgns", "lda"] {
        let out = run(&[
            "classify",
            "--train",
            &format!("{tag}-train.csv"),
            "--test",
            &format!("{tag}-test.csv"),
            "--classifier",
            "NB",
            "--classifier",
            "KNN",
            "--report",
            &format!("{tag}-report.csv"),
        ]);
        assert!(String::from_utf8_lossy(&out.stdout).contains("KNN: accuracy"));
        let report = std::fs::read_to_string(d.join(format!("{tag}-report.csv"))).unwrap();
        assert_eq!(report.lines().count(), 3);
    }
    let vocab_lines = std::fs::read_to_string(d.join("vocab.tsv"))
        .unwrap()
        .lines()
        .count();
    let w2v = std::fs::read_to_string(d.join("wl.vec")).unwrap();
    assert_eq!(w2v.lines().next().unwrap(), format!("{vocab_lines} 8"));
    let phi = std::fs::read_to_string(d.join("phi.csv")).unwrap();
    assert!(phi.starts_with("word,topic0,topic1,topic2,topic3"));
}

#[test]
fn stage_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = wlsppmi(
        &[
            "cooc", "--corpus", "nope.tok", "--vocab", "nope.tsv", "--out", "x",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.tok"));
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = wlsppmi(&["selftest"], dir.path());
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS")).count(),
        9,
        "{text}"
    );
}
