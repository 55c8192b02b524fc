use std::path::Path;
use std::process::{Command, Output};

fn xlsent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xlsent")).current_dir(dir).args(args).output().expect("spawn xlsent")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn small_world(dir: &Path) {
    let o =
        xlsent(dir, &["synth", "--seed", "7", "--out", ".", "--labeled", "150", "--parallel", "200", "--tagged", "40"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn dicts(dir: &Path) {
    for src in ["aa", "bb"] {
        let o = xlsent(
            dir,
            &[
                "dict",
                "--src",
                &format!("parallel.{src}.txt"),
                "--tgt",
                "parallel.cc.txt",
                "--src-lang",
                src,
                "--tgt-lang",
                "cc",
                "--out",
                &format!("dict.{src}-cc.tsv"),
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn synth_dict_direct_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_world(dir);
    dicts(dir);
    let o = xlsent(dir, &["--config", "plan.direct.toml", "direct", "--out", "pred.tsv", "--report", "report.tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("accuracy"));
    let pred = std::fs::read_to_string(dir.join("pred.tsv")).unwrap();
    assert!(pred.starts_with("0\t"));
    let e = xlsent(dir, &["eval", "--pred", "pred.tsv", "--gold", "cc.test.tsv"]);
    assert_eq!(code(&e), 0);
}

#[test]
fn other_plan_subcommands_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_world(dir);
    dicts(dir);
    for (plan, cmd) in [
        ("plan.lexicon.toml", vec!["baseline-lexicon"]),
        ("plan.projection.toml", vec!["project"]),
        ("plan.ensemble.toml", vec!["ensemble", "--kind", "flat"]),
        ("plan.ensemble.toml", vec!["ensemble"]),
    ] {
        let mut args = vec!["--config", plan, "--threads", "2"];
        args.extend(cmd);
        let o = xlsent(dir, &args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn resource_stages_are_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    small_world(dir);
    dicts(dir);
    let stages: Vec<Vec<&str>> = vec![
        vec![
            "align",
            "--src",
            "parallel.aa.txt",
            "--tgt",
            "parallel.cc.txt",
            "--src-lang",
            "aa",
            "--tgt-lang",
            "cc",
            "--out",
            "t.tsv",
        ],
        vec![
            "codeswitch",
            "--corpus",
            "aa=parallel.aa.txt",
            "--corpus",
            "cc=parallel.cc.txt",
            "--dict",
            "aa:cc=dict.aa-cc.tsv",
            "--out",
            "cs.txt",
        ],
        vec!["embed", "--input", "cs.txt", "--dim", "8", "--epochs", "1", "--out", "emb.txt"],
        vec!["cluster", "--embeddings", "emb.txt", "--k", "5", "--out", "cl.tsv"],
        vec!["train-tagger", "--tagged", "cc.tagged.txt", "--lang", "cc", "--out", "tagger.tsv"],
        vec!["train-nbsvm", "--train", "aa.train.tsv", "--lang", "aa", "--out", "nb.tsv"],
        vec![
            "train-sent",
            "--train",
            "aa.train.tsv",
            "--lang",
            "aa",
            "--embeddings",
            "emb.txt",
            "--clusters",
            "cl.tsv",
            "--out",
            "nn.txt",
        ],
    ];
    for stage in &stages {
        let out = stage[stage.len() - 1];
        let a = xlsent(dir, stage);
        assert_eq!(code(&a), 0, "{stage:?}: {}", String::from_utf8_lossy(&a.stderr));
        let first = std::fs::read(dir.join(out)).unwrap();
        let b = xlsent(dir, stage);
        assert_eq!(code(&b), 0);
        assert_eq!(first, std::fs::read(dir.join(out)).unwrap(), "{stage:?} not reproducible");
    }
}

#[test]
fn usage_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xlsent(tmp.path(), &["dict", "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&xlsent(tmp.path(), &["frobnicate"])), 1);
    assert_eq!(code(&xlsent(tmp.path(), &["direct"])), 1);
    assert_eq!(code(&xlsent(tmp.path(), &["--help"])), 0);
    assert_eq!(code(&xlsent(tmp.path(), &["--version"])), 0);
}

#[test]
fn missing_input_exits_2_naming_path() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xlsent(tmp.path(), &["train-nbsvm", "--train", "nowhere.tsv", "--lang", "aa", "--out", "m.tsv"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nowhere.tsv"));

    small_world(tmp.path());
    // plan references dictionaries that were never induced
    let o = xlsent(tmp.path(), &["--config", "plan.direct.toml", "direct"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dict.aa-cc.tsv"));
}
