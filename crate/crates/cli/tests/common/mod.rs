//! Runs the miniature fixture through every command and collects outputs.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini")
}

pub fn golden_dir() -> PathBuf {
    fixture_dir().join("golden")
}

/// Runs `nnd` from the fixture directory.
pub fn nnd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnd"))
        .current_dir(fixture_dir())
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("nnd runs")
}

pub fn nnd_ok(args: &[&str]) -> Vec<u8> {
    let out = nnd(args);
    assert!(
        out.status.success(),
        "nnd {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// `(relative name, bytes)` for every artifact of the pipeline
/// build, check-scores, administer, verify, report, written under `work`.
pub fn run_pipeline(work: &Path) -> Vec<(String, Vec<u8>)> {
    let suite = work.join("suite.jsonl");
    let results = work.join("results");
    let mut out = Vec::new();

    let build = nnd_ok(&[
        "build",
        "--kind",
        "generic",
        "--input",
        "annotations.jsonl",
        "--mapping",
        "mapping.json",
        "--out",
        path(&suite),
    ]);
    out.push(("build.txt".to_string(), build));
    out.push(("suite.jsonl".to_string(), std::fs::read(&suite).unwrap()));

    let scores = ["scores/alpha_beta.jsonl", "scores/gamma.jsonl"];
    let mut check = vec!["check-scores", "--suite", path(&suite)];
    check.extend(scores);
    out.push(("check.txt".to_string(), nnd_ok(&check)));

    let administer = |format: &str, results_dir: Option<&Path>| {
        let mut args = vec![
            "--config",
            "config.toml",
            "--seed",
            "7",
            "--format",
            format,
            "administer",
            "--suite",
            path(&suite),
        ];
        if let Some(dir) = results_dir {
            args.extend(["--results", path(dir)]);
        }
        args.extend(scores);
        nnd_ok(&args)
    };
    out.push((
        "administer.txt".to_string(),
        administer("table", Some(&results)),
    ));
    for fmt in ["csv", "svg", "json"] {
        out.push((format!("administer.{fmt}"), administer(fmt, None)));
    }

    let mut result_files: Vec<PathBuf> = std::fs::read_dir(&results)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    result_files.sort();
    for f in &result_files {
        let name = f.file_name().unwrap().to_str().unwrap();
        out.push((format!("results/{name}"), std::fs::read(f).unwrap()));
    }
    let result_args: Vec<&str> = result_files.iter().map(|p| path(p)).collect();

    let mut verify = vec!["verify", "--human", "human.json", "--breakdown", "category"];
    verify.extend(&result_args);
    out.push(("verify.txt".to_string(), nnd_ok(&verify)));
    let mut verify_json = vec!["--format", "json", "verify", "--human", "human.json"];
    verify_json.extend(&result_args);
    out.push(("verify.json".to_string(), nnd_ok(&verify_json)));

    let mut report = vec!["report"];
    report.extend(&result_args);
    out.push(("report.txt".to_string(), nnd_ok(&report)));
    out
}

/// Differences between a pipeline run and the checked-in golden files.
pub fn golden_mismatches(artifacts: &[(String, Vec<u8>)]) -> Vec<String> {
    let dir = golden_dir();
    let mut bad = Vec::new();
    for (name, bytes) in artifacts {
        match std::fs::read(dir.join(name)) {
            Ok(expected) if expected == *bytes => {}
            Ok(_) => bad.push(format!("{name} differs")),
            Err(_) => bad.push(format!("{name} missing from golden directory")),
        }
    }
    bad
}

pub fn bless(artifacts: &[(String, Vec<u8>)]) {
    let dir = golden_dir();
    for (name, bytes) in artifacts {
        let path = dir.join(name);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, bytes).unwrap();
    }
}
