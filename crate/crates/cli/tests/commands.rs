use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nnd_core::io::{write_scores, write_suite, ScoreHeader, SCORES_SCHEMA};
use nnd_core::{NndTest, ScoredCandidate, Side};
use nnd_testkit::{count_planted, planted_suite, PlantedTest};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use tempfile::TempDir;

fn nnd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnd"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn planted(seed: u64, n: usize, model: &str) -> Vec<PlantedTest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    planted_suite(&mut rng, n, model, &["Disfluent", "Off Target"], &[])
}

fn write_suite_file(dir: &Path, tests: &[NndTest]) -> PathBuf {
    let path = dir.join("suite.jsonl");
    write_suite(fs::File::create(&path).unwrap(), None, tests).unwrap();
    path
}

fn write_score_file(
    dir: &Path,
    name: &str,
    step: Option<i64>,
    lines: &[ScoredCandidate],
) -> PathBuf {
    let path = dir.join(name);
    let header = step.map(|s| ScoreHeader {
        schema: SCORES_SCHEMA.into(),
        step: Some(s),
        metadata: Map::new(),
    });
    write_scores(fs::File::create(&path).unwrap(), header.as_ref(), lines).unwrap();
    path
}

fn score_lines(tests: &[PlantedTest]) -> Vec<ScoredCandidate> {
    tests
        .iter()
        .flat_map(|p| [p.high.clone(), p.low.clone()])
        .collect()
}

fn setup(n: usize) -> (TempDir, Vec<PlantedTest>, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let tests = planted(1, n, "m");
    let suite: Vec<NndTest> = tests.iter().map(|p| p.test.clone()).collect();
    let suite_path = write_suite_file(dir.path(), &suite);
    let scores = write_score_file(dir.path(), "scores.jsonl", None, &score_lines(&tests));
    (dir, tests, suite_path, scores)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_on_empty_input_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    fs::write(&input, "").unwrap();
    let out_path = dir.path().join("suite.jsonl");
    let o = nnd(
        dir.path(),
        &[
            "build",
            "--kind",
            "quiz_design",
            "--input",
            p(&input),
            "--out",
            p(&out_path),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("0 tests"));
    assert!(stderr(&o).contains("no tests generated"));
    let text = fs::read_to_string(out_path).unwrap();
    assert_eq!(text.lines().count(), 1, "header only");
}

#[test]
fn build_errors_are_input_errors_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("qd.jsonl");
    fs::write(
        &input,
        "{\"context\": \"c\", \"model_name\": \"m\", \"question\": \"q\", \"label\": \"No Error\"}\n\
         {\"context\": \"c\", \"model_name\": \"n\", \"question\": \"r\", \"label\": \"Typo\"}\n",
    )
    .unwrap();
    let o = nnd(
        dir.path(),
        &[
            "build",
            "--kind",
            "quiz_design",
            "--input",
            p(&input),
            "--out",
            "s.jsonl",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = nnd(
        dir.path(),
        &[
            "build",
            "--kind",
            "generic",
            "--input",
            p(&input),
            "--out",
            "s.jsonl",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--mapping"));
}

#[test]
fn build_json_report_counts_categories() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("qd.jsonl");
    let rows = [
        ("a", "No Error"),
        ("b", "Disfluent"),
        ("c", "Off Target"),
        ("d", "Off Target"),
    ];
    let text: String = rows
        .iter()
        .map(|(q, l)| {
            json!({"context_id": "x", "context": "ctx", "model_name": q, "question": q, "label": l})
                .to_string()
                + "\n"
        })
        .collect();
    fs::write(&input, text).unwrap();
    let o = nnd(
        dir.path(),
        &[
            "--format",
            "json",
            "build",
            "--kind",
            "quiz_design",
            "--input",
            p(&input),
            "--out",
            "s.jsonl",
        ],
    );
    assert!(o.status.success());
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["n_tests"], 3);
    assert_eq!(
        report["per_category"],
        json!({"Disfluent": 1, "Off Target": 2})
    );
}

#[test]
fn check_scores_complete_file_has_full_coverage() {
    let (dir, _, suite, scores) = setup(20);
    let o = nnd(
        dir.path(),
        &["check-scores", "--suite", p(&suite), p(&scores)],
    );
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("model m: coverage 100% (20/20)"));
}

#[test]
fn check_scores_lists_missing_low_side() {
    let (dir, tests, suite, _) = setup(8);
    let mut lines = score_lines(&tests);
    let dropped = lines.remove(7); // low side of the fourth test
    assert_eq!(dropped.side, Side::Low);
    let scores = write_score_file(dir.path(), "partial.jsonl", None, &lines);
    let o = nnd(
        dir.path(),
        &[
            "--format",
            "json",
            "check-scores",
            "--suite",
            p(&suite),
            p(&scores),
        ],
    );
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["models"]["m"]["coverage"], 7.0 / 8.0);
    assert_eq!(r["models"]["m"]["missing"], json!([dropped.test_id]));
}

#[test]
fn check_scores_conflicts_and_malformed_lines_are_hard_failures() {
    let (dir, tests, suite, _) = setup(4);
    let mut lines = score_lines(&tests);
    let mut conflict = lines[0].clone();
    conflict.token_logprobs[0] -= 1.0;
    lines.push(conflict);
    let scores = write_score_file(dir.path(), "conflict.jsonl", None, &lines);
    let mut text = fs::read_to_string(&scores).unwrap();
    text.push_str("{not json\n");
    fs::write(&scores, text).unwrap();

    let o = nnd(
        dir.path(),
        &["check-scores", "--suite", p(&suite), p(&scores)],
    );
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert!(
        out.contains("conflict.jsonl:9:") && out.contains("conflicts with conflict.jsonl:1"),
        "{out}"
    );
    assert!(out.contains("conflict.jsonl:10: malformed JSON"), "{out}");
    assert!(out.ends_with("FAILED\n"));
}

#[test]
fn check_scores_flags_bad_values_and_warns_on_orphans() {
    let (dir, tests, suite, _) = setup(3);
    let mut lines = score_lines(&tests);
    lines[0].token_count += 1;
    lines[1].token_logprobs = vec![];
    lines[1].token_count = 0;
    let mut orphan = lines[2].clone();
    orphan.test_id = "ffffffffffffffff".into();
    lines.push(orphan);
    let scores = write_score_file(dir.path(), "bad.jsonl", None, &lines);
    let o = nnd(
        dir.path(),
        &[
            "--format",
            "json",
            "check-scores",
            "--suite",
            p(&suite),
            p(&scores),
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let reasons: Vec<&str> = r["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["reason"].as_str().unwrap())
        .collect();
    assert!(reasons[0].contains("token_count"), "{reasons:?}");
    assert!(reasons[1].contains("empty token_logprobs"));
    assert_eq!(r["orphans"].as_array().unwrap().len(), 1);
    assert!(stderr(&o).contains("orphan"));
}

#[test]
fn administer_matches_counting_oracle_per_model() {
    let dir = tempfile::tempdir().unwrap();
    let a = planted(3, 120, "model-a");
    // same tests, different planted outcomes
    let b: Vec<PlantedTest> = planted(4, 120, "model-b")
        .into_iter()
        .zip(&a)
        .map(|(mut pb, pa)| {
            pb.test = pa.test.clone();
            pb.high.test_id = pa.test.test_id.clone();
            pb.low.test_id = pa.test.test_id.clone();
            pb
        })
        .collect();
    let suite: Vec<NndTest> = a.iter().map(|t| t.test.clone()).collect();
    let suite_path = write_suite_file(dir.path(), &suite);
    let mut lines = score_lines(&a);
    lines.extend(score_lines(&b));
    let scores = write_score_file(dir.path(), "both.jsonl", None, &lines);

    let o = nnd(
        dir.path(),
        &[
            "--format",
            "json",
            "administer",
            "--suite",
            p(&suite_path),
            p(&scores),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for (r, planted) in results.iter().zip([&a, &b]) {
        let ((passed, total), per) = count_planted(planted);
        assert_eq!(r["n_passed"], passed);
        assert_eq!(r["n_tests"], total);
        for (cat, (p, n)) in per {
            assert_eq!(r["per_category"][&cat]["n_passed"], p);
            assert_eq!(r["per_category"][&cat]["n_tests"], n);
        }
    }
    assert!(doc["provenance"]["config"]["bootstrap"].is_null());

    // table agrees with the JSON at one decimal
    let o = nnd(
        dir.path(),
        &["administer", "--suite", p(&suite_path), p(&scores)],
    );
    let table = stdout(&o);
    for r in results {
        let rate = format!("{:.1}", r["overall_pass_rate"].as_f64().unwrap() * 100.0);
        let row = table
            .lines()
            .find(|l| l.starts_with(r["model_id"].as_str().unwrap()))
            .unwrap();
        assert!(row.contains(&rate), "{row} vs {rate}");
    }
}

#[test]
fn all_high_wins_is_full_marks() {
    let dir = tempfile::tempdir().unwrap();
    let tests = planted(8, 30, "m");
    let suite: Vec<NndTest> = tests.iter().map(|t| t.test.clone()).collect();
    let suite_path = write_suite_file(dir.path(), &suite);
    let lines: Vec<ScoredCandidate> = tests
        .iter()
        .flat_map(|t| {
            let mut h = t.high.clone();
            let mut l = t.low.clone();
            h.token_logprobs = vec![-0.5];
            h.token_count = 1;
            l.token_logprobs = vec![-3.0, -1.0];
            l.token_count = 2;
            [h, l]
        })
        .collect();
    let scores = write_score_file(dir.path(), "s.jsonl", None, &lines);
    let o = nnd(
        dir.path(),
        &["administer", "--suite", p(&suite_path), p(&scores)],
    );
    let table = stdout(&o);
    let row = table.lines().nth(1).unwrap();
    assert_eq!(
        row.split_whitespace().collect::<Vec<_>>(),
        ["m", "30", "100.0", "100.0", "100.0"]
    );
}

#[test]
fn unscored_model_is_reported_unevaluated() {
    let (dir, tests, suite, scores) = setup(5);
    let mut none: Vec<ScoredCandidate> = tests.iter().map(|t| t.high.clone()).collect();
    for s in &mut none {
        s.model_id = "silent".into();
    }
    let partial = write_score_file(dir.path(), "silent.jsonl", None, &none);
    let o = nnd(
        dir.path(),
        &["administer", "--suite", p(&suite), p(&scores), p(&partial)],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("silent  unevaluated"), "{}", stdout(&o));
    assert!(stderr(&o).contains("unevaluated"));
}

#[test]
fn administer_rejects_conflicting_scores() {
    let (dir, tests, suite, scores) = setup(3);
    let mut other = tests[0].high.clone();
    other.token_logprobs = vec![-9.0];
    other.token_count = 1;
    let conflict = write_score_file(dir.path(), "other.jsonl", None, &[other]);
    let o = nnd(
        dir.path(),
        &["administer", "--suite", p(&suite), p(&scores), p(&conflict)],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn seed_from_flag_or_config_enables_intervals() {
    let (dir, _, suite, scores) = setup(40);
    let run = |extra: &[&str]| -> Value {
        let mut args: Vec<&str> = extra.to_vec();
        args.extend([
            "--format",
            "json",
            "administer",
            "--suite",
            p(&suite),
            p(&scores),
        ]);
        let o = nnd(dir.path(), &args);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_slice(&o.stdout).unwrap()
    };
    assert!(run(&[])["results"][0]["ci95"].is_null());
    fs::write(
        dir.path().join("c.toml"),
        "[bootstrap]\nseed = 5\nn_resamples = 100\n",
    )
    .unwrap();
    let from_config = run(&["--config", "c.toml"]);
    assert_eq!(from_config["results"][0]["ci95"]["seed"], 5);
    let from_flag = run(&["--config", "c.toml", "--seed", "6"]);
    assert_eq!(from_flag["results"][0]["ci95"]["seed"], 6);
    assert_eq!(from_flag["results"][0]["ci95"]["n_resamples"], 100);
    assert_eq!(from_flag["provenance"]["config"]["bootstrap"]["seed"], 6);
}

#[test]
fn published_distil_gpt2_category_counts_render() {
    // 711 / 890 / 1,085 tests with 375 / 329 / 499 passes
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut tests = Vec::new();
    let mut lines = Vec::new();
    for (cat, n, passed) in [
        ("Disfluent", 711, 375),
        ("Off Target", 890, 329),
        ("Wrong Context", 1085, 499),
    ] {
        for (i, mut t) in planted_suite(&mut rng, n, "distil-gpt2", &[cat], &[])
            .into_iter()
            .enumerate()
        {
            let id = format!("{}{:012x}", cat[..1].to_lowercase().repeat(4), i);
            t.test.test_id = id.clone();
            let (hi, lo) = if i < passed {
                (-1.0, -2.0)
            } else {
                (-2.0, -1.0)
            };
            for (s, v) in [(&mut t.high, hi), (&mut t.low, lo)] {
                s.test_id = id.clone();
                s.token_logprobs = vec![v];
                s.token_count = 1;
            }
            lines.push(t.high.clone());
            lines.push(t.low.clone());
            tests.push(t.test);
        }
    }
    tests.sort_by(|a, b| a.test_id.cmp(&b.test_id));
    let suite = write_suite_file(dir.path(), &tests);
    let scores = write_score_file(dir.path(), "s.jsonl", None, &lines);
    let o = nnd(
        dir.path(),
        &["administer", "--suite", p(&suite), p(&scores)],
    );
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(
        row.split_whitespace().collect::<Vec<_>>(),
        ["distil-gpt2", "2686", "44.8", "52.7", "37.0", "46.0"]
    );
}

#[test]
fn verify_model_set_mismatch_names_models() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini/golden/results");
    let human = dir.path().join("human.json");
    fs::write(&human, r#"{"alpha": 1, "beta": 2, "delta": 3}"#).unwrap();
    let results: Vec<String> = ["alpha", "beta", "gamma"]
        .iter()
        .map(|m| {
            fixture
                .join(format!("{m}.json"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let mut args = vec!["verify", "--human", p(&human)];
    args.extend(results.iter().map(String::as_str));
    let o = nnd(dir.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("gamma") && err.contains("delta"), "{err}");
}

#[test]
fn verify_metric_equal_to_human_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/mini/golden/results");
    let human = dir.path().join("human.json");
    // the fixture's own overall pass rates
    fs::write(
        &human,
        r#"{"alpha": 0.8888888888888888, "beta": 0.5555555555555556, "gamma": 0.25}"#,
    )
    .unwrap();
    let files: Vec<String> = ["alpha", "beta", "gamma"]
        .iter()
        .map(|m| {
            fixture
                .join(format!("{m}.json"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let mut args = vec!["--format", "json", "verify", "--human", p(&human)];
    args.extend(files.iter().map(String::as_str));
    let o = nnd(dir.path(), &args);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["report"]["rank_tau"], 1.0);
    assert!((r["report"]["gap_r"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

fn checkpoint_lines(tests: &[PlantedTest], pass_first: usize) -> Vec<ScoredCandidate> {
    tests
        .iter()
        .enumerate()
        .flat_map(|(i, t)| {
            let mut h = t.high.clone();
            let mut l = t.low.clone();
            let (hv, lv) = if i < pass_first {
                (-1.0, -2.0)
            } else {
                (-2.0, -1.0)
            };
            h.token_logprobs = vec![hv];
            l.token_logprobs = vec![lv];
            h.token_count = 1;
            l.token_count = 1;
            [h, l]
        })
        .collect()
}

#[test]
fn series_orders_steps_and_skips_headerless_files() {
    let (dir, tests, suite, _) = setup(20);
    let ckpt = dir.path().join("ckpt");
    fs::create_dir(&ckpt).unwrap();
    // later checkpoints planted to prefer low candidates
    write_score_file(&ckpt, "c.jsonl", Some(6000), &checkpoint_lines(&tests, 5));
    write_score_file(&ckpt, "a.jsonl", Some(2000), &checkpoint_lines(&tests, 15));
    write_score_file(&ckpt, "b.jsonl", Some(4000), &checkpoint_lines(&tests, 10));
    write_score_file(
        &ckpt,
        "no_header.jsonl",
        None,
        &checkpoint_lines(&tests, 20),
    );

    let o = nnd(
        dir.path(),
        &[
            "--format",
            "csv",
            "series",
            "--suite",
            p(&suite),
            "--scores-dir",
            p(&ckpt),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("no_header.jsonl: no step in header; skipped"));
    let csv = stdout(&o);
    let rows: Vec<Vec<&str>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let steps: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(steps, ["2000", "4000", "6000"]);
    let overall: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(overall, [0.75, 0.5, 0.25]);

    let o = nnd(
        dir.path(),
        &[
            "--format",
            "json",
            "series",
            "--suite",
            p(&suite),
            "--scores-dir",
            p(&ckpt),
        ],
    );
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["series"]["m"].as_array().unwrap().len(), 3);
    assert_eq!(doc["suite_fingerprint"].as_str().unwrap().len(), 16);

    let o = nnd(
        dir.path(),
        &[
            "--format",
            "svg",
            "series",
            "--suite",
            p(&suite),
            "--scores-dir",
            p(&ckpt),
        ],
    );
    assert!(stdout(&o).starts_with("<svg"));
}

#[test]
fn series_rejects_duplicate_steps() {
    let (dir, tests, suite, _) = setup(4);
    let ckpt = dir.path().join("ckpt");
    fs::create_dir(&ckpt).unwrap();
    write_score_file(&ckpt, "a.jsonl", Some(2000), &checkpoint_lines(&tests, 1));
    write_score_file(&ckpt, "b.jsonl", Some(2000), &checkpoint_lines(&tests, 2));
    let o = nnd(
        dir.path(),
        &["series", "--suite", p(&suite), "--scores-dir", p(&ckpt)],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("step 2000"), "{}", stderr(&o));
}

#[test]
fn unsupported_format_is_an_input_error() {
    let (dir, _, suite, scores) = setup(2);
    let o = nnd(
        dir.path(),
        &[
            "--format",
            "svg",
            "check-scores",
            "--suite",
            p(&suite),
            p(&scores),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}
