use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_fakescope"));
    c.env_remove("GEN_API_KEY");
    c
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/reviews.jsonl")
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(out).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn infer_before_calibrate_names_the_missing_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["infer"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("fakescope calibrate"),
        "{}",
        stderr(&out)
    );

    let out = run(dir.path(), &["train"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("fakescope generate"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"sweep": [0.9, 0.5]}"#).unwrap();
    let out = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("ingest")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let ok = bin().arg("--help").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"id\": \"x\"}\n").unwrap();
    let out = run(dir.path(), &["ingest", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn http_backend_without_key_is_a_service_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["ingest", corpus().to_str().unwrap()])
        .status
        .success());
    let out = run(dir.path(), &["--backend", "http", "generate"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("GEN_API_KEY"), "{}", stderr(&out));
}

#[test]
fn stages_record_manifest_lines_and_leave_inputs_alone() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.jsonl");
    std::fs::copy(corpus(), &input).unwrap();
    let before = std::fs::read(&input).unwrap();
    let out_dir = dir.path().join("out");
    for stage in [
        vec!["ingest", input.to_str().unwrap()],
        vec!["generate"],
        vec!["train"],
        vec!["calibrate"],
    ] {
        let o = run(&out_dir, &stage);
        assert!(o.status.success(), "{stage:?}: {}", stderr(&o));
    }
    // Rerunning a stage replaces its lines instead of appending.
    assert!(run(&out_dir, &["calibrate"]).status.success());
    assert_eq!(std::fs::read(&input).unwrap(), before);

    let manifest = std::fs::read_to_string(out_dir.join("run.manifest")).unwrap();
    let names: Vec<&str> = manifest
        .lines()
        .map(|l| l.split('\t').nth(1).unwrap())
        .collect();
    let mut unique = names.clone();
    unique.sort_unstable();
    unique.dedup();
    assert_eq!(unique.len(), names.len(), "{manifest}");
    for artifact in [
        "corpus.jsonl",
        "labeled.jsonl",
        "models/lr.model",
        "models/calibration.json",
    ] {
        let line = manifest
            .lines()
            .find(|l| l.split('\t').nth(1) == Some(artifact))
            .unwrap();
        assert!(
            line.contains("seed=42") && line.contains("version=") && line.contains("inputs="),
            "{line}"
        );
    }
}

#[test]
fn survey_stages_run_on_the_bundled_corpus() {
    let dir = tempfile::tempdir().unwrap();
    for stage in [vec!["ingest", corpus().to_str().unwrap()], vec!["generate"]] {
        assert!(run(dir.path(), &stage).status.success());
    }
    let o = run(dir.path(), &["survey", "build"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let form: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("survey/form.json")).unwrap(),
    )
    .unwrap();
    let mut csv = String::from("respondent_id,question_id,choice\n");
    for r in 0..3 {
        for q in form["questions"].as_array().unwrap() {
            let correct = q["correct"].as_str().unwrap();
            let choice = match (r, correct) {
                (0, "A") => "B",
                (0, _) => "A",
                _ => correct,
            };
            csv.push_str(&format!("u{r},{},{choice}\n", q["id"].as_str().unwrap()));
        }
    }
    let responses = dir.path().join("responses.csv");
    std::fs::write(&responses, csv).unwrap();
    let o = run(
        dir.path(),
        &["survey", "score", responses.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let score: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("reports/survey_score.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(score["respondents"], 3);
    assert_eq!(score["dropped_inattentive"], 1);
    assert_eq!(score["overall_accuracy"], 1.0);
}

#[test]
fn bpe_features_run_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "--features",
            "bpe",
            "--detector",
            "nb",
            "run",
            corpus().to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("models/bpe.merges").is_file());
    assert!(dir.path().join("reports/table4.txt").is_file());
}
