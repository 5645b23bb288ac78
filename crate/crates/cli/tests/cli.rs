//! End-to-end checks of the parent-eval binary: exit codes, output
//! shapes, manifests, and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parent-eval"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn stdout_lines(output: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&output.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).expect("stdout line is JSON"))
        .collect()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

const INSTANCES: &str = r#"{"table":[{"attribute":"name","value":"john doe"},{"attribute":"born","value":"1980"}],"references":["john doe born 1980"],"generation":"john doe was born 1980"}
{"table":[{"attribute":"name","value":"ada lovelace"},{"attribute":"field","value":"mathematics"}],"references":["ada lovelace studied mathematics"],"generation":"ada lovelace wrote about mathematics"}
{"table":[{"attribute":"name","value":"mary shelley"},{"attribute":"book_title","value":"frankenstein"}],"references":["mary shelley wrote a famous novel"],"generation":"mary shelley wrote frankenstein"}
"#;

const PAIRS: &str = r#"{"table":[{"attribute":"name","value":"john doe"},{"attribute":"born","value":"1980"}],"reference":"john doe born 1980"}
{"table":[{"attribute":"name","value":"ada lovelace"}],"reference":"ada lovelace wrote programs"}
{"table":[{"attribute":"name","value":"mary shelley"},{"attribute":"born","value":"1797"}],"reference":"mary shelley born 1797"}
"#;

const JUDGMENTS: &str = r#"{"instance_id":"i0","system_a":"neural","system_b":"template","winner":"a"}
{"instance_id":"i1","system_a":"neural","system_b":"template","winner":"a"}
{"instance_id":"i2","system_a":"neural","system_b":"template","winner":"b"}
{"instance_id":"i3","system_a":"neural","system_b":"template","winner":"a"}
"#;

fn metric_file(scores: &[(&str, &str, f64)]) -> String {
    let mut out = String::new();
    for (system, instance, score) in scores {
        out.push_str(&format!(
            "{{\"instance_id\":\"{instance}\",\"system\":\"{system}\",\"score\":{score}}}\n"
        ));
    }
    out
}

#[test]
fn score_emits_jsonl_rows_a_summary_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let output = bin()
        .args(["score", "--instances"])
        .arg(&instances)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));

    let lines = stdout_lines(&output);
    assert_eq!(lines.len(), 4, "3 instances + summary");
    for (i, line) in lines[..3].iter().enumerate() {
        assert_eq!(line["index"], i);
        for key in ["parent", "e_p", "e_r", "e_r_ref", "e_r_table", "lambda"] {
            let v = line[key].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v), "{key} = {v}");
        }
    }
    assert_eq!(lines[3]["n_instances"], 3);
    assert!(lines[3]["mean_parent"].is_f64());

    let stderr = stderr_of(&output);
    assert!(stderr.contains("mean parent"), "summary table on stderr");
    // A stdout run prints its manifest on stderr.
    assert!(stderr.contains("\"command\": \"score\""));
    assert!(stderr.contains("\"rng\": \"chacha8\""));
}

#[test]
fn score_rejects_out_of_range_lambda_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let output = bin()
        .args(["score", "--lambda", "1.5", "--instances"])
        .arg(&instances)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("--lambda"));
}

#[test]
fn score_reports_a_missing_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let output = bin()
        .args([
            "score",
            "--entailment",
            "cooccurrence:/no/such/model.tsv",
            "--instances",
        ])
        .arg(&instances)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr_of(&output).contains("model.tsv"));
}

#[test]
fn data_errors_carry_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.jsonl",
        "{\"table\":[],\"references\":[\"x\"],\"generation\":\"x\"}\n",
    );
    let output = bin()
        .args(["score", "--instances"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = stderr_of(&output);
    assert!(stderr.contains("bad.jsonl:1:"), "got: {stderr}");
}

#[test]
fn unknown_flags_are_usage_errors() {
    let output = bin().args(["score", "--no-such-flag"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn train_cooc_then_score_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = write(dir.path(), "pairs.jsonl", PAIRS);
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let model = dir.path().join("model.tsv");

    let trained = bin()
        .args(["train-cooc", "--pairs"])
        .arg(&pairs)
        .arg("--out")
        .arg(&model)
        .output()
        .unwrap();
    assert!(trained.status.success(), "stderr: {}", stderr_of(&trained));
    assert!(model.exists());
    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("model.tsv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "train-cooc");
    let digest = manifest["inputs"][pairs.to_str().unwrap()]
        .as_str()
        .unwrap();
    assert_eq!(digest.len(), 64);

    let spec = format!("cooccurrence:{}", model.display());
    let scored = bin()
        .args([
            "score",
            "--entailment",
            &spec,
            "--lambda",
            "0.5",
            "--instances",
        ])
        .arg(&instances)
        .output()
        .unwrap();
    assert!(scored.status.success(), "stderr: {}", stderr_of(&scored));
    assert_eq!(stdout_lines(&scored).len(), 4);
}

#[test]
fn bleu_t_rewards_copied_table_values_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    // Generations copy table values that the references do not mention.
    let corpus = r#"{"table":[{"attribute":"name","value":"jane doe"},{"attribute":"prize","value":"gold medal"}],"references":["jane doe won an award"],"generation":"jane doe won gold medal"}
{"table":[{"attribute":"name","value":"sam roe"},{"attribute":"team","value":"red sox"}],"references":["sam roe played baseball"],"generation":"sam roe played red sox baseball"}
"#;
    let instances = write(dir.path(), "copying.jsonl", corpus);
    let plain = bin()
        .args(["bleu", "--instances"])
        .arg(&instances)
        .output()
        .unwrap();
    let table_aware = bin()
        .args(["bleu-t", "--instances"])
        .arg(&instances)
        .output()
        .unwrap();
    assert!(plain.status.success());
    assert!(table_aware.status.success());
    let plain_score = stdout_lines(&plain)[0]["bleu"].as_f64().unwrap();
    let aware_score = stdout_lines(&table_aware)[0]["bleu"].as_f64().unwrap();
    assert!(
        aware_score > plain_score,
        "bleu-t {aware_score} should beat bleu {plain_score} when generations copy values"
    );
}

#[test]
fn extractive_reports_per_instance_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let generated = write(
        dir.path(),
        "generated.jsonl",
        r#"{"index":0,"pairs":[{"attribute":"name","value":"john doe"},{"attribute":"born","value":"1980"}]}
{"index":1,"pairs":[{"attribute":"name","value":"ada lovelace"}]}
{"index":2,"pairs":[]}
"#,
    );
    let references = write(
        dir.path(),
        "references.jsonl",
        r#"{"index":0,"pairs":[{"attribute":"name","value":"john doe"}]}
{"index":1,"pairs":[{"attribute":"name","value":"ada lovelace"},{"attribute":"field","value":"mathematics"}]}
{"index":2,"pairs":[{"attribute":"name","value":"mary shelley"}]}
"#,
    );
    let output = bin()
        .args(["extractive", "--instances"])
        .arg(&instances)
        .arg("--generated")
        .arg(&generated)
        .arg("--references")
        .arg(&references)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    let lines = stdout_lines(&output);
    assert_eq!(lines.len(), 4);
    for line in &lines[..3] {
        for key in ["cs", "rg", "rg_f"] {
            let v = line[key].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
    assert!(lines[3]["mean_cs"].is_f64());

    // A missing record is a data error, not a silent zero.
    let partial = write(dir.path(), "partial.jsonl", "{\"index\":0,\"pairs\":[]}\n");
    let failed = bin()
        .args(["extractive", "--instances"])
        .arg(&instances)
        .arg("--generated")
        .arg(&partial)
        .arg("--references")
        .arg(&references)
        .output()
        .unwrap();
    assert_eq!(failed.status.code(), Some(2));
    assert!(stderr_of(&failed).contains("no extraction record"));
}

#[test]
fn meta_eval_produces_a_full_report_and_is_reproducible_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let judgments = write(dir.path(), "judgments.jsonl", JUDGMENTS);
    // Score differences are dyadic and chosen so that no resample can
    // aggregate both systems to the same mean, which would leave the
    // correlation undefined.
    let faithful = write(
        dir.path(),
        "faithful.jsonl",
        &metric_file(&[
            ("neural", "i0", 0.75),
            ("template", "i0", 0.25),
            ("neural", "i1", 0.5),
            ("template", "i1", 0.25),
            ("neural", "i2", 0.25),
            ("template", "i2", 0.3125),
            ("neural", "i3", 0.625),
            ("template", "i3", 0.5),
        ]),
    );
    let contrarian = write(
        dir.path(),
        "contrarian.jsonl",
        &metric_file(&[
            ("neural", "i0", 0.25),
            ("template", "i0", 0.75),
            ("neural", "i1", 0.25),
            ("template", "i1", 0.5),
            ("neural", "i2", 0.375),
            ("template", "i2", 0.3125),
            ("neural", "i3", 0.375),
            ("template", "i3", 0.5),
        ]),
    );
    let labels = write(
        dir.path(),
        "labels.jsonl",
        r#"{"instance_id":"i0","entailed":true}
{"instance_id":"i1","entailed":true}
{"instance_id":"i2","entailed":false}
{"instance_id":"i3","entailed":false}
"#,
    );

    let run = |jobs: &str, metrics_order: [&PathBuf; 2]| {
        let mut cmd = bin();
        cmd.args([
            "meta-eval",
            "--jobs",
            jobs,
            "--iterations",
            "200",
            "--seed",
            "7",
        ]);
        cmd.arg("--judgments").arg(&judgments);
        cmd.arg("--metrics").arg(format!(
            "{},{}",
            metrics_order[0].display(),
            metrics_order[1].display()
        ));
        cmd.arg("--labels").arg(&labels);
        cmd.args(["--proportions", "0.5,1.0", "--slice-size", "2"]);
        cmd.output().unwrap()
    };

    let first = run("1", [&faithful, &contrarian]);
    assert!(first.status.success(), "stderr: {}", stderr_of(&first));
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(report["human_scores"]["neural"].is_f64());
    assert!(report["human_scores"]["template"].is_f64());
    for metric in ["faithful", "contrarian"] {
        let entry = &report["metrics"][metric];
        assert!(entry["mean_correlation"].is_f64(), "{metric}");
        assert!(entry["ci_lower"].as_f64().unwrap() <= entry["ci_upper"].as_f64().unwrap());
    }
    assert_eq!(report["significance"].as_array().unwrap().len(), 2);
    assert_eq!(report["mcnemar"].as_array().unwrap().len(), 1);
    assert_eq!(report["slices"].as_array().unwrap().len(), 2);
    let faithful_acc = report["metrics"]["faithful"]["pairwise_accuracy"]
        .as_f64()
        .unwrap();
    let contrarian_acc = report["metrics"]["contrarian"]["pairwise_accuracy"]
        .as_f64()
        .unwrap();
    assert_eq!(faithful_acc, 1.0);
    assert_eq!(contrarian_acc, 0.0);

    // Same seed, more workers, swapped metric order: identical bytes.
    let second = run("4", [&contrarian, &faithful]);
    assert!(second.status.success(), "stderr: {}", stderr_of(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn out_files_get_sibling_manifests_with_input_digests() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let out = dir.path().join("scores.jsonl");
    let output = bin()
        .args(["score", "--instances"])
        .arg(&instances)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", stderr_of(&output));
    assert!(out.exists());

    let manifest_path = dir.path().join("scores.jsonl.manifest.json");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "score");
    assert_eq!(manifest["rng"], "chacha8");
    let digest = manifest["inputs"][instances.to_str().unwrap()]
        .as_str()
        .unwrap();
    assert_eq!(digest.len(), 64);
    assert!(digest.chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(manifest["flags"]["lambda"], "auto");
}

#[test]
fn score_output_is_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let instances = write(dir.path(), "instances.jsonl", INSTANCES);
    let run = |jobs: &str| {
        bin()
            .args(["score", "--jobs", jobs, "--instances"])
            .arg(&instances)
            .output()
            .unwrap()
            .stdout
    };
    let baseline = run("1");
    assert_eq!(baseline, run("1"));
    assert_eq!(baseline, run("4"));
}
