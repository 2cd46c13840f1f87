use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_latentkit"));
    c.env_remove("LATENTKIT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&fs::read(path.as_ref()).unwrap()).unwrap()
}

fn synth(dir: &Path, args: &[&str]) -> (String, String) {
    let out = dir.join("synth");
    let mut all = vec!["synth", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    let o = run(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (out.join("responses.csv").display().to_string(), out.join("codebook.json").display().to_string())
}

fn intake_args(out: &Path) -> Vec<String> {
    [
        "--responses",
        &fixture("intake.csv"),
        "--codebook",
        &fixture("intake_codebook.json"),
        "--dedup-key",
        "respondent",
        "--disqualify",
        "consent=yes",
        "--disqualify",
        "teaches_intro=yes",
        "--out",
        out.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn run_owned(cmd: &str, args: &[String], extra: &[&str]) -> Output {
    bin().arg(cmd).args(args).args(extra).output().unwrap()
}

/// Sorted (name, bytes) for every file in a directory.
fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p: PathBuf = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn zero_factors_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_owned("efa", &intake_args(&out), &["--factors", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = json(out.join("error.json"));
    assert_eq!(err["code"], "CONFIG_ERROR");
    assert_eq!(err["exit_code"], 2);
    assert_eq!(json(out.join("manifest.json"))["status"], "error");
}

#[test]
fn unreadable_input_exits_2_and_bad_data_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = run(&["screen", "--responses", "/nonexistent.csv", "--codebook", &fixture("intake_codebook.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(out.join("error.json"))["code"], "READ_ERROR");

    // every respondent disqualified: the data cannot be analysed
    let out = dir.path().join("b");
    let mut args = intake_args(&out);
    args.extend(["--disqualify".into(), "area=nowhere".into()]);
    let o = run_owned("screen", &args, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let err = json(out.join("error.json"));
    assert_eq!(err["exit_code"], 1);
    assert_eq!(err["stage"], "screen");
}

#[test]
fn ingest_reports_the_sample_flow() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run_owned("ingest", &intake_args(&out), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json(out.join("ingest.json"))["report"];
    assert_eq!(r["received"], 258);
    assert_eq!(r["duplicates"], 4);
    assert_eq!(r["disqualified"], 27);
    assert_eq!(r["retained"], 227);
    let csv = fs::read_to_string(out.join("responses_clean.csv")).unwrap();
    assert!(csv.starts_with("respondent,q01,"));
    assert_eq!(csv.lines().count(), 228);
    assert!(csv.contains("\r\n"));
    let manifest = json(out.join("manifest.json"));
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|f| f["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["ingest.json", "ingest.txt", "responses_clean.csv"]);
}

#[test]
fn small_mds_input_carries_stability_warning() {
    let dir = tempfile::tempdir().unwrap();
    let (resp, cb) = synth(dir.path(), &["--items", "8", "--factors", "2", "--n", "300"]);
    let out = dir.path().join("mds");
    let o = run(&["mds", "--responses", &resp, "--codebook", &cb, "--dims", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(out.join("mds.json"));
    assert!(r["warnings"].as_array().unwrap().iter().any(|w| w == "STABILITY_WARNING"));
    assert_eq!(r["solution"]["stability_warning"], true);
    assert!(fs::read_to_string(out.join("mds.txt")).unwrap().contains("STABILITY_WARNING"));
}

#[test]
fn planted_five_factor_model_is_recovered_by_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (resp, cb) = synth(dir.path(), &["--seed", "11"]);
    let out = dir.path().join("pipe");
    let o = run(&["pipeline", "--responses", &resp, "--codebook", &cb, "--out", out.to_str().unwrap(), "--baseline-trials", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(out.join("report.json"));
    let efa = &report["efa"];
    assert_eq!(efa["m"], 5);
    assert_eq!(efa["m_source"], "kaiser");
    assert_eq!(efa["codebook_agreement"]["matched"], 25);
    assert_eq!(efa["codebook_agreement"]["total"], 25);
    let md = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(md.contains("5 retained"));
    let order: Vec<usize> = ["## Ingestion", "## Item descriptives", "## Exploratory", "## Scale descriptives", "## Construct validity", "## Multidimensional", "## Hierarchical"]
        .iter()
        .map(|h| md.find(h).unwrap_or_else(|| panic!("missing {h}")))
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (resp, cb) = synth(dir.path(), &["--items", "12", "--factors", "3", "--n", "300", "--seed", "5"]);
    let args: Vec<String> =
        ["--responses", &resp, "--codebook", &cb, "--criterion", "F1", "--restarts", "4"].iter().map(|s| s.to_string()).collect();
    let mut listings = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out = dir.path().join(name);
        let o = run_owned("pipeline", &args, &["--out", out.to_str().unwrap(), "--threads", threads, "--seed", "9"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        listings.push(listing(&out));
    }
    assert!(listings[0].len() > 20);
    assert_eq!(listings[0], listings[1]);
    assert_eq!(listings[0], listings[2]);
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (resp, cb) = synth(dir.path(), &["--items", "9", "--factors", "3", "--n", "200"]);
    let go = |name: &str, flag: &str, env: Option<&str>| {
        let out = dir.path().join(name);
        let mut c = bin();
        c.args(["mds", "--responses", &resp, "--codebook", &cb, "--restarts", "3", "--seed", flag, "--out", out.to_str().unwrap()]);
        if let Some(e) = env {
            c.env("LATENTKIT_SEED", e);
        }
        assert!(c.output().unwrap().status.success());
        fs::read(out.join("mds.json")).unwrap()
    };
    let with_env = go("a", "1", Some("7"));
    assert_eq!(with_env, go("b", "7", None));
    assert_ne!(with_env, go("c", "1", None));
}

#[test]
fn pipeline_equals_the_individual_stages() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = intake_args(&dir.path().join("unused"));
    args.truncate(args.len() - 2);
    args.extend(
        ["--group-column", "area", "--criterion", "interactive", "--regress", "conceptual ~ interactive", "--seed", "3", "--restarts", "3"]
            .iter()
            .map(|s| s.to_string()),
    );
    let pipe = dir.path().join("pipe");
    let o = run_owned("pipeline", &args, &["--out", pipe.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pipe_files: std::collections::BTreeMap<String, Vec<u8>> = listing(&pipe).into_iter().collect();
    let report = json(pipe.join("report.json"));
    let mut md = String::from("# latentkit report\n\n");
    for stage in ["ingest", "screen", "efa", "reliability", "validity", "mds", "cluster", "compare", "regress"] {
        let out = dir.path().join(stage);
        let o = run_owned(stage, &args, &["--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{stage}: {}", String::from_utf8_lossy(&o.stderr));
        for (name, bytes) in listing(&out) {
            if name == "manifest.json" {
                continue;
            }
            assert_eq!(pipe_files.get(&name), Some(&bytes), "{stage}/{name} differs from the pipeline copy");
        }
        assert_eq!(report[stage], json(out.join(format!("{stage}.json"))));
        md.push_str(&fs::read_to_string(out.join(format!("{stage}.txt"))).unwrap());
    }
    assert_eq!(fs::read_to_string(pipe.join("report.md")).unwrap(), md);
}

#[test]
fn compare_and_regress_report_expected_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let base = intake_args(&out);
    let o = run_owned("compare", &base, &["--group-column", "area"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let c = json(out.join("compare.json"));
    let scales = c["scales"].as_array().unwrap();
    assert_eq!(scales.len(), 2);
    let groups = c["groups"].as_array().unwrap().len();
    assert_eq!(scales[0]["posthoc_lsd"].as_array().unwrap().len(), groups * (groups - 1) / 2);
    for (l, b) in scales[0]["posthoc_lsd"].as_array().unwrap().iter().zip(scales[0]["posthoc_bonferroni"].as_array().unwrap()) {
        let m = (groups * (groups - 1) / 2) as f64;
        let expect = (l["p_raw"].as_f64().unwrap() * m).min(1.0);
        assert!((b["p_adjusted"].as_f64().unwrap() - expect).abs() < 1e-12);
    }

    let o = run_owned("regress", &base, &["--regress", "conceptual ~ interactive"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(out.join("regress.json"));
    let model = &r["models"][0];
    let beta = model["fit"]["coefficients"][1]["beta"].as_f64().unwrap();
    let r = model["correlations"][0]["test"]["statistic"].as_f64().unwrap();
    assert!((beta - r).abs() < 1e-10, "beta {beta} vs r {r}");

    let o = run_owned("regress", &base, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn configuration_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        serde_json::json!({
            "responses": fixture("intake.csv"),
            "codebook": fixture("intake_codebook.json"),
            "dedup_key": "respondent",
            "disqualify": [{"column": "consent", "allowed": ["yes"]}, {"column": "teaches_intro", "allowed": ["yes"]}],
            "out": out,
        })
        .to_string(),
    )
    .unwrap();
    let o = run(&["ingest", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(out.join("ingest.json"))["report"]["retained"], 227);

    fs::write(&cfg, r#"{"no_such_field": 1}"#).unwrap();
    let o = run(&["ingest", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
