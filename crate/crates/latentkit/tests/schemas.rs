//! The schema documents in docs/schemas must describe what the commands
//! actually write. Top-level keys are compared in both directions.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use latentkit::cli::{self, Cli};
use latentkit::config::PipelineConfig;
use serde_json::Value;

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    serde_json::from_slice(&fs::read(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn check(name: &str, instance: &Value) {
    let s = schema(name);
    assert_eq!(s["$schema"], "https://json-schema.org/draft/2020-12/schema");
    let declared = keys(&s["properties"]);
    let present = keys(instance);
    let required: BTreeSet<String> = s["required"].as_array().map_or_else(BTreeSet::new, |r| r.iter().map(|k| k.as_str().unwrap().to_string()).collect());
    assert!(required.is_subset(&present), "{name}: missing {:?}", required.difference(&present).collect::<Vec<_>>());
    if s["additionalProperties"] == Value::Bool(false) {
        assert!(present.is_subset(&declared), "{name}: undeclared {:?}", present.difference(&declared).collect::<Vec<_>>());
    }
}

fn run(args: &[&str]) {
    let cli = Cli::try_parse_from(std::iter::once("latentkit").chain(args.iter().copied())).unwrap();
    cli::execute(&cli).map_err(|f| f.error.to_string()).unwrap();
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&fs::read(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn reports_match_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let synth: PathBuf = dir.path().join("synth");
    let out = dir.path().join("out");
    run(&["synth", "--out", synth.to_str().unwrap(), "--items", "9", "--factors", "3", "--n", "240"]);
    run(&[
        "pipeline",
        "--responses",
        synth.join("responses.csv").to_str().unwrap(),
        "--codebook",
        synth.join("codebook.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--criterion",
        "F1",
        "--group-column",
        "id",
        "--regress",
        "F1 ~ F2 + F3",
        "--restarts",
        "2",
    ]);
    let report = read(&out, "report.json");
    for stage in ["ingest", "screen", "efa", "reliability", "validity", "mds", "cluster", "compare", "regress"] {
        let v = read(&out, &format!("{stage}.json"));
        check(stage, &v);
        assert_eq!(report[stage], v);
    }
    check("report", &report);
    check("manifest", &read(&out, "manifest.json"));
    check("codebook", &read(&synth, "codebook.json"));
}

#[test]
fn error_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cli = Cli::try_parse_from(["latentkit", "efa", "--factors", "0", "--out", out.to_str().unwrap()]).unwrap();
    assert!(cli::execute(&cli).is_err());
    let err = read(&out, "error.json");
    check("error", &err);
    let s = schema("error");
    let codes: Vec<&str> = s["properties"]["code"]["enum"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(codes.contains(&err["code"].as_str().unwrap()));
}

#[test]
fn configuration_schema_lists_every_field() {
    let c = serde_json::to_value(PipelineConfig::default()).unwrap();
    let s = schema("config");
    assert_eq!(keys(&c), keys(&s["properties"]));
    assert_eq!(keys(&c["mds"]), keys(&s["properties"]["mds"]["properties"]));
}
