use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use skewlat::algebra::rectangular;
use skewlat::enumerate::{nc5, Nc5Variant};
use skewlat::{AlgebraFile, SkewLattice};

fn skewlat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewlat"))
        .args(args)
        .env_remove("SKEWLAT_CACHE_DIR")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_algebra(dir: &Path, name: &str, s: &SkewLattice) -> String {
    let path = dir.join(name);
    fs::write(&path, AlgebraFile::from_algebra(s).to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn verdict<'a>(report: &'a Value, name: &str) -> &'a Value {
    report.get(name).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_algebra(dir.path(), "good.json", &rectangular(2, 2).unwrap());
    let out = skewlat(&["validate", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["valid"], true);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"n":2,"meet":[[1,0],[0,1]],"join":[[0,1],[1,1]]}"#).unwrap();
    let out = skewlat(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["valid"], false);

    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "not json").unwrap();
    assert_eq!(skewlat(&["validate", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(skewlat(&["validate", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(skewlat(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn enumerate_order_two() {
    let out = skewlat(&["enumerate", "--order", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 3);
    assert_eq!(v["algebras"].as_array().unwrap().len(), 3);
    let oracle = json(&skewlat(&["enumerate", "--order", "2", "--oracle"]));
    assert_eq!(oracle["count"], 3);
}

#[test]
fn enumerate_saves_and_verify_reads_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("order3");
    let out = skewlat(&["enumerate", "--order", "3", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(target.join("index.json").is_file());
    let out = skewlat(&["verify", "--catalog", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json(&out);
    assert!(reports.to_string().contains("concordant"));
}

#[test]
fn cache_dir_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_skewlat"))
            .args(["enumerate", "--order", "3"])
            .env("SKEWLAT_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert!(dir.path().join("order3-pruned").join("index.json").is_file());
    assert_eq!(run().stdout, first.stdout);
}

#[test]
fn classify_nc5() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_algebra(dir.path(), "nc5.json", &nc5(Nc5Variant::RightHanded));
    let out = skewlat(&["classify", &path]);
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(verdict(&report, "simply-cancellative")["holds"], false);
    assert_eq!(verdict(&report, "quasi-distributive")["holds"], true);
    assert_eq!(verdict(&report, "right-handed")["holds"], true);

    let asserted = skewlat(&["classify", &path, "--predicates", "simply-cancellative", "--assert"]);
    assert_eq!(asserted.status.code(), Some(1));
    let unknown = skewlat(&["classify", &path, "--predicates", "no-such-law"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn verify_reports_cancellation_counterexample() {
    let out = skewlat(&["verify", "--order", "5", "--theorems", "cancellation"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("order5-0002") && stderr.contains("order5-0003"), "{stderr}");
    let ok = skewlat(&["verify", "--order", "4"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn export_formats() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_algebra(dir.path(), "rect.json", &rectangular(2, 2).unwrap());
    let dot = String::from_utf8(skewlat(&["export", &path, "--format", "dot"]).stdout).unwrap();
    assert!(dot.starts_with("digraph") || dot.starts_with("graph"));
    assert_eq!(dot.matches("subgraph cluster").count(), 1);

    let out = skewlat(&["export", &path, "--format", "json"]);
    let back: AlgebraFile = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(back.to_algebra().unwrap(), rectangular(2, 2).unwrap());
}

#[test]
fn structure_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_algebra(dir.path(), "nc5.json", &nc5(Nc5Variant::LeftHanded));
    for cmd in ["greens", "cosets", "decompose"] {
        let out = skewlat(&[cmd, &path]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        json(&out);
    }
}

#[test]
fn matrix_command() {
    let out = skewlat(&["matrix", "--p", "3", "--construction", "right"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["lattice"]["p"], 3);
    assert_eq!(v["lattice"]["matrices"].as_array().unwrap().len(), 2);
    assert_eq!(v["coset_criteria"]["verdict"], "concordant");
    let wide = skewlat(&["matrix", "--p", "5", "--construction", "left", "--blocks", "1,2,1"]);
    assert!(wide.status.success(), "{}", String::from_utf8_lossy(&wide.stderr));
    assert_eq!(json(&wide)["lattice"]["blocks"], serde_json::json!([1, 2, 1]));
    assert_eq!(skewlat(&["matrix", "--p", "3", "--construction", "left", "--blocks", "1,1"]).status.code(), Some(2));
    assert_eq!(skewlat(&["matrix", "--p", "4", "--construction", "left"]).status.code(), Some(2));
    assert_eq!(skewlat(&["matrix", "--p", "2", "--construction", "left"]).status.code(), Some(2));
}
