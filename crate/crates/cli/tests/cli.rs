use std::path::Path;
use std::process::{Command, Output};

fn qsoskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsoskit")).args(args).output().expect("run qsoskit")
}

fn ok(args: &[&str]) -> String {
    let out = qsoskit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", &path]);
    ok(&all);
    path
}

fn bounds(json: &str) -> Vec<f64> {
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_array().unwrap().iter().map(|r| r["bound"].as_f64().unwrap()).collect()
}

#[test]
fn gen_is_byte_stable() {
    let a = ok(&["gen", "--family", "ne1_ball", "--n", "5", "--seed", "7"]);
    let b = ok(&["gen", "--family", "ne1_ball", "--n", "5", "--seed", "7"]);
    assert_eq!(a, b);
    let c = ok(&["gen", "--family", "ne1_ball", "--n", "5", "--seed", "8"]);
    assert_ne!(a, c);
}

#[test]
fn gen_records_metadata() {
    let s: serde_json::Value = serde_json::from_str(&ok(&["gen", "--family", "sync", "--n", "6", "--noise", "0", "--seed", "1"])).unwrap();
    assert_eq!(s["meta"]["truth"].as_array().unwrap().len(), 6);
    assert!(!s["meta"]["edges"].as_array().unwrap().is_empty());
    let c: serde_json::Value = serde_json::from_str(&ok(&["gen", "--family", "ne5", "--n", "20", "--clique", "5"])).unwrap();
    assert_eq!(c["meta"]["cliques"].as_array().unwrap().len(), 4);
}

#[test]
fn table1_orders_one_and_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "t1.json", &["--family", "table1"]);
    let b = bounds(&ok(&["solve", &f, "--order", "1..2", "--basis", "mixed", "--format", "json"]));
    assert_eq!(b.len(), 2);
    for x in b {
        assert!((x + 2.82842).abs() < 5e-3, "{x}");
    }
}

#[test]
fn compare_rsos1_and_naive() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "ne1.json", &["--family", "ne1_norm", "--n", "3", "--seed", "4"]);
    let b = bounds(&ok(&["solve", &f, "--compare", "rsos1", "--format", "json"]));
    assert_eq!(b.len(), 2);
    assert!((b[0] - b[1]).abs() <= 1e-5 * (1.0 + b[0].abs()), "{b:?}");
    let b = bounds(&ok(&["solve", &f, "--compare", "naive-realization", "--format", "json"]));
    assert!((b[0] - b[1]).abs() <= 1e-6 * (1.0 + b[0].abs()), "{b:?}");
    let csv = ok(&["solve", &f, "--format", "csv"]);
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("method,order"));
}

#[test]
fn sparse_matches_dense_on_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "ne5.json", &["--family", "ne5", "--n", "6", "--clique", "3", "--seed", "2"]);
    let d = bounds(&ok(&["solve", &f, "--format", "json"]))[0];
    let s = bounds(&ok(&["solve", &f, "--sparse", "--format", "json"]))[0];
    assert!((d - s).abs() <= 1e-5 * (1.0 + d.abs()), "{d} {s}");
}

#[test]
fn extraction_report_on_sync() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "sync.json", &["--family", "sync", "--n", "4", "--noise", "0", "--p", "1", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&ok(&["solve", &f, "--extract", "--format", "json"])).unwrap();
    let e = &v[0]["extraction"];
    assert_eq!(e["tight"], serde_json::Value::Bool(true));
    assert!(e["gauge_error"].as_f64().unwrap() < 1e-4);
    assert!(ok(&["solve", &f, "--extract"]).contains("extraction: rank"));
}

#[test]
fn export_is_stable_and_reimportable() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "t1.json", &["--family", "table1"]);
    let a = ok(&["export", &f, "--order", "1"]);
    let b = ok(&["export", &f, "--order", "1"]);
    assert_eq!(a, b);
    let p = qsoskit::sdp::read_sdpa(&a).unwrap();
    let s = qsoskit::sdp::solve(&p, 1e-8);
    assert!((s.value() + 2.82842).abs() < 5e-3);
    assert_eq!(qsoskit::sdp::write_sdpa(&p, None), qsoskit::sdp::write_sdpa(&qsoskit::sdp::read_sdpa(&qsoskit::sdp::write_sdpa(&p, None)).unwrap(), None));
    let out = qsoskit(&["export", &f, "--compare", "rsos1"]);
    assert_eq!(out.status.code(), Some(1));
    let g = gen(dir.path(), "ne1.json", &["--family", "ne1_ball", "--n", "2"]);
    let r = ok(&["export", &g, "--compare", "rsos1"]);
    assert_eq!(r, ok(&["export", &g, "--compare", "rsos1"]));
    assert!(r.starts_with('"'));
}

#[test]
fn bench_tables() {
    let out = ok(&["bench", "--family", "ne1_ball", "--n", "3", "--trials", "3", "--methods", "qsos,rsos1", "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - cols[4]).abs() <= 1e-5 * (1.0 + cols[2].abs()), "{l}");
    }
    let out = ok(&["bench", "--family", "ne3_ball", "--n", "2", "--trials", "1", "--methods", "qsos,qsos_strengthened", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let (p, s) = (v[0]["opt"].as_f64().unwrap(), v[1]["opt"].as_f64().unwrap());
    assert!(s >= p - 1e-6, "{p} {s}");
    let empty = ok(&["bench", "--family", "ne1_ball", "--n", "3", "--trials", "0", "--format", "csv"]);
    assert_eq!(empty.lines().count(), 1);
    let jobs = ok(&["bench", "--family", "ne1_ball", "--n", "2", "--trials", "2", "--jobs", "2"]);
    assert_eq!(jobs.lines().count(), 3);
}

#[test]
fn failures_emit_error_json() {
    let out = qsoskit(&["gen", "--family", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "instance");

    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), "ne3.json", &["--family", "ne3_ball", "--n", "1"]);
    let out = qsoskit(&["solve", &f, "--order", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "invalid_options");

    let out = qsoskit(&["solve", &f, "--sparse", "--strengthen"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qsoskit(&["solve", "/nonexistent/instance.json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"], "io");
}
