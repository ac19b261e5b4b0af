use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plate-spectra"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PLATE_SPECTRA_THREADS")
        .output()
        .unwrap()
}

#[test]
fn spectrum_writes_table_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spectrum"], dir.path());
    assert!(o.status.success());
    let table = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[1].starts_with("1,9.600"));
    let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("spectrum_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["j0"], 10);
    assert_eq!(meta["torsional_first_threshold"], 2734);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--sigma", "0.6"], dir.path()).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ nope").unwrap();
    let o = run(&["eigs", "--weight", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("malformed JSON"));

    let heavy = dir.path().join("heavy.json");
    std::fs::write(&heavy, r#"{"variant":"x_bands","parameters":{"intervals":[{"lo":0.0,"hi":3.0}],"inside":1.5,"outside":0.5},"alpha":0.5,"beta":1.5}"#).unwrap();
    let o = run(&["eigs", "--weight", heavy.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mass error"));

    let o = run(&["optimize", "--max-iters", "0", "--grid", "121", "11", "min-mu", "1"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(dir.path().join("trace.jsonl").exists());
}

#[test]
fn eigs_with_preset_weight() {
    let dir = tempfile::tempdir().unwrap();
    let w = dir.path().join("w.json");
    std::fs::write(&w, r#"{"variant":"preset","parameters":{"name":"breve"}}"#).unwrap();
    let o = run(&["eigs", "--weight", w.to_str().unwrap(), "--eigenfunctions", "1", "--grid", "61", "11"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("eigs.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("1,odd,1.75")));
    let m = std::fs::read_to_string(dir.path().join("eigenfunction_odd_1.csv")).unwrap();
    assert_eq!(m.lines().count(), 10);
    assert_eq!(m.lines().next().unwrap().split(',').count(), 60);
}

#[test]
fn optimize_writes_trace_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["optimize", "min-mu", "5", "--sin4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    for (i, line) in trace.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["index"], i);
        assert!(v["eigenvalue"].is_f64());
        assert!(v["weight"]["variant"].is_string());
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("optimize_summary.json")).unwrap()).unwrap();
    assert!((summary["sin4"]["t_j"].as_f64().unwrap() - 0.25).abs() < 1e-3);
}
