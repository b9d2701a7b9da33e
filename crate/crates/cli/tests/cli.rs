use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nodal-transport"))
}

fn run(args: &[&str], out: &Path) -> std::process::Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

#[test]
fn unknown_subcommand_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["no-such-thing"], &dir.path().join("o"));
    assert!(!o.status.success());
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_config_is_one_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"d": 2, "bogus": 1}"#).unwrap();
    let out = dir.path().join("o");
    let o = run(&["verify-grid", "--config", cfg.to_str().unwrap()], &out);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("bogus"));
    assert!(!out.exists());
}

#[test]
fn invalid_value_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(
        &["verify-grid", "--n", "16", "--samples", "1", "--p", "0.5"],
        &out,
    );
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 16, "samples": 4, "seed": 7}"#).unwrap();
    let out = dir.path().join("o");
    let o = run(
        &["verify-grid", "--config", cfg.to_str().unwrap(), "--samples", "2"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("2,16,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["samples"], 2);
    assert_eq!(manifest["input_digests"].as_array().unwrap().len(), 1);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify-grid", "--n", "32", "--samples", "3", "--seed", "11"];
    let a = run(&args, &dir.path().join("a"));
    let b = run(&args, &dir.path().join("b"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let ra = std::fs::read(dir.path().join("a/results.csv")).unwrap();
    let rb = std::fs::read(dir.path().join("b/results.csv")).unwrap();
    assert_eq!(ra, rb);
}

#[test]
fn designs_on_nauru() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(
        &[
            "designs",
            "--graph",
            "nauru",
            "--mode",
            "exhaustive",
            "--size",
            "6",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["examined"], "134596");
    assert_eq!(summary["best_eigenfunctions"], 13);
    let certs: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("certificates.json")).unwrap()).unwrap();
    let found = certs
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["subset"] == serde_json::json!([7, 10, 14, 17, 21, 24]));
    assert!(found);
}

#[test]
fn graph_flow_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(
        &["graph", "--graph", "path:4", "--subset", "1", "--dump-flow"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // Centred indicator of an end vertex: 3/4 at vertex 1, -1/4 elsewhere.
    // Flow over edge i carries (4 - i)/4, total 3/4 + 2/4 + 1/4.
    assert!((summary["w1"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(summary["boundary"], 1);
    assert!(out.join("flow.json").exists());
}

#[test]
fn edge_list_file_is_digested() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    std::fs::write(&g, "# triangle\n1 2\n2 3\n3 1\n").unwrap();
    let out = dir.path().join("o");
    let o = run(&["graph", "--graph", g.to_str().unwrap(), "--subset", "1"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["input_digests"].as_array().unwrap().len(), 1);
}
