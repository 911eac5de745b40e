use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tiler::graph::families;
use tiler::graph::io::graph_to_json;

fn tiler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tiler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tile_writes_an_enveloped_report() {
    let o = tiler(&["tile", "--family", "chorded-square"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "tiler-tiling/1");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["source"]["family"], "chorded-square");
    assert_eq!(v["data"]["audit"]["pass"], true);
    assert_eq!(v["data"]["rects"].as_array().unwrap().len(), 5);
}

#[test]
fn every_artifact_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("t.json");
    let svg = dir.path().join("t.svg");
    let profile = dir.path().join("p.json");
    let o = tiler(&[
        "tile", "--family", "perturbed-tree", "--depth", "5", "--family-seed", "4",
        "--out", path(&report), "--render", path(&svg), "--profile", path(&profile),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = dir.path().join("w.csv");
    let o = tiler(&[
        "walk", "--family", "binary-tree", "--depth", "6", "--trials", "2000",
        "--tolerance", "tv=1", "--format", "csv", "--out", path(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("# {"));
    for f in [&report, &svg, &profile, &csv] {
        let o = tiler(&["reproduce", path(f)]);
        assert_eq!(code(&o), 0, "{}: {}", f.display(), stderr(&o));
    }
}

#[test]
fn edited_report_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("t.json");
    assert_eq!(code(&tiler(&["tile", "--family", "triangle", "--out", path(&report)])), 0);
    let text = std::fs::read_to_string(&report).unwrap();
    let edited = text.replacen("\"pass\": true", "\"pass\": false", 1);
    assert_ne!(text, edited);
    std::fs::write(&report, edited).unwrap();
    let o = tiler(&["reproduce", path(&report)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("first difference"));
}

#[test]
fn unreadable_reports_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("t.json");
    assert_eq!(code(&tiler(&["tile", "--family", "path", "--out", path(&report)])), 0);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();

    v["version"] = "0.0.0-other".into();
    std::fs::write(&report, v.to_string()).unwrap();
    let o = tiler(&["reproduce", path(&report)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("0.0.0-other"));

    v["version"] = env!("CARGO_PKG_VERSION").into();
    v["schema"] = "tiler-tiling/9".into();
    std::fs::write(&report, v.to_string()).unwrap();
    let o = tiler(&["reproduce", path(&report)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unsupported schema"));

    v["schema"] = "tiler-tiling/1".into();
    v.as_object_mut().unwrap().remove("config");
    std::fs::write(&report, v.to_string()).unwrap();
    let o = tiler(&["reproduce", path(&report)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("config"));
}

#[test]
fn graph_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.json");
    std::fs::write(&input, graph_to_json(&families::chorded_square::<f64>())).unwrap();
    let o = tiler(&["tile", "--input", path(&input)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a: Value = serde_json::from_slice(&o.stdout).unwrap();
    let b: Value =
        serde_json::from_slice(&tiler(&["tile", "--family", "chorded-square"]).stdout).unwrap();
    assert_eq!(a["data"]["rects"], b["data"]["rects"]);
}

#[test]
fn corrupt_input_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("g.json");
    let text = graph_to_json(&families::path::<f64>());
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["edges"][0]["conductance"] = Value::from(-1.0);
    std::fs::write(&input, v.to_string()).unwrap();
    let o = tiler(&["tile", "--input", path(&input)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("conductance"), "{}", stderr(&o));

    std::fs::write(&input, "{ not json").unwrap();
    assert_eq!(code(&tiler(&["tile", "--input", path(&input)])), 1);
    assert_eq!(code(&tiler(&["tile", "--input", "/nonexistent/g.json"])), 1);
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(code(&tiler(&["tile"])), 1);
    assert_eq!(code(&tiler(&["tile", "--family", "moebius"])), 1);
    assert_eq!(code(&tiler(&["frobnicate"])), 1);
    let o = tiler(&["tile", "--family", "path", "--tolerance", "audit=-1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("audit"));
    let o = tiler(&["tile", "--family", "path", "--tolerance", "colour=1"]);
    assert_eq!(code(&o), 1);
    let o = tiler(&["boundary", "--family", "binary-tree", "--depth", "4"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("arc"));
    let o = tiler(&["walk", "--family", "binary-tree", "--trials", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("trials"));
    assert_eq!(code(&tiler(&["--help"])), 0);
}

#[test]
fn failed_audit_exits_two() {
    // A tolerance below rounding noise cannot be met by the float pipeline.
    let o = tiler(&[
        "tile", "--family", "hyperbolic", "--depth", "3", "--tolerance", "audit=1e-300",
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["data"]["audit"]["pass"], false);
}

#[test]
fn boundary_reports_probe_values() {
    let o = tiler(&[
        "boundary", "--family", "binary-tree", "--depth", "8", "--arc", "0,0.25", "--arc", "0.5,0.75",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "tiler-sharp/1");
    let root = v["data"]["probes"][0]["value"].as_f64().unwrap();
    assert!((root - 0.5).abs() < 1e-3, "{root}");
}

#[test]
fn render_emits_svg_with_metadata() {
    let o = tiler(&["render", "--family", "triangle", "--width", "200", "--height", "100"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("<metadata>"));
    assert!(text.contains("tiler-tiling/1"));
}
