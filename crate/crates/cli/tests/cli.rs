use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_critical-ising"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text.lines().rev().find(|l| l.starts_with('{')).expect("json on stderr");
    serde_json::from_str(line).unwrap()
}

fn generate(dir: &Path, name: &str, params: &[&str]) -> String {
    let path = dir.join(format!("{name}.json"));
    let p = path.to_str().unwrap().to_string();
    let mut args = vec!["generate", name];
    args.extend_from_slice(params);
    args.extend_from_slice(&["--out", &p]);
    let o = bin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn generate_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "cycle", &["4"]);
    let report = dir.path().join("report.json");
    let o = bin(&["verify", "--input", &input, "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    let checks = r["checks"].as_array().unwrap();
    assert!(checks.len() >= 10);
    assert!(checks
        .iter()
        .all(|c| c["pass"] == true && c["rel_err"].as_f64().unwrap() <= 1e-9));
}

#[test]
fn text_report_has_one_line_per_check() {
    let o = bin(&["verify", "--generator", "cycle:3", "--format", "text"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("ok")));
}

#[test]
fn tree_maps_flag_adds_checks() {
    let o = bin(&["verify", "--generator", "cycle:3", "--tree-maps"]);
    assert!(o.status.success());
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"classes_cover_disjointly"));
}

#[test]
fn degenerate_cycle_is_rejected() {
    let o = bin(&["generate", "cycle", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "BadParams");
}

#[test]
fn non_isoradial_input_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = generate(dir.path(), "grid", &["3", "3"]);
    let mut g: Value = serde_json::from_str(&std::fs::read_to_string(&input).unwrap()).unwrap();
    // move an interior vertex off its rhombi
    let v = &mut g["vertices"][4];
    v["x"] = (v["x"].as_f64().unwrap() + 0.1).into();
    std::fs::write(&input, g.to_string()).unwrap();
    let o = bin(&["verify", "--input", &input]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "NotIsoradial");
}

#[test]
fn tiny_tolerance_reports_failures() {
    let o = bin(&["verify", "--generator", "grid:3,3", "--tolerance", "1e-17"]);
    assert_eq!(o.status.code(), Some(1));
    let f = stderr_json(&o);
    assert!(!f["failures"].as_array().unwrap().is_empty());
}

#[test]
fn bad_root_s_is_rejected() {
    let o = bin(&["verify", "--generator", "cycle:4", "--root-s", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "BadParams");
}

#[test]
fn export_is_deterministic() {
    for what in ["primal", "dual", "quad", "quadri_tiling", "extended_double", "G0", "G"] {
        let a = bin(&["export", what, "--generator", "grid:3,3"]);
        let b = bin(&["export", what, "--generator", "grid:3,3"]);
        assert!(a.status.success(), "{what}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{what}");
    }
}

#[test]
fn quadri_tiling_of_square_has_sixteen_nodes() {
    let o = bin(&["export", "quadri_tiling", "--generator", "cycle:4", "--format", "json"]);
    assert!(o.status.success());
    let g: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(g["vertices"].as_array().unwrap().len(), 16);
    let dot = bin(&["export", "quadri_tiling", "--generator", "cycle:4"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("tag=")).count(), 16);
}

#[test]
fn extended_double_json_is_tagged() {
    let o = bin(&[
        "export",
        "extended_double",
        "--generator",
        "cycle:3",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let g: Value = serde_json::from_slice(&o.stdout).unwrap();
    let tags: Vec<&str> = g["vertices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["tag"].as_str().unwrap())
        .collect();
    assert_eq!(tags.iter().filter(|t| **t == "root-s").count(), 1);
    assert!(tags.contains(&"white"));
    assert!(tags.contains(&"bullet-black"));
    assert!(tags.contains(&"lozenge-black"));
}

#[test]
fn unknown_target_is_rejected() {
    let o = bin(&["export", "tree", "--generator", "cycle:3"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "UnknownTarget");
}

#[test]
fn missing_source_is_a_usage_error() {
    let o = bin(&["verify"]);
    assert!(!o.status.success());
}
