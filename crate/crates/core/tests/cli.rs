use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_orbistrat"));
    c.env_remove("ORBISTRAT_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn length(report: &Value) -> f64 {
    report["existence"]["geodesic"]["length"].as_f64().expect("length present")
}

#[test]
fn examples_list_has_every_model() {
    let out = run(&["examples", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(
        names,
        ["torus2", "pillowcase_p2", "wallpaper_p4", "hexagonal3d_d3", "kleinfour3d"]
    );
}

#[test]
fn examples_emit_is_byte_exact() {
    for name in ["torus2", "pillowcase_p2", "wallpaper_p4", "hexagonal3d_d3", "kleinfour3d"] {
        let out = run(&["examples", "emit", name]);
        assert_eq!(out.status.code(), Some(0));
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("models/{name}.model"));
        assert_eq!(out.stdout, std::fs::read(path).unwrap(), "{name}");
    }
    assert_eq!(run(&["examples", "emit", "nope"]).status.code(), Some(2));
}

#[test]
fn validate_exit_codes() {
    assert_eq!(run(&["validate", "pillowcase_p2"]).status.code(), Some(0));
    let skewed = run(&["validate", &fixture("skewed.model")]);
    assert_eq!(skewed.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&skewed.stderr).contains("orthogonality"));
    assert_eq!(run(&["validate", &fixture("broken.model")]).status.code(), Some(2));
    assert_eq!(run(&["validate", "/nonexistent/dir/x.model"]).status.code(), Some(4));
}

#[test]
fn geodesic_auto_on_torus_is_hyperbolic() {
    let out = run(&["geodesic", "torus2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["existence"]["strategy"], "hyperbolic");
    assert!((length(&r) - 1.0).abs() < 1e-9);
}

#[test]
fn forced_strategies() {
    let out = run(&["geodesic", "pillowcase_p2", "--strategy", "even-isotropy"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["existence"]["strategy"], "even-isotropy");
    assert!((length(&r) - 2.0).abs() < 1e-9);

    let out = run(&["geodesic", "hexagonal3d_d3", "--strategy", "sigma1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["existence"]["strategy"], "sigma1");

    let out = run(&["geodesic", "torus2", "--strategy", "even-isotropy"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn disabled_strategies_fall_through() {
    let out = run(&["geodesic", "kleinfour3d", "--disable", "hyperbolic", "--disable", "sigma1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["existence"]["strategy"], "odd-stratum");
    assert!((length(&r) - 2.0).abs() < 1e-9);

    let out = run(&["geodesic", &fixture("mirror3d.model"), "--disable", "hyperbolic"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["existence"]["strategy"], "closed-component");
}

#[test]
fn open_case_exits_ten() {
    let out = run(&["geodesic", &fixture("p3.model"), "--disable", "hyperbolic"]);
    assert_eq!(out.status.code(), Some(10));
    let r = json(&out);
    assert_eq!(r["existence"]["strategy"], "open-case");
}

#[test]
fn stratify_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["stratify", "wallpaper_p4", "--svg", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    for f in ["report.json", "polylines.csv", "overview.svg"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let on_disk: Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(on_disk["stratification"], json(&out)["stratification"]);
    let csv = std::fs::read_to_string(dir.path().join("polylines.csv")).unwrap();
    assert!(csv.starts_with("component_id,k,x,y\n"));
}

#[test]
fn tolerance_override_from_env() {
    let out = bin()
        .args(["stratify", "torus2"])
        .env("ORBISTRAT_TOL", "1e-7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["model"]["tolerance"].as_f64(), Some(1e-7));
}
