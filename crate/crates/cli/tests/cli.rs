use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn renormgeo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renormgeo"))
        .args(args)
        .env_remove("RENORMGEO_THREADS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn catalog_lists_every_family() {
    let v = json_of(&renormgeo(&["catalog", "list"]));
    let names: Vec<&str> = v["builtins"].as_array().unwrap().iter().map(|b| b["name"].as_str().unwrap()).collect();
    for n in [
        "geodesic_hemisphere",
        "perturbed_hemisphere",
        "geodesic_hemisphere4",
        "perturbed_profile4",
        "round_sphere",
        "flat_disk",
    ] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
}

#[test]
fn verify_bending_identity_on_hemisphere() {
    let v = json_of(&renormgeo(&["verify", "--theorem", "thm2", "--surface", "builtin:geodesic_hemisphere?a=1"]));
    assert_eq!(v["theorem_id"], "THM2");
    assert!((v["lhs"].as_f64().unwrap() + 2.0 * PI).abs() < 1e-6);
    assert!((v["rhs"].as_f64().unwrap() + 2.0 * PI).abs() < 1e-6);
    assert_eq!(v["pass"], true);
    assert!(v["terms"].is_object());
}

#[test]
fn renormalized_volume_of_hemisphere4() {
    let v = json_of(&renormgeo(&["renorm", "--surface", "builtin:geodesic_hemisphere4", "--quantity", "one"]));
    let fp = v["finite_part"].as_f64().unwrap();
    assert!((fp - 4.0 * PI * PI / 3.0).abs() < 1e-4 * fp, "{fp}");
}

#[test]
fn expand_writes_a_csv_ladder() {
    let out = renormgeo(&["expand", "--surface", "builtin:geodesic_hemisphere", "--rungs", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,value");
    assert_eq!(lines.len(), 4);
    let (eps, value) = lines[1].split_once(',').unwrap();
    let (eps, value): (f64, f64) = (eps.parse().unwrap(), value.parse().unwrap());
    assert!((value - 2.0 * PI * (1.0 / eps - 1.0)).abs() < 1e-9 * value);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"command": "verify", "theorem": "thm2", "surfce": "builtin:geodesic_hemisphere"}"#).unwrap();
    let out = renormgeo(&["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("surfce"));
}

#[test]
fn config_file_supplies_the_run_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command": "renorm", "surface": "builtin:geodesic_hemisphere?a=2", "ladder": {"rungs": 9}}"#,
    )
    .unwrap();
    let v = json_of(&renormgeo(&["--config", path.to_str().unwrap()]));
    assert_eq!(v["fit"]["ladder"].as_array().unwrap().len(), 9);
    assert!((v["finite_part"].as_f64().unwrap() + 2.0 * PI).abs() < 1e-6);
    let v = json_of(&renormgeo(&["--config", path.to_str().unwrap(), "--rungs", "10"]));
    assert_eq!(v["fit"]["ladder"].as_array().unwrap().len(), 10);
}

fn run_to_file(dir: &Path, name: &str, extra: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut args = vec![
        "verify",
        "--theorem",
        "cor1",
        "--surface",
        "builtin:perturbed_hemisphere?a=1&delta=0.1&k=3",
        "--output",
        path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = renormgeo(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(path).unwrap()
}

#[test]
fn reports_are_bit_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = run_to_file(dir.path(), "t1.json", &["--threads", "1"]);
    let two = run_to_file(dir.path(), "t2.json", &["--threads", "2"]);
    let seq = run_to_file(dir.path(), "seq.json", &["--sequential"]);
    assert_eq!(one, two);
    assert_eq!(one, seq);
}

#[test]
fn suite_subset_passes_and_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    let out = renormgeo(&["suite", "--only", "1,4,11", "--output", path.to_str().unwrap()]);
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{table}");
    assert!(table.lines().any(|l| l.starts_with("PASS  C4")));
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| [1, 4, 11].contains(&r["criterion"].as_u64().unwrap())));
    assert!(rows.len() >= 6);
}

#[test]
fn suite_rejects_unknown_criteria() {
    let out = renormgeo(&["suite", "--only", "12"]);
    assert_eq!(out.status.code(), Some(2));
}
