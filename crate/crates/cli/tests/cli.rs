use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bifkit::cycle::CycleModelConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bifkit"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--out-dir").arg(dir).args(args).output().unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn lyap_scan_writes_two_hundred_rows_with_gap_notes_and_manifest() {
    let dir = scratch("lyap");
    let out = run(&dir, &["lyap-scan"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "lyap_scan.csv");
    assert!(csv.starts_with("# columns: psi,m1,lc_closed,lc_direct,lc_oracle,lc_partial_incorrect,identity_ok\n"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("# gap")).count(), 2);
    assert_eq!(data_rows(&csv).len(), 200);
    assert!(dir.join("lyap_scan.svg").exists());
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir, "lyap-scan.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "lyap-scan");
    assert_eq!(manifest["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reruns_are_byte_identical() {
    let a = scratch("rerun_a");
    let b = scratch("rerun_b");
    for dir in [&a, &b] {
        assert!(run(dir, &["--threads", "3", "lyap-scan", "--samples", "50"]).status.success());
        assert!(run(dir, &["henon-diagram", "--resolution", "60"]).status.success());
    }
    for name in ["lyap_scan.csv", "lyap_scan.svg", "henon_diagram.csv", "henon_diagram.svg"] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
    }
}

#[test]
fn too_few_samples_is_a_usage_error() {
    let dir = scratch("samples");
    assert_eq!(run(&dir, &["lyap-scan", "--samples", "1"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["henon-diagram", "--m2-range", "1", "-1"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn diagram_svg_labels_marked_points() {
    let dir = scratch("diagram");
    assert!(run(&dir, &["henon-diagram"]).status.success());
    let svg = read(&dir, "henon_diagram.svg");
    for label in ["B++", "B--", "B+-", "C1", "C2"] {
        assert!(svg.contains(&format!(">{label}</text>")), "{label}");
    }
    let csv = read(&dir, "henon_diagram.csv");
    assert_eq!(csv.lines().filter(|l| l.starts_with("marker,")).count(), 5);
}

#[test]
fn henon_circle_refuses_resonant_m1() {
    let dir = scratch("circle_bad");
    let out = run(&dir, &["henon-circle", "--m1", "1.25"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn henon_circle_sweep_has_one_row_per_offset() {
    let dir = scratch("circle");
    let out = run(&dir, &["henon-circle", "--m1", "1.0", "--deltas", "0.01,-0.01", "--burn-in", "200", "--detect-samples", "500"]);
    assert!(out.status.success());
    let csv = read(&dir, "henon_circle.csv");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1.0000000000000000e-2,"));
    assert!(rows[1].starts_with("-1.0000000000000000e-2,"));
}

#[test]
fn nf_lc_preset_prints_all_three_values() {
    let dir = scratch("nf");
    let psi = std::f64::consts::FRAC_PI_3.to_string();
    let out = run(&dir, &["nf-lc", "--preset", "henon", "--psi", &psi]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["direct", "oracle", "partial_incorrect"] {
        assert!(v["values"][key]["lc"].is_f64(), "{key}");
    }
    assert!((v["values"]["direct"]["lc"].as_f64().unwrap() - 0.125).abs() < 1e-12);
    assert_eq!(read(&dir, "nf_lc.json").as_bytes(), &out.stdout[..]);
}

#[test]
fn nf_lc_random_jets_follow_the_seed() {
    let a = scratch("nf_seed_a");
    let b = scratch("nf_seed_b");
    let args = ["nf-lc", "--preset", "henon", "--psi", "1.0", "--random", "3"];
    let x = run(&a, &[&["--seed", "7"][..], &args].concat());
    let y = run(&b, &[&["--seed", "7"][..], &args].concat());
    let z = run(&b, &[&["--seed", "8"][..], &args].concat());
    assert_eq!(x.stdout, y.stdout);
    assert_ne!(x.stdout, z.stdout);
}

#[test]
fn nf_lc_at_resonance_is_a_validation_failure() {
    let dir = scratch("nf_res");
    let psi = std::f64::consts::FRAC_PI_2.to_string();
    assert_eq!(run(&dir, &["nf-lc", "--preset", "henon", "--psi", &psi]).status.code(), Some(3));
}

#[test]
fn nf_lc_reads_jet_files() {
    let dir = scratch("nf_file");
    let path = dir.join("jet.json");
    let psi: f64 = 1.0;
    let jet = bifkit::henon::henon_adapted_jet(psi).unwrap();
    std::fs::write(&path, jet.to_json().to_string()).unwrap();
    let out = run(&dir, &["nf-lc", "--jet", path.to_str().unwrap(), "--psi", "1.0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&path, "{\"degree\": 7}").unwrap();
    assert_eq!(run(&dir, &["nf-lc", "--jet", path.to_str().unwrap(), "--psi", "1.0"]).status.code(), Some(3));
}

#[test]
fn cycle_verify_default_config_writes_convergence_table() {
    let dir = scratch("cycle");
    let out = run(&dir, &["cycle-verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir, "cycle_convergence.csv");
    assert!(csv.contains("i,j,tau,m1,m2,mult_err,det_err,ss_max,lc_sign,circle_verdict\n"));
    let rows = data_rows(&csv);
    assert!(rows[0].starts_with("6,5,13,"));
    assert!(csv.contains("truncated at the precision cap"));
    let report: serde_json::Value = serde_json::from_str(&read(&dir, "cycle_validation.json")).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn cycle_verify_cites_the_failed_tangency_condition() {
    let dir = scratch("cycle_p1");
    let mut cfg = CycleModelConfig::reference();
    cfg.g21 = 0.0;
    let path = dir.join("flat.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let out = run(&dir, &["cycle-verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("P1"));
}

#[test]
fn cycle_verify_rejects_malformed_pairs() {
    let dir = scratch("cycle_pairs");
    assert_eq!(run(&dir, &["cycle-verify", "--ij-sequence", "6:5,x"]).status.code(), Some(2));
    assert_eq!(run(&dir, &["cycle-verify", "--target", "9.0,1.0"]).status.code(), Some(3));
}
