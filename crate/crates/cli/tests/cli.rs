use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn nlbeat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlbeat"))
        .current_dir(dir)
        .env_remove("NLBEAT_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Vec<PathBuf> {
    let out = nlbeat(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| dir.join(l))
        .collect()
}

/// Data rows of a CSV output, skipping provenance lines and the header.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn trace_at_equal_angles_is_anticorrelated() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["trace", "--theta1", "22.5", "--theta2", "22.5", "--n", "2000", "--seed", "4", "--output", "t"],
    );
    assert_eq!(header(&files[0]), "k,phi,d1,d2,product");
    let data = rows(&files[0]);
    assert_eq!(data.len(), 2000);
    for r in &data {
        assert!((r[3] + r[2]).abs() < 1e-12);
    }
    let products: Vec<f64> = data.iter().map(|r| r[4]).collect();
    let (m, se) = mean_and_error(&products);
    assert!(m < 0.0);
    assert!((m + 0.5).abs() < 3.0 * se, "{m} ± {se}");
}

#[test]
fn trace_at_orthogonal_analyzers_averages_to_zero() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["trace", "--theta1", "0", "--theta2", "45", "--n", "20000", "--seed", "5", "--output", "t"],
    );
    let products: Vec<f64> = rows(&files[0]).iter().map(|r| r[4]).collect();
    let (m, se) = mean_and_error(&products);
    assert!(m.abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn zero_samples_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = nlbeat(tmp.path(), &["trace", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn bad_flag_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(nlbeat(tmp.path(), &["scan", "--nope"]).status.code(), Some(1));
    assert_eq!(nlbeat(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn scan_writes_the_expected_columns() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["scan", "--theta2-grid", "0:90:45", "--n", "20000", "--seed", "1", "--output", "s"],
    );
    assert_eq!(header(&files[0]), "theta2_deg,corr_normalized,std_error,n_samples");
    let data = rows(&files[0]);
    assert_eq!(data.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 45.0, 90.0]);
    for (r, want) in data.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((r[1] - want).abs() < 0.05, "{r:?}");
        assert_eq!(r[3], 20000.0);
    }
}

#[test]
fn bell_summary_peaks_at_sixty_degrees() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["bell", "--prep", "psi-minus", "--a", "0", "--b", "30", "--c-grid", "0:90:5", "--seed", "2", "--output", "b"],
    );
    let csv = files.iter().find(|p| p.ends_with("bell.csv")).unwrap();
    assert_eq!(header(csv), "c_deg,F,F_err");
    assert_eq!(rows(csv).len(), 19);
    let summary = files.iter().find(|p| p.ends_with("bell_summary.json")).unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(summary).unwrap()).unwrap();
    assert!((v["max_F"].as_f64().unwrap() - 0.5).abs() < 0.05);
    assert_eq!(v["argmax_c"].as_f64().unwrap(), 60.0);
}

#[test]
fn quantum_phi_plus_matches_cosine() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["quantum", "--state", "phi-plus", "--theta1", "0", "--output", "q"],
    );
    assert_eq!(header(&files[0]), "theta2_deg,c_quantum");
    let data = rows(&files[0]);
    assert!(data.len() > 2);
    for r in data {
        assert!((r[1] - (2.0 * r[0].to_radians()).cos()).abs() < 1e-12);
    }
}

#[test]
fn qkd_ideal_channel_has_zero_qber() {
    let tmp = TempDir::new().unwrap();
    let files = ok(
        tmp.path(),
        &["qkd", "--rounds", "3000", "--decorrelation", "0", "--calibration-samples", "20000", "--seed", "8", "--output", "k"],
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(v["summary"]["qber"].as_f64(), Some(0.0));
    assert_eq!(v["keys"]["alice_hex"], v["keys"]["bob_hex"]);
    assert_eq!(v["rounds"].as_array().unwrap().len(), 3000);
    assert!(v["summary"]["bell_check"]["F"].as_f64().unwrap() > 0.3);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    for args in [
        vec!["scan", "--theta2-grid", "0:90:15", "--n", "5000", "--seed", "3"],
        vec!["bell", "--c-grid", "0:90:30", "--n", "5000", "--seed", "3", "--format", "json"],
        vec!["qkd", "--rounds", "500", "--decorrelation", "0.4", "--calibration-samples", "2000", "--seed", "3"],
    ] {
        let mut a = args.clone();
        a.extend(["--output", "a"]);
        let mut b = args.clone();
        b.extend(["--output", "b"]);
        let fa = ok(tmp.path(), &a);
        let fb = ok(tmp.path(), &b);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{args:?}");
        }
        fs::remove_dir_all(tmp.path().join("a")).unwrap();
        fs::remove_dir_all(tmp.path().join("b")).unwrap();
    }
}

#[test]
fn seed_from_environment() {
    let tmp = TempDir::new().unwrap();
    let run = |dir: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_nlbeat"))
            .current_dir(tmp.path())
            .env("NLBEAT_SEED", "31")
            .args(["trace", "--n", "50", "--output", dir])
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read_to_string(tmp.path().join(dir).join("trace.csv")).unwrap()
    };
    let text = run("e");
    assert!(text.contains("# seed=31"));
    let flag = ok(tmp.path(), &["trace", "--n", "50", "--seed", "31", "--output", "f"]);
    assert_eq!(text, fs::read_to_string(&flag[0]).unwrap());
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("c.json");
    fs::write(&path, r#"{"command":"trace","n":10,"bogus":1}"#).unwrap();
    let out = nlbeat(tmp.path(), &["--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_uses_flag_names() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("c.json");
    fs::write(
        &path,
        r#"{"command":"scan","theta2-grid":"0,45","n":4000,"seed":6}"#,
    )
    .unwrap();
    let from_file = ok(tmp.path(), &["--config", path.to_str().unwrap(), "--output", "a"]);
    let from_flags = ok(
        tmp.path(),
        &["scan", "--theta2-grid", "0,45", "--n", "4000", "--seed", "6", "--output", "b"],
    );
    assert_eq!(
        fs::read(&from_file[0]).unwrap(),
        fs::read(&from_flags[0]).unwrap()
    );
}

#[test]
fn existing_output_needs_force() {
    let tmp = TempDir::new().unwrap();
    let args = ["quantum", "--theta2-grid", "0,30", "--output", "q"];
    ok(tmp.path(), &args);
    let out = nlbeat(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(1));
    let mut forced = args.to_vec();
    forced.push("--force");
    ok(tmp.path(), &forced);
}

#[test]
fn run_stamped_folder_is_stable() {
    let tmp = TempDir::new().unwrap();
    let args = ["quantum", "--theta2-grid", "0,30", "--out-dir", "runs"];
    let first = ok(tmp.path(), &args);
    assert!(first[0].starts_with(tmp.path().join("runs")));
    let name = first[0].parent().unwrap().file_name().unwrap().to_str().unwrap().to_string();
    assert!(name.starts_with("quantum-"));
    let out = nlbeat(tmp.path(), &args);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn replay_from_output_headers() {
    let tmp = TempDir::new().unwrap();
    let csv = ok(
        tmp.path(),
        &["scan", "--prep", "phi-minus", "--theta2-grid", "0:60:30", "--n", "3000", "--seed", "12", "--output", "a"],
    );
    let replay = ok(tmp.path(), &["--config", csv[0].to_str().unwrap(), "--output", "b"]);
    assert_eq!(fs::read(&csv[0]).unwrap(), fs::read(&replay[0]).unwrap());

    let json = ok(
        tmp.path(),
        &["qkd", "--rounds", "200", "--calibration-samples", "1000", "--seed", "12", "--output", "c"],
    );
    let replay = ok(tmp.path(), &["--config", json[0].to_str().unwrap(), "--output", "d"]);
    assert_eq!(fs::read(&json[0]).unwrap(), fs::read(&replay[0]).unwrap());
}

#[test]
fn provenance_header_is_complete() {
    let tmp = TempDir::new().unwrap();
    let files = ok(tmp.path(), &["trace", "--n", "5", "--seed", "1", "--output", "t"]);
    let text = fs::read_to_string(&files[0]).unwrap();
    let lines: Vec<&str> = text.lines().take(5).collect();
    assert!(lines[0].starts_with("# tool=nlbeat version="));
    assert_eq!(lines[1], "# command=trace");
    assert_eq!(lines[2], "# seed=1");
    assert!(lines[3].starts_with("# config_hash=sha256:"));
    assert!(lines[4].starts_with("# config={"));
}
