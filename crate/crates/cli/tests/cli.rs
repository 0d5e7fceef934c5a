use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn wqed(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("WQED_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Numeric columns of a CSV written by the tool.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = read_csv(path);
    let k = h.iter().position(|c| c == name).unwrap();
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

fn manifest(dir: &Path, name: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{name}.manifest.json"))).unwrap()).unwrap()
}

#[test]
fn single_atom_exact_power() {
    let d = tempfile::tempdir().unwrap();
    let o = wqed(d.path(), &["power", "--solver", "exact", "--N", "1", "--beta", "0.2", "--tmax", "2", "--steps", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, _) = read_csv(&d.path().join("power.csv"));
    assert_eq!(h, ["t", "P_r", "P_l", "P_total", "Gamma_norm"]);
    let t = column(&d.path().join("power.csv"), "t");
    let p = column(&d.path().join("power.csv"), "P_total");
    for (t, p) in t.iter().zip(&p) {
        assert!((p - 0.2 * (-t).exp()).abs() < 1e-9);
    }
}

#[test]
fn continuum_diff_against_closed_form() {
    let d = tempfile::tempdir().unwrap();
    let o = wqed(d.path(), &["power", "--solver", "continuum", "--B", "10", "--grid", "513", "--tmax", "3", "--steps", "30", "--diff", "closed-form"]);
    assert_eq!(code(&o), 0);
    let m = manifest(d.path(), "power");
    assert!(m["notes"]["diff"]["max_relative"].as_f64().unwrap() <= 5e-3);
}

#[test]
fn symmetric_limit_g2_is_two() {
    let d = tempfile::tempdir().unwrap();
    let o = wqed(d.path(), &["g2", "--configuration", "symmetric-mirror", "--B", "10", "--tmax", "3", "--steps", "6"]);
    assert_eq!(code(&o), 0);
    assert!(column(&d.path().join("g2.csv"), "g2").iter().all(|g| *g == 2.0));
}

#[test]
fn exact_and_hierarchy_g2_agree() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let common = ["g2", "--configuration", "symmetric-mirror", "--N", "6", "--beta", "0.3", "--tmax", "3", "--steps", "12"];
    let mut a = common.to_vec();
    a.extend(["--solver", "exact"]);
    let mut b = common.to_vec();
    b.extend(["--solver", "hierarchy"]);
    assert_eq!(code(&wqed(d1.path(), &a)), 0);
    assert_eq!(code(&wqed(d2.path(), &b)), 0);
    let (ga, gb) = (column(&d1.path().join("g2.csv"), "g2"), column(&d2.path().join("g2.csv"), "g2"));
    let worst = ga.iter().zip(&gb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        vec!["power", "--solver", "mf2", "--N", "100", "--B", "10"],
        vec!["power", "--solver", "exact", "--N", "12", "--B", "1"],
        vec!["power", "--solver", "exact", "--B", "1"],
        vec!["power", "--N", "3"],
        vec!["nonsense"],
        vec!["fig", "9"],
        vec!["g2", "--solver", "closed-form", "--t1", "0.5"],
    ] {
        let o = wqed(d.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failure_exits_4() {
    // with atol resolving the decay, P_r(t1) falls below the normalization threshold
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("tight.toml");
    std::fs::write(&cfg, "[solver]\nrtol = 1e-10\natol = 1e-40\n").unwrap();
    let o = wqed(d.path(), &["g2", "--config", cfg.to_str().unwrap(), "--solver", "exact", "--N", "1", "--beta", "0.2", "--t1", "60"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reruns_are_byte_identical_and_digests_match() {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["power", "--solver", "continuum", "--B", "6", "--grid", "65", "--tmax", "2", "--steps", "10"];
    assert_eq!(code(&wqed(d1.path(), &args)), 0);
    assert_eq!(code(&wqed(d2.path(), &args)), 0);
    let (a, b) = (std::fs::read(d1.path().join("power.csv")).unwrap(), std::fs::read(d2.path().join("power.csv")).unwrap());
    assert_eq!(a, b);
    let m = manifest(d1.path(), "power");
    let outs = m["outputs"].as_array().unwrap();
    assert_eq!(outs.len(), 1);
    assert_eq!(outs[0]["file"], "power.csv");
    assert_eq!(outs[0]["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&a)));
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("sym.toml");
    std::fs::write(
        &cfg,
        "[system]\nconfiguration = \"symmetric-mirror\"\nscaled_od = 20.0\n\n[grid]\nt_max = 2.0\nsteps = 4\n\n[solver]\nname = \"closed-form\"\n",
    )
    .unwrap();
    let o = wqed(d.path(), &["power", "--config", cfg.to_str().unwrap(), "--B", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(d.path(), "power");
    assert_eq!(m["settings"]["scaled_od"], 5.0);
    assert_eq!(m["settings"]["configuration"], "symmetric-mirror");
    let p = column(&d.path().join("power.csv"), "P_total");
    assert!((p[0] - 5.0).abs() < 1e-12);

    std::fs::write(&cfg, "[system]\nunknown_key = 1\n").unwrap();
    assert_eq!(code(&wqed(d.path(), &["power", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn json_output() {
    let d = tempfile::tempdir().unwrap();
    let o = wqed(d.path(), &["energy", "--configuration", "symmetric-mirror", "--B", "20", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&std::fs::read(d.path().join("energy.json")).unwrap()).unwrap();
    assert_eq!(v["columns"][0], "method");
    let e = v["rows"][0][3].as_f64().unwrap();
    assert!((e / 20.0 - 130.16).abs() < 0.01);
}

#[test]
fn sweep_respects_worker_count() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(["sweep", "--over", "B", "--values", "2,4,8", "--tmax", "3", "--steps", "60", "--out"])
        .arg(d.path())
        .env("WQED_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(column(&d.path().join("sweep.csv"), "B"), [2.0, 4.0, 8.0]);
}

#[test]
fn fields_reset_at_special_time() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&wqed(d.path(), &["fields", "--what", "c1", "--B", "10", "--grid", "11"])), 0);
    assert!(column(&d.path().join("fields_c1.csv"), "value").iter().all(|v| *v == 0.0));
}

#[test]
fn figure_manifest_names_figure() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&wqed(d.path(), &["fig", "6", "--steps", "20"])), 0);
    let m = manifest(d.path(), "fig6");
    assert_eq!(m["notes"]["figure"], 6);
    assert_eq!(m["outputs"][0]["file"], "fig6_g2.csv");
}

#[test]
fn verify_exit_status() {
    let d = tempfile::tempdir().unwrap();
    let ok = wqed(d.path(), &["verify", "--criterion", "1"]);
    assert_eq!(code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("criterion  1 PASS"));
    assert_eq!(code(&wqed(d.path(), &["verify", "--criterion", "13"])), 2);
}
