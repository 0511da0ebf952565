use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn cdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdiff")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn check_hashes(dir: &Path) -> Vec<String> {
    let m = manifest(dir);
    let mut names = Vec::new();
    for out in m["outputs"].as_array().unwrap() {
        let name = out["file"].as_str().unwrap();
        let body = std::fs::read(dir.join(name)).unwrap();
        assert_eq!(out["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&body)), "{name}");
        assert_eq!(out["bytes"].as_u64().unwrap(), body.len() as u64);
        names.push(name.to_string());
    }
    names
}

#[test]
fn planted_default_and_rerun() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = cdiff(&["planted", "--out", s(dir), "--seed", "5"]);
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stdout).contains("<= bound 4: pass"));
    }
    let names = check_hashes(&a);
    assert_eq!(names, vec!["operator_a.bin", "rank_report.json", "support_mask.json"]);
    for n in &names {
        assert_eq!(std::fs::read(a.join(n)).unwrap(), std::fs::read(b.join(n)).unwrap());
    }
    assert_eq!(manifest(&a)["outputs"], manifest(&b)["outputs"]);
    assert_eq!(manifest(&a)["config"]["seed"], 5);
}

#[test]
fn planted_boundaries() {
    let tmp = tempfile::tempdir().unwrap();
    let half = write(tmp.path(), "half.toml", "[planted]\nn = 10\nm = 5\n");
    assert!(cdiff(&["planted", "--config", s(&half), "--out", s(&tmp.path().join("h"))]).status.success());
    let zero = write(tmp.path(), "zero.toml", "[planted]\nm = 0\n");
    let out = cdiff(&["planted", "--config", s(&zero), "--out", s(&tmp.path().join("z"))]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("rank 0 <= bound 0: pass"));
    let over = write(tmp.path(), "over.toml", "[planted]\nn = 10\nm = 6\n");
    assert_eq!(cdiff(&["planted", "--config", s(&over), "--out", s(&tmp.path().join("o"))]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_two_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.toml", "[shapes.sphere]\nn = 100\nradius = 0.2\n");
    let out = cdiff(&["shapes", "--config", s(&bad), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("radius"), "{err}");
    assert_eq!(cdiff(&["shapes", "--operator", "nope"]).status.code(), Some(2));
    assert_eq!(cdiff(&["embed", "--out", s(&tmp.path().join("e"))]).status.code(), Some(2));
}

#[test]
fn printed_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let first = cdiff(&["fecg", "--print-config", "--seed", "11", "--operator", "hat"]);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("seed = 11") && text.contains("operator = \"hat\""));
    let p = write(tmp.path(), "echo.toml", &text);
    let second = cdiff(&["fecg", "--print-config", "--config", s(&p)]);
    assert_eq!(String::from_utf8(second.stdout).unwrap(), text);
}

#[test]
fn flat_shapes_flag_degenerate_difference() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.toml", "[shapes.sphere]\nn = 200\nbump_height = 0.0\n");
    let dir = tmp.path().join("out");
    let out = cdiff(&["shapes", "--config", s(&cfg), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names = check_hashes(&dir);
    for f in ["shape_view1.csv", "shape_view2.csv", "shape_mask.json", "eigenvalues.json", "embedding_common.csv", "embedding_difference.json", "bump_energy.csv"] {
        assert!(names.iter().any(|n| n == f), "{f} missing");
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("embedding_difference.json")).unwrap()).unwrap();
    assert_eq!(sidecar["degenerate"], true);
    assert_eq!(sidecar["note"], "degenerate: A ≈ 0");
}

#[test]
fn fecg_external_signals() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "short.toml", "[fecg.signal]\nduration_s = 15.0\n");
    let synth = tmp.path().join("synth");
    let out = cdiff(&["fecg", "--config", s(&cfg), "--out", s(&synth)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(synth.join("evaluation.json").exists());

    let ext = write(
        tmp.path(),
        "ext.toml",
        &format!("[fecg.input]\npath = {:?}\nfs = 250.0\n", s(&synth.join("signals.csv"))),
    );
    let dir = tmp.path().join("ext");
    let out = cdiff(&["fecg", "--config", s(&ext), "--out", s(&dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.join("evaluation.json").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("evaluation skipped"));
    // same samples, same beats
    assert_eq!(std::fs::read(dir.join("beats.json")).unwrap(), std::fs::read(synth.join("beats.json")).unwrap());

    let bad = write(tmp.path(), "bad.csv", "0.1,0.2\n0.3,0.4\n0.5,oops\n");
    let cfg = write(tmp.path(), "badcfg.toml", &format!("[fecg.input]\npath = {:?}\nfs = 250.0\n", s(&bad)));
    let out = cdiff(&["fecg", "--config", s(&cfg), "--out", s(&tmp.path().join("b"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn embed_point_clouds() {
    let tmp = tempfile::tempdir().unwrap();
    let mut a = String::new();
    let mut b = String::new();
    for i in 0..40 {
        let t = i as f64 * 0.157;
        a.push_str(&format!("{},{}\n", t.cos(), t.sin()));
        let bump = if i < 8 { 0.5 } else { 0.0 };
        b.push_str(&format!("{},{}\n", 2.0 * t.cos() + bump, 2.0 * t.sin()));
    }
    let v1 = write(tmp.path(), "a.csv", &a);
    let v2 = write(tmp.path(), "b.csv", &b);
    let cfg = write(tmp.path(), "e.toml", &format!("[embed]\nview1 = {:?}\nview2 = {:?}\n", s(&v1), s(&v2)));
    for op in ["plain", "tilde", "hat"] {
        let dir = tmp.path().join(op);
        let out = cdiff(&["embed", "--config", s(&cfg), "--operator", op, "--out", s(&dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(check_hashes(&dir).len(), 5);
    }
}
