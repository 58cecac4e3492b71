use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pslab")).args(args).output().expect("run pslab")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pslab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> Vec<u8> {
    fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn simulate_is_deterministic_and_recover_paths_agree() {
    let a = scratch("sim-a");
    let b = scratch("sim-b");
    for dir in [&a, &b] {
        let out = pslab(&["-q", "--out", s(dir), "simulate", "wave-bump-cross"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read(a.join("recording.csv")), read(b.join("recording.csv")));
    assert_eq!(read(a.join("truth/dataset.json")), read(b.join("truth/dataset.json")));

    let ex = scratch("extract");
    let out = pslab(&["-q", "--out", s(&ex), "extract", s(&a.join("recording.csv")), "--scenario", s(&a.join("scenario.json"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let from_rec = scratch("rec-from-recording");
    let from_ds = scratch("rec-from-dataset");
    for (dir, input) in [(&from_rec, a.join("recording.csv")), (&from_ds, ex.join("dataset.json"))] {
        let out = pslab(&["-q", "--out", s(dir), "recover", s(&input), "--scenario", s(&a.join("scenario.json"))]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["potential_estimate.csv", "mask.csv", "history.csv"] {
        assert_eq!(read(from_rec.join(file)), read(from_ds.join(file)), "{file} differs");
    }

    let rep = scratch("report");
    let out = pslab(&["-q", "--out", s(&rep), "report", s(&from_rec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(rep.join("misfit_curve.csv").exists());

    for dir in [a, b, ex, from_rec, from_ds, rep] {
        let _ = fs::remove_dir_all(dir);
    }
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    assert_eq!(pslab(&["-q", "--out", s(&dir), "check", "heat-bump-cross"]).status.code(), Some(0));
    assert_eq!(pslab(&["-q", "--out", s(&dir), "check", "strip-only"]).status.code(), Some(2));
    assert_eq!(pslab(&["-q", "--out", s(&dir), "simulate", "no-such-scenario"]).status.code(), Some(1));
    assert_eq!(pslab(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(pslab(&["-q", "--out", s(&dir), "report", s(&dir)]).status.code(), Some(1));
    let _ = fs::remove_dir_all(dir);
}

#[test]
fn sparsity_command_on_the_analytic_torus() {
    let dir = scratch("sparsity");
    let out = pslab(&["-q", "--out", s(&dir), "sparsity"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&read(dir.join("sparsity.json"))).unwrap();
    assert!(json["report"]["verdict"].is_string());
    let _ = fs::remove_dir_all(dir);
}
