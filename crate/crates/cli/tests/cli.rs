use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use equimap::baseline::reference_bump;
use equimap::flow::{FlowConfig, InitialData};
use equimap::io::{read_profile, read_records, write_json, write_profile};
use equimap::{GridSpec, RadialGrid};
use equimap_cli::manifest;
use serde_json::Value;

fn equimap(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equimap"))
        .args(args)
        .current_dir(dir)
        .env_remove("EQUIMAP_SEED")
        .output()
        .expect("spawn equimap")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const SMALL: [&str; 6] = ["--y-min", "-8", "--y-max", "8", "--n", "513"];

#[test]
fn harmonic_writes_the_profile() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["harmonic", "--m", "1", "--out", "h.csv"];
    args.extend(SMALL);
    assert_eq!(equimap(&args, dir.path()).status.code(), Some(0));
    let (h, meta) = read_profile(&dir.path().join("h.csv")).unwrap();
    assert_eq!(meta.grid, GridSpec { m: 1, y_min: -8.0, y_max: 8.0, n: 513 });
    // r = 1 sits at the middle node: h(1) = (1, 0, 0)
    let mid = h.values()[256];
    assert!((mid[0] - 1.0).abs() < 1e-14 && mid[1].abs() < 1e-14 && mid[2].abs() < 1e-14);

    let mut args = vec!["harmonic", "--m", "1", "--alpha", "3.141592653589793", "--out", "p.csv"];
    args.extend(SMALL);
    assert_eq!(equimap(&args, dir.path()).status.code(), Some(0));
    let (p, _) = read_profile(&dir.path().join("p.csv")).unwrap();
    for (a, b) in h.values().iter().zip(p.values()) {
        assert!((a[0] + b[0]).abs() < 1e-12 && (a[1] + b[1]).abs() < 1e-12 && (a[2] - b[2]).abs() < 1e-12);
    }
}

#[test]
fn missing_m_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = equimap(&["harmonic", "--out", "h.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("h.csv").exists());
}

#[test]
fn project_recovers_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["harmonic", "--m", "2", "--s", "1.7", "--alpha", "-0.4", "--out", "h.csv"];
    args.extend(["--y-min", "-12", "--y-max", "12", "--n", "1025"]);
    assert!(equimap(&args, dir.path()).status.success());
    let out = equimap(&["project", "h.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["s"].as_f64().unwrap() - 1.7).abs() < 1e-6);
    assert!((v["alpha"].as_f64().unwrap() + 0.4).abs() < 1e-6);
    assert_eq!(v["certified"], Value::Bool(true));
}

#[test]
fn project_certifies_a_small_bump_and_rejects_a_large_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = RadialGrid::standard(1).unwrap().shared();
    write_profile(&dir.path().join("b.csv"), &reference_bump(1e-3).build(g.clone(), 0).unwrap(), None).unwrap();
    let out = equimap(&["project", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certified"], Value::Bool(true));

    // a tight gate puts the same profile outside the regime
    let out = equimap(&["project", "b.csv", "--gate", "0.001"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["certified"], Value::Bool(false));
}

#[test]
fn corrupt_profile_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["harmonic", "--m", "1", "--out", "h.csv"];
    args.extend(SMALL);
    assert!(equimap(&args, dir.path()).status.success());
    let p = dir.path().join("h.csv");
    let text = fs::read_to_string(&p).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[10] = "0.5,abc,0,1".into();
    fs::write(&p, lines.join("\n")).unwrap();
    assert_eq!(equimap(&["project", "h.csv"], dir.path()).status.code(), Some(2));
    assert_eq!(equimap(&["project", "missing.csv"], dir.path()).status.code(), Some(2));
}

#[test]
fn gauge_writes_q_and_reports_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let g = RadialGrid::standard(1).unwrap().shared();
    write_profile(&dir.path().join("b.csv"), &reference_bump(1e-3).build(g, 0).unwrap(), None).unwrap();
    let out = equimap(&["gauge", "b.csv", "--out", "q.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (pq, ex) = (v["pi_q_norm2"].as_f64().unwrap(), v["excess"].as_f64().unwrap());
    assert!((pq - ex).abs() <= 1e-4 * ex, "{pq} vs {ex}");
    let header = fs::read_to_string(dir.path().join("q.csv")).unwrap();
    assert!(header.starts_with("r,q_re,q_im,nu_re,nu_im\n"));
}

#[test]
fn spectrum_prints_the_two_lowest_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let out = equimap(&["spectrum", "--k", "2", "--n", "1025"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ev: Vec<f64> = v["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(ev.len(), 2);
    assert!(ev[0].abs() < 1e-6 && ev[1] > 0.9);
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(equimap(&["check", "nope"], dir.path()).status.code(), Some(2));
    let out = equimap(&["check", "spectrum"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], Value::Bool(true));
}

fn small_config(t_end: f64, seed: u64) -> FlowConfig {
    let mut cfg = FlowConfig::new(
        GridSpec { m: 1, y_min: -10.0, y_max: 10.0, n: 513 },
        InitialData::RandomBump { excess: 1e-4 },
        t_end,
        0.01,
    );
    cfg.snapshot_stride = 5;
    cfg.seed = seed;
    cfg
}

#[test]
fn flow_with_zero_time_writes_one_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    write_json(&dir.path().join("c.json"), &small_config(0.0, 1)).unwrap();
    let out = equimap(&["flow", "c.json", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run = dir.path().join("run");
    assert!(run.join("snap_0.csv").exists() && !run.join("snap_1.csv").exists());
    assert_eq!(read_records(&run.join("records.csv")).unwrap().len(), 1);
    manifest::verify(&run).unwrap();
}

#[test]
fn flow_manifest_lists_hashed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_json(&dir.path().join("c.json"), &small_config(0.1, 5)).unwrap();
    assert!(equimap(&["flow", "c.json", "--out", "run"], dir.path()).status.success());
    let run = dir.path().join("run");
    let m = manifest::verify(&run).unwrap();
    assert_eq!(m.seed, 5);
    assert_eq!(m.seed_source, "config");
    let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
    for n in ["snap_0.csv", "snap_2.json", "records.csv", "residual.csv"] {
        assert!(names.contains(&n), "{n} missing from {names:?}");
    }
    // tampering is detected
    fs::write(run.join("records.csv"), "t\n0\n").unwrap();
    assert!(manifest::verify(&run).is_err());
}

#[test]
fn seed_env_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_json(&dir.path().join("c.json"), &small_config(0.0, 1)).unwrap();
    let run = |name: &str, seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_equimap"));
        cmd.args(["flow", "c.json", "--out", name]).current_dir(dir.path()).env_remove("EQUIMAP_SEED");
        if let Some(s) = seed {
            cmd.env("EQUIMAP_SEED", s);
        }
        cmd.output().unwrap()
    };
    assert!(run("a", None).status.success());
    assert!(run("b", Some("77")).status.success());
    assert!(run("c", Some("77")).status.success());
    assert_eq!(run("d", Some("not-a-seed")).status.code(), Some(2));

    let b = manifest::read(&dir.path().join("b")).unwrap();
    assert_eq!((b.seed, b.seed_source.as_str()), (77, "env"));
    let snap = |d: &str| fs::read(dir.path().join(d).join("snap_0.csv")).unwrap();
    assert_eq!(snap("b"), snap("c"));
    assert_ne!(snap("a"), snap("b"));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(0.1, 1);
    cfg.dt = -1.0;
    write_json(&dir.path().join("c.json"), &cfg).unwrap();
    assert_eq!(equimap(&["flow", "c.json", "--out", "run"], dir.path()).status.code(), Some(2));
    fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
    assert_eq!(equimap(&["flow", "bad.json", "--out", "run"], dir.path()).status.code(), Some(2));
}
