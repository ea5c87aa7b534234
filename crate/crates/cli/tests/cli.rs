use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use galmax::dump::read_state;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_galmax"));
    // keep the caller's environment from leaking into flag resolution
    for (k, _) in std::env::vars() {
        if k.starts_with("GALMAX_") {
            c.env_remove(k);
        }
    }
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run_ok(cwd: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(cwd).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn canonical(cwd: &Path, sub: &str) {
    let s = scenario(sub);
    run_ok(cwd, &["--out", &format!("out/{sub}"), sub, "--scenario", s.to_str().unwrap()]);
}

/// Every regular file under `root` with its bytes, keyed by relative path.
fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    files
}

#[test]
fn canonical_runs_match_golden_headers() {
    let tmp = tempfile::tempdir().unwrap();
    for sub in ["simulate", "check-invariance", "identities", "two-charge", "kernels"] {
        canonical(tmp.path(), sub);
        let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("out").join(sub).join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["subcommand"], sub);
        assert!(manifest["wall_time_s"].as_f64().unwrap() >= 0.0);
        assert!(tmp.path().join("out").join(sub).join("config.toml").exists());
    }
    let golden = include_str!("golden/headers.txt");
    for line in golden.lines() {
        let (file, expected) = line.split_once(": ").unwrap();
        let text = std::fs::read_to_string(tmp.path().join("out").join(file)).unwrap();
        let header: Vec<&str> = text.lines().take(expected.split('|').count()).collect();
        assert_eq!(header.join("|"), expected, "{file}");
    }
}

#[test]
fn zero_scenario_gives_zero_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("zero.toml");
    std::fs::write(&cfg, "system = \"modified\"\nunits = \"normalized\"\n[grid]\ndims = [8, 8, 8]\nh = 0.5\n[solver]\nsteps = 6\n[output]\nevery = 2\n").unwrap();
    run_ok(tmp.path(), &["--out", "z", "simulate", "--scenario", cfg.to_str().unwrap()]);
    let mut count = 0;
    for step in [0, 2, 4, 6] {
        let (meta, s) = read_state(&tmp.path().join(format!("z/snapshots/step_{step:06}"))).unwrap();
        assert_eq!(meta.step, step);
        assert!(s.e.values().iter().chain(s.b.values()).chain(s.j.values()).all(|v| v.norm() == 0.0));
        assert!(s.rho.values().iter().all(|v| *v == 0.0));
        count += 1;
    }
    assert_eq!(count, 4);
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let s = scenario("simulate");
    let s = s.to_str().unwrap();
    run_ok(tmp.path(), &["--threads", "1", "--out", "a", "simulate", "--scenario", s, "--steps", "20"]);
    run_ok(tmp.path(), &["--threads", "3", "--out", "b", "simulate", "--scenario", s, "--steps", "20"]);
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (name, bytes) in &a {
        let name = name.to_str().unwrap();
        // the manifest records wall time and thread count; the config records the output dir
        if name.ends_with(".csv") || name.ends_with("state.toml") {
            assert!(bytes == &b[Path::new(name)], "{name} differs");
        }
    }
    assert!(a.keys().filter(|k| k.extension().is_some_and(|e| e == "csv")).count() >= 9);
}

#[test]
fn effective_config_regenerates_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(tmp.path(), &["--out", "first", "--seed", "11", "identities", "--levels", "8,16", "--analytic-n", "8"]);
    let config = tmp.path().join("first/config.toml");
    assert!(std::fs::read_to_string(&config).unwrap().contains("seed = 11"));
    run_ok(tmp.path(), &["--out", "second", "identities", "--scenario", config.to_str().unwrap()]);
    let read = |d: &str| std::fs::read(tmp.path().join(d).join("identities.csv")).unwrap();
    assert_eq!(read("first"), read("second"));
}

#[test]
fn environment_mirrors_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .current_dir(tmp.path())
        .env("GALMAX_OUT", "env_out")
        .env("GALMAX_UNITS", "normalized")
        .env("GALMAX_U", "0,0.5,0")
        .env("GALMAX_B", "1,0,0")
        .args(["two-charge", "--q1", "1", "--q2", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("env_out/two_charge.csv")).unwrap();
    let naive = csv.lines().find(|l| l.starts_with("f2_double_prime")).unwrap();
    let ratio: f64 = naive.rsplit(',').next().unwrap().parse().unwrap();
    assert!((ratio - 0.75).abs() < 1e-12);
}

#[test]
fn failures_emit_machine_readable_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "system = \"classical\"\nunits = \"normalized\"\n[grid]\ndims = [8, 8, 8]\nh = 0.5\n[solver]\ndt = 1.0\n").unwrap();
    let out = bin().current_dir(tmp.path()).args(["--out", "o", "simulate", "--scenario", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(record["status"], "error");
    assert_eq!(record["kind"], "cfl");
    assert!(record["message"].as_str().unwrap().contains("c*dt/h"));
    let on_disk: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("o/error.json")).unwrap()).unwrap();
    assert_eq!(on_disk, record);

    std::fs::write(&cfg, "system = \"classical\"\n[grid]\ndims = [8, 8, 8]\nh = \"wide\"\n").unwrap();
    let out = bin().current_dir(tmp.path()).args(["simulate", "--scenario", cfg.to_str().unwrap()]).output().unwrap();
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!((record["kind"].as_str(), record["path"].as_str()), (Some("config"), Some("grid.h")));

    let out = bin().current_dir(tmp.path()).args(["two-charge", "--a", "1,0,0", "--b", "1,0,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(record["kind"], "coincident_charges");

    let out = bin().current_dir(tmp.path()).args(["check-invariance", "--trajectory", "missing", "--v0", "0.1,0,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(record["kind"], "trajectory");
}

#[test]
fn help_lists_every_flag() {
    let global = ["--scenario", "--out", "--seed", "--threads", "--units"];
    let cases: [(&str, &[&str]); 5] = [
        ("simulate", &["--system", "--steps", "--every"]),
        ("check-invariance", &["--trajectory", "--v0", "--law"]),
        ("identities", &["--degree", "--levels", "--analytic-n"]),
        ("two-charge", &["--q1", "--q2", "--a", "--b", "--u"]),
        ("kernels", &["--q", "--position", "--velocity", "--point", "--cutoff"]),
    ];
    for (sub, flags) in cases {
        let out = bin().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success());
        let help = String::from_utf8(out.stdout).unwrap();
        for flag in global.iter().chain(flags) {
            assert!(help.contains(&format!("{flag} ")) || help.contains(&format!("{flag}\n")), "{sub} --help lacks {flag}:\n{help}");
        }
        assert!(help.contains("GALMAX_"), "{sub} --help lacks env names");
    }
}
