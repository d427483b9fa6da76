//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench-renyi")).current_dir(dir).args(args).output().unwrap()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn scan_writes_csv_and_sidecar_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["scan", "--state", "CDW", "--sizes", "4,6", "--times", "0,0.5,2", "--gaussian", "--out", "a.csv"];
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    let rows = csv(&dir.path().join("a.csv"));
    assert_eq!(rows[0].join(","), quench_renyi::cli::SCAN_HEADER.join(","));
    assert_eq!(rows.len(), 1 + 2 * 3);
    for r in &rows[1..] {
        assert_eq!(r.len(), rows[0].len());
        assert_eq!(r[0], "CDW");
        if r[3] == "0" {
            assert_eq!(r[4], "0");
        } else {
            assert!(r[4].parse::<f64>().unwrap() > 0.0);
        }
        // wall-clock times stay out of the CSV
        assert_eq!(r[10], "");
    }
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "scan");
    assert_eq!(side["config"]["state"], "CDW");

    assert!(run(dir.path(), &args).status.success());
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), first);
}

#[test]
fn parallel_scan_matches_serial_scan() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["scan", "--state", "MI", "--sizes", "6", "--tgrid", "lin", "--tmin", "0.5", "--tmax", "8", "--tpoints", "6"];
    let serial = run(dir.path(), &[&base[..], &["--workers", "1"]].concat());
    let pooled = run(dir.path(), &[&base[..], &["--workers", "3"]].concat());
    assert!(serial.status.success() && pooled.status.success());
    assert_eq!(serial.stdout, pooled.stdout);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "state = \"MI\"\nsizes = [4]\ntimes = [0.0, 1.0]\n").unwrap();
    let out = run(dir.path(), &["scan", "--config", "c.toml", "--sizes", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.starts_with("MI,2,1,")));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "statee = \"MI\"\n").unwrap();
    let cases: [(&[&str], i32, &str); 5] = [
        (&["scan", "--config", "bad.toml"], 2, "error[config]"),
        (&["scan", "--sizes", "26"], 3, "error[infeasible]"),
        (&["scan", "--state", "CDW", "--sizes", "5"], 2, "error[domain]"),
        (&["scan", "--engine", "glynn"], 2, "error[config]"),
        (&["finite-u", "--sizes", "14", "--times", "1"], 3, "error[infeasible]"),
    ];
    for (args, code, tag) in cases {
        let out = run(dir.path(), args);
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {err}");
        assert!(err.contains(tag), "{args:?}: {err}");
    }
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn finite_u_conserves_energy_and_particles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["finite-u", "--sizes", "4", "--times", "0,1,5", "--interactions", "0,0.4,2", "--out", "f.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&dir.path().join("f.csv"));
    assert_eq!(rows[0].join(","), quench_renyi::cli::FINITE_U_HEADER.join(","));
    assert_eq!(rows.len(), 1 + 3 * 3);
    for r in &rows[1..] {
        let num = |i: usize| r[i].parse::<f64>().unwrap();
        // MI has no double occupancy, so <H> = 0 at every U and time
        assert!(num(6).abs() < 1e-12 && (num(7) - 4.0).abs() < 1e-12 && (num(8) - 1.0).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn size_scaling_and_structure_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["size-scaling", "--state", "CDW", "--sizes", "4,6,8", "--no-permanent", "--gaussian", "--times", "5,10", "--out", "s.csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv(&dir.path().join("s.csv"));
    assert_eq!(rows[0].join(","), quench_renyi::cli::SCALING_HEADER.join(","));
    assert_eq!(rows.len(), 4);
    assert!(dir.path().join("s.json").exists());

    let out = run(dir.path(), &["structure", "--sizes", "32", "--times", "1,3", "--out", "st.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("st.json")).unwrap()).unwrap();
    assert_eq!(doc["command"], "structure");
    assert!(doc.to_string().contains("width"));
}
