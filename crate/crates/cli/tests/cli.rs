use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flga(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flga"))
        .current_dir(dir)
        .env("FLGA_OUTPUT_ROOT", dir.join("out"))
        .args(args)
        .output()
        .unwrap()
}

fn write_cfg(dir: &Path, text: &str) {
    fs::write(dir.join("case.cfg"), text).unwrap();
}

#[test]
fn run_writes_under_output_root() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path(), "case = shockwave\nnx = 50\nsteps = 20\n");
    let out = flga(dir.path(), &["run", "case.cfg", "--set", "output_dir=short"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["steps"], 20);
    assert!(dir.path().join("out/short/report.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path(), "case = shockwave\nnx = 50\n");
    let out = flga(dir.path(), &["run", "case.cfg", "--set", "colour=red", "--set", "steps=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("steps"), "{err}");
}

#[test]
fn strict_instability_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path(), "case = taylor-green\nnx = 16\nny = 16\nsteps = 50\nc = 3\nnegative = strict\n");
    assert_eq!(flga(dir.path(), &["run", "case.cfg"]).status.code(), Some(3));
}

#[test]
fn sweep_tau_flags_unstable_samples() {
    let dir = tempfile::tempdir().unwrap();
    write_cfg(dir.path(), "case = taylor-green\nnx = 32\nny = 32\nsteps = 4000\nc_list = 0.2, 0.5, 4\n");
    let out = flga(dir.path(), &["sweep-tau", "case.cfg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/taylor-green/tau_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("C = [4.0]"));
}

#[test]
fn dump_table_and_qflga_compare() {
    let dir = tempfile::tempdir().unwrap();
    let out = flga(dir.path(), &["dump-table", "--model", "d1q3", "--k", "2", "--lambda", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let terms = fs::read_to_string(dir.path().join("out/d1q3_k2_terms.csv")).unwrap();
    assert_eq!(terms.lines().count(), 3);
    let out = flga(dir.path(), &["qflga-compare", "--length", "16"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("out/qflga_compare.csv")).unwrap().lines().count(), 1 + 16 * 3);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = flga(dir.path(), &["bench", "--edges", "8,16", "--solvers", "flga2", "--reps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/bench.csv")).unwrap();
    assert!(csv.starts_with("solver,sites,seconds_per_step\nflga2,64,"));
}
