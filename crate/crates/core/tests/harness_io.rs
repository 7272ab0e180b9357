use std::fs;
use std::path::PathBuf;

use flga::equilibrium::{init_lid_cavity, init_taylor_green, TaylorGreen};
use flga::harness::{run_case, CaseKind, RunConfig};
use flga::snapshot::{decode_binary, read_csv, write_csv};

fn presets() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

#[test]
fn every_preset_parses() {
    let mut n = 0;
    for entry in fs::read_dir(presets()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cfg") {
            let text = fs::read_to_string(&path).unwrap();
            RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn csv_snapshot_round_trips_walls_and_values() {
    let s = init_lid_cavity(6, 0.2, 1.0).unwrap();
    let mut buf = Vec::new();
    write_csv(&s, &mut buf).unwrap();
    let back = read_csv(&buf[..]).unwrap();
    assert_eq!(back.f, s.f);
    let tg = init_taylor_green(&TaylorGreen::new(5, 4)).unwrap();
    let mut buf = Vec::new();
    write_csv(&tg, &mut buf).unwrap();
    assert_eq!(read_csv(&buf[..]).unwrap().f, tg.f);
}

#[test]
fn lid_cavity_run_writes_profiles_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let text = "case = lid-cavity\nnx = 20\nny = 20\nsteps = 200\nsnapshot_every = 100\n";
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.case, CaseKind::LidCavity);
    let report = run_case(&cfg, dir.path()).unwrap();
    assert!(report.mass_drift < 1e-9);
    assert!(report.timing.total >= report.timing.collide);
    let out = dir.path().join("lid-cavity");
    let centerline = fs::read_to_string(out.join("centerline.csv")).unwrap();
    assert_eq!(centerline.lines().count(), 21);
    let state = decode_binary(&fs::read(out.join("final.bin")).unwrap()).unwrap();
    assert_eq!(state.time, 200);
    // top row moves with the lid
    let m = state.macroscopic();
    assert!(m.ux[m.index(10, 18)] > 0.0);
}

#[test]
fn config_errors_name_every_bad_key() {
    let err = RunConfig::parse("case = shockwave\nnx = 0\nsteps = x\nwhatever = 1\n").unwrap_err();
    let mut keys = err.keys();
    keys.sort();
    assert_eq!(keys, ["nx", "steps", "whatever"]);
}

#[test]
fn equilibrium_case_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse_with_overrides("case = equilibrium-1d\n", &["steps=600".into(), "warmup=300".into()]).unwrap();
    let r = run_case(&cfg, dir.path()).unwrap();
    assert!(r.metrics["max_rel_err_u_le_0.3"] < 0.02);
    let csv = fs::read_to_string(dir.path().join("equilibrium-1d/equilibrium.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
}
