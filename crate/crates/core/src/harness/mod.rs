//! Configuration, experiment cases, reports and file output.

pub mod bench;
pub mod cases;
pub mod config;
pub mod sweep;

pub use config::{CaseKind, Compare, ConfigError, ConfigIssue, LambdaSpec, RunConfig};

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use serde::Serialize;
use thiserror::Error;

use crate::calibration::CalibrationError;
use crate::equilibrium::{init_lid_cavity, init_shockwave, init_taylor_green, InitError, TaylorGreen};
use crate::field::{FieldState, Instability};
use crate::flga::{step_timed, CollisionOperator, FlgaError, PhaseTimes};
use crate::lattice::{CollisionTable, LatticeError};
use crate::lbm::{Bgk, BgkParams, LbmError};
use crate::qflga::{self, QuantumError};
use crate::snapshot::{self, SnapshotError};
use crate::stats::{max_abs_diff, rel_l2};
use cases::CollisionSpec;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Flga(#[from] FlgaError),
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Lbm(#[from] LbmError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl HarnessError {
    pub fn is_instability(&self) -> bool {
        matches!(self, HarnessError::Flga(FlgaError::Instability(_)))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file<F>(path: &Path, body: F) -> Result<(), HarnessError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn collision_spec(cfg: &RunConfig) -> CollisionSpec {
    CollisionSpec {
        model: cfg.model,
        orders: cfg.bodies.iter().copied().zip(cfg.c.iter().copied()).collect(),
        lambda: cfg.lambda.clone(),
        multiplicity: cfg.multiplicity,
        normalization: cfg.normalization,
        negative: cfg.negative,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timing {
    pub collide: f64,
    pub stream: f64,
    pub boundaries: f64,
    pub total: f64,
}

impl From<PhaseTimes> for Timing {
    fn from(t: PhaseTimes) -> Timing {
        Timing {
            collide: t.collide.as_secs_f64(),
            stream: t.stream.as_secs_f64(),
            boundaries: t.boundaries.as_secs_f64(),
            total: t.total().as_secs_f64(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub model: String,
    pub steps: usize,
    pub compare: String,
    /// Relative L2 error against the comparison target.
    pub error_l2: Option<f64>,
    pub error_max: Option<f64>,
    /// `|M_end - M_0| / M_0`.
    pub mass_drift: f64,
    /// `|P_end - P_0| / M_0` per axis.
    pub momentum_drift: [f64; 2],
    pub timing: Timing,
    pub instabilities: usize,
    pub first_instability: Option<Instability>,
    pub metrics: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

impl CaseReport {
    fn conservation(&mut self, before: &FieldState, after: &FieldState) {
        let m0 = before.total_mass();
        let (p0, p1) = (before.total_momentum(), after.total_momentum());
        self.mass_drift = (after.total_mass() - m0).abs() / m0;
        self.momentum_drift = [(p1[0] - p0[0]).abs() / m0, (p1[1] - p0[1]).abs() / m0];
        self.instabilities = after.instabilities.len();
        self.first_instability = after.instabilities.first().copied();
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn create(dir: PathBuf) -> Result<Output, HarnessError> {
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Output { dir, files: Vec::new() })
    }

    fn write<F>(&mut self, name: &str, body: F) -> Result<(), HarnessError>
    where
        F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    {
        write_file(&self.dir.join(name), body)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn snapshot(&mut self, s: &FieldState) -> Result<(), HarnessError> {
        self.write(&format!("snapshot_{:07}.csv", s.time), |w| snapshot::write_csv(s, w))
    }
}

/// Steps with CSV snapshots every `every` steps and a final binary dump.
fn drive<C: CollisionOperator + ?Sized>(
    state: &mut FieldState,
    op: &C,
    steps: usize,
    every: usize,
    out: &mut Output,
    times: &mut PhaseTimes,
) -> Result<(), HarnessError> {
    out.snapshot(state)?;
    let mut done = 0;
    while done < steps {
        let n = every.min(steps - done);
        step_timed(state, op, n, times)?;
        done += n;
        out.snapshot(state)?;
    }
    out.write("final.bin", |w| w.write_all(&snapshot::encode_binary(state)))
}

/// Runs the configured case below `root`, writing snapshots and `report.json`.
pub fn run_case(cfg: &RunConfig, root: &Path) -> Result<CaseReport, HarnessError> {
    let mut out = Output::create(root.join(&cfg.output_dir))?;
    let spec = collision_spec(cfg);
    let collider = spec.collider()?;
    let mut report = CaseReport {
        case: cfg.case.name().into(),
        model: cfg.model.name().into(),
        steps: cfg.steps,
        compare: format!("{:?}", cfg.compare).to_lowercase(),
        ..CaseReport::default()
    };
    let mut times = PhaseTimes::default();

    match cfg.case {
        CaseKind::Equilibrium1d | CaseKind::Equilibrium2d => {
            let t0 = std::time::Instant::now();
            let rows =
                cases::equilibrium_sweep(cfg.model, cfg.nx, cfg.ny, &collider, &cfg.sweep_u, cfg.steps, cfg.warmup)?;
            times.collide = t0.elapsed();
            let q = cfg.model.descriptor().q();
            out.write("equilibrium.csv", |w| {
                let cols = |p: &str| (0..q).map(|i| format!(",{p}_{i}")).collect::<String>();
                writeln!(w, "u_split,rho,u_x,u_y{}{},max_rel_err", cols("f_avg"), cols("f_eq"))?;
                for r in &rows {
                    write!(w, "{},{},{},{}", r.u_split, r.rho, r.ux, r.uy)?;
                    for v in r.f_avg.iter().chain(&r.f_eq) {
                        write!(w, ",{v}")?;
                    }
                    writeln!(w, ",{}", r.max_rel_err)?;
                }
                Ok(())
            })?;
            let max = rows.iter().map(|r| r.max_rel_err).fold(0.0, f64::max);
            let low = rows
                .iter()
                .filter(|r| r.ux.hypot(r.uy) <= 0.3)
                .map(|r| r.max_rel_err)
                .fold(0.0, f64::max);
            report.error_max = Some(max);
            report.metrics.insert("max_rel_err_u_le_0.3".into(), low);
        }
        CaseKind::Shockwave => {
            let mut s = init_shockwave(cfg.nx, cfg.rho1, cfg.rho2)?;
            let start = s.clone();
            if cfg.compare == Compare::Qflga {
                let mut psi = qflga::encode(&s)?;
                let layout = psi.layout;
                psi.apply(&qflga::collision_circuit(&layout, lambda_scalar(cfg)?, cfg.c[0])?)?;
                psi.apply(&qflga::propagation_circuit(&layout))?;
                out.write("collision_circuit.txt", |w| {
                    write!(w, "{}", qflga::collision_circuit(&layout, lambda_scalar(cfg).unwrap_or(1.0), cfg.c[0]).unwrap_or_default())
                })?;
                let mut quantum = if cfg.shots > 0 {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
                    qflga::measure_shots(&psi, cfg.shots, &mut rng)?
                } else {
                    qflga::measure_step(&psi)?
                };
                qflga::reflect_walls(&mut quantum, &s)?;
                step_timed(&mut s, &collider, 1, &mut times)?;
                report.steps = 1;
                report.error_max = Some(max_abs_diff(&s.f, &quantum.f));
                report.error_l2 = Some(rel_l2(&quantum.f, &s.f));
                out.write("qflga.csv", |w| {
                    writeln!(w, "x,channel,classical,quantum")?;
                    for x in 0..s.nx {
                        for c in 0..3 {
                            writeln!(w, "{x},{c},{:?},{:?}", s.site(x, 0)[c], quantum.site(x, 0)[c])?;
                        }
                    }
                    Ok(())
                })?;
            } else {
                drive(&mut s, &collider, cfg.steps, cfg.snapshot_every, &mut out, &mut times)?;
                if cfg.compare == Compare::Lbm {
                    let bgk = Bgk::new(cfg.model, BgkParams::new(cfg.lbm_tau)?);
                    let reference = cases::shockwave_run(cfg.nx, cfg.rho1, cfg.rho2, cfg.steps, &bgk)?;
                    let (rho_err, u_err) = cases::profile_error(&s, &reference, cfg.smoothing);
                    report.error_l2 = Some(rho_err.max(u_err));
                    report.metrics.insert("rho_rel_l2".into(), rho_err);
                    report.metrics.insert("u_rel_l2".into(), u_err);
                    let (a, b) = (s.macroscopic(), reference.macroscopic());
                    report.error_max = Some(max_abs_diff(&a.rho, &b.rho));
                    out.write("profile.csv", |w| {
                        writeln!(w, "x,rho,u_x,rho_ref,u_x_ref")?;
                        for x in 0..s.nx {
                            writeln!(w, "{x},{:?},{:?},{:?},{:?}", a.rho[x], a.ux[x], b.rho[x], b.ux[x])?;
                        }
                        Ok(())
                    })?;
                }
            }
            report.conservation(&start, &s);
        }
        CaseKind::TaylorGreen => {
            let tg = TaylorGreen { nx: cfg.nx, ny: cfg.ny, u_max: cfg.u_max, rho0: cfg.rho0 };
            let mut s = init_taylor_green(&tg)?;
            let start = s.clone();
            out.snapshot(&s)?;
            let mut amps = Vec::with_capacity(cfg.steps);
            // compared with the analytic field where the vortex reaches a tenth of u_max
            let mut compare_at = None;
            for t in 1..=cfg.steps {
                step_timed(&mut s, &collider, 1, &mut times)?;
                let m = s.macroscopic();
                let a = cases::max_abs_ux(&m);
                amps.push(a);
                if compare_at.is_none() && (a < 0.1 * cfg.u_max.abs() || t == cfg.steps) {
                    compare_at = Some((t, m));
                }
                if t % cfg.snapshot_every == 0 || t == cfg.steps {
                    out.snapshot(&s)?;
                }
            }
            out.write("final.bin", |w| w.write_all(&snapshot::encode_binary(&s)))?;
            let k = tg.wavenumbers().0;
            let cut = amps.iter().position(|a| *a < 0.1 * cfg.u_max.abs()).map_or(amps.len(), |i| i + 1);
            let fit = cases::decay_window(&amps[..cut]).and_then(|(_, w)| {
                crate::calibration::fit_tau_from_decay(w, k, crate::calibration::ViscosityConvention::Standard).ok()
            });
            if let Some(f) = fit {
                report.metrics.insert("nu".into(), f.nu);
                report.metrics.insert("tau".into(), f.tau);
                report.metrics.insert("fit_r2".into(), f.r2);
                if let (Compare::Analytic, Some((t, m))) = (cfg.compare, &compare_at) {
                    let a = crate::equilibrium::taylor_green_analytic(&tg, *t as f64, f.nu);
                    report.error_l2 = Some(rel_l2(&m.ux, &a.ux));
                    report.error_max = Some(max_abs_diff(&m.ux, &a.ux));
                    report.metrics.insert("compare_step".into(), *t as f64);
                }
            }
            out.write("decay.csv", |w| {
                writeln!(w, "t,max_abs_u_x,analytic")?;
                for (i, a) in amps.iter().enumerate() {
                    let t = (i + 1) as f64;
                    let an = fit.map_or(f64::NAN, |f| cfg.u_max * (-2.0 * f.nu * k * k * t).exp());
                    writeln!(w, "{t},{a:?},{an:?}")?;
                }
                Ok(())
            })?;
            report.conservation(&start, &s);
        }
        CaseKind::LidCavity => {
            let mut s = init_lid_cavity(cfg.nx, cfg.u_lid, cfg.rho0)?;
            let start = s.clone();
            drive(&mut s, &collider, cfg.steps, cfg.snapshot_every, &mut out, &mut times)?;
            let sum = cases::cavity_summary(&s);
            report.metrics.insert("vortex_x".into(), sum.vortex_center.0 as f64);
            report.metrics.insert("vortex_y".into(), sum.vortex_center.1 as f64);
            out.write("centerline.csv", |w| {
                writeln!(w, "i,u_x_vertical,u_y_horizontal")?;
                for (i, (a, b)) in sum.centerline_ux.iter().zip(&sum.centerline_uy).enumerate() {
                    writeln!(w, "{i},{a:?},{b:?}")?;
                }
                Ok(())
            })?;
            report.conservation(&start, &s);
            report.momentum_drift = [f64::NAN; 2];
        }
    }

    report.timing = times.into();
    report.outputs = out.files.clone();
    report.outputs.push("report.json".into());
    let json = serde_json::to_string_pretty(&ReportFile { config: cfg, report: &report }).expect("serializable");
    out.write("report.json", |w| w.write_all(json.as_bytes()))?;
    Ok(report)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    config: &'a RunConfig,
    report: &'a CaseReport,
}

fn lambda_scalar(cfg: &RunConfig) -> Result<f64, HarnessError> {
    match &cfg.lambda {
        LambdaSpec::Uniform(l) => Ok(*l),
        LambdaSpec::PerClass(l) if l.len() == 1 => Ok(l[0]),
        LambdaSpec::PerClass(_) => Err(ConfigError::single("lambda", "qflga needs a single rate").into()),
    }
}

/// Writes the class and term tables for one lattice and body order.
pub fn dump_table(table: &CollisionTable, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let desc = table.model.descriptor();
    let classes = crate::lattice::enumerate_equivalence_classes(desc, table.k)?;
    let terms = dir.join(format!("{}_k{}_terms.csv", table.model, table.k));
    let class_file = dir.join(format!("{}_k{}_classes.csv", table.model, table.k));
    write_file(&terms, |w| table.write_csv(w))?;
    write_file(&class_file, |w| crate::lattice::write_class_table_csv(&classes, w))?;
    Ok(vec![terms, class_file])
}
