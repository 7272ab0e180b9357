//! Experiment drivers shared by the CLI and the acceptance suite.

use rayon::prelude::*;
use serde::Serialize;

use super::config::LambdaSpec;
use super::HarnessError;
use crate::calibration::{fit_tau_from_decay, DecayFit, ViscosityConvention};
use crate::equilibrium::{feq, init_shockwave, init_sine, init_sine_2d, init_taylor_green, TaylorGreen};
use crate::field::{FieldState, Instability, MacroField};
use crate::flga::{step, CollisionOperator, Collider, FlgaError, NegativePolicy, Normalization};
use crate::lattice::{enumerate_equivalence_classes, CollisionTable, Model, Multiplicity};
use crate::lbm::{Bgk, BgkParams};
use crate::qflga;
use crate::stats::{max_abs_diff, moving_average, rel_l2};

/// Collision setup independent of the file format.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionSpec {
    pub model: Model,
    /// `(k, C)` pairs.
    pub orders: Vec<(usize, f64)>,
    pub lambda: LambdaSpec,
    pub multiplicity: Multiplicity,
    pub normalization: Normalization,
    pub negative: NegativePolicy,
}

impl CollisionSpec {
    pub fn new(model: Model, orders: &[(usize, f64)], lambda: f64) -> CollisionSpec {
        CollisionSpec {
            model,
            orders: orders.to_vec(),
            lambda: LambdaSpec::Uniform(lambda),
            multiplicity: Multiplicity::Unordered,
            normalization: Normalization::Local,
            negative: NegativePolicy::Clamp,
        }
    }

    pub fn strict(mut self) -> Self {
        self.negative = NegativePolicy::Strict;
        self
    }

    pub fn collider(&self) -> Result<Collider, FlgaError> {
        let desc = self.model.descriptor();
        let mut tables = Vec::new();
        for &(k, c) in &self.orders {
            let classes = enumerate_equivalence_classes(desc, k)?;
            let lambdas = match &self.lambda {
                LambdaSpec::Uniform(l) => vec![*l; classes.len()],
                LambdaSpec::PerClass(l) => l.clone(),
            };
            tables.push(CollisionTable::build_with(desc, &classes, &lambdas, c, self.multiplicity)?);
        }
        Ok(Collider::new(tables)?.with_normalization(self.normalization).with_negative(self.negative))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumRow {
    pub u_split: f64,
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub f_avg: Vec<f64>,
    pub f_eq: Vec<f64>,
    pub max_rel_err: f64,
}

/// Sinusoidal start per split `U`, relaxed for `warmup` steps, then the
/// domain-mean distribution averaged over the remaining steps and compared
/// with the equilibrium of its own moments.
pub fn equilibrium_sweep(
    model: Model,
    nx: usize,
    ny: usize,
    collider: &Collider,
    sweep_u: &[f64],
    steps: usize,
    warmup: usize,
) -> Result<Vec<EquilibriumRow>, HarnessError> {
    sweep_u
        .par_iter()
        .map(|&u_split| {
            let mut s = match model {
                Model::D1Q3 => init_sine(u_split, nx)?,
                Model::D2Q9 => init_sine_2d(u_split, nx, ny)?,
            };
            let q = s.q();
            let mut acc = vec![0.0; q];
            step(&mut s, collider, warmup)?;
            for _ in warmup..steps {
                step(&mut s, collider, 1)?;
                for site in s.f.chunks_exact(q) {
                    for (a, v) in acc.iter_mut().zip(site) {
                        *a += v;
                    }
                }
            }
            let norm = ((steps - warmup) * s.len()) as f64;
            let f_avg: Vec<f64> = acc.iter().map(|a| a / norm).collect();
            let d = model.descriptor();
            let rho = d.density(&f_avg);
            let m = d.momentum(&f_avg);
            let (ux, uy) = (m[0] / rho, m[1] / rho);
            let f_eq = feq(model, rho, [ux, uy]);
            let max_rel_err = f_avg.iter().zip(&f_eq).map(|(a, e)| ((a - e) / e).abs()).fold(0.0, f64::max);
            Ok(EquilibriumRow { u_split, rho, ux, uy, f_avg, f_eq, max_rel_err })
        })
        .collect()
}

/// Profile error between two 1D runs over fluid sites, after a moving average.
pub fn profile_error(a: &FieldState, b: &FieldState, window: usize) -> (f64, f64) {
    let (ma, mb) = (a.macroscopic(), b.macroscopic());
    let fluid: Vec<usize> = (0..a.len()).filter(|&i| a.sites[i].is_fluid()).collect();
    let pick = |v: &[f64]| moving_average(&fluid.iter().map(|&i| v[i]).collect::<Vec<_>>(), window);
    (rel_l2(&pick(&ma.rho), &pick(&mb.rho)), rel_l2(&pick(&ma.ux), &pick(&mb.ux)))
}

#[derive(Clone, Debug)]
pub struct ShockComparison {
    pub flga: FieldState,
    pub reference: FieldState,
    pub rho_err: f64,
    pub u_err: f64,
}

pub fn shockwave_run<C: CollisionOperator + ?Sized>(
    l: usize,
    rho1: f64,
    rho2: f64,
    steps: usize,
    op: &C,
) -> Result<FieldState, HarnessError> {
    let mut s = init_shockwave(l, rho1, rho2)?;
    step(&mut s, op, steps)?;
    Ok(s)
}

/// FLGA against BGK on the same shockwave.
pub fn shockwave_vs_lbm(
    l: usize,
    rho1: f64,
    rho2: f64,
    steps: usize,
    collider: &Collider,
    tau: f64,
    window: usize,
) -> Result<ShockComparison, HarnessError> {
    let bgk = Bgk::new(Model::D1Q3, BgkParams::new(tau)?);
    let (flga, reference) = rayon::join(
        || shockwave_run(l, rho1, rho2, steps, collider),
        || shockwave_run(l, rho1, rho2, steps, &bgk),
    );
    let (flga, reference) = (flga?, reference?);
    let (rho_err, u_err) = profile_error(&flga, &reference, window);
    Ok(ShockComparison { flga, reference, rho_err, u_err })
}

/// BGK relaxation time whose shockwave density profile best matches `target`.
pub fn match_lbm_tau(target: &FieldState, rho1: f64, rho2: f64, window: usize) -> Result<(f64, f64), HarnessError> {
    let steps = target.time as usize;
    let l = target.nx;
    let err = |log_t: f64| -> Result<f64, HarnessError> {
        let tau = 0.5 + log_t.exp();
        let bgk = Bgk::new(Model::D1Q3, BgkParams::new(tau)?);
        let r = shockwave_run(l, rho1, rho2, steps, &bgk)?;
        Ok(profile_error(target, &r, window).0)
    };
    // golden section on ln(tau - 1/2)
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = ((1e-3f64).ln(), (40f64).ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (err(c)?, err(d)?);
    for _ in 0..40 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = err(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = err(d)?;
        }
    }
    let x = (a + b) / 2.0;
    Ok((0.5 + x.exp(), err(x)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRun {
    /// `max |u_x|` after each step.
    pub amplitudes: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub instability: Option<Instability>,
}

impl DecayRun {
    pub fn stable(&self) -> bool {
        self.instability.is_none() && self.fit.is_some()
    }

    pub fn tau(&self) -> Option<f64> {
        self.fit.map(|f| f.tau)
    }
}

/// Fit window: drop the first tenth (at least 3 steps) of the run, which is
/// cut once the amplitude falls below `stop_fraction * u_max`.
pub(crate) fn decay_window(amplitudes: &[f64]) -> Option<(usize, &[f64])> {
    let skip = (amplitudes.len() / 10).max(3);
    let w = amplitudes.get(skip..)?;
    (w.len() >= 10).then_some((skip, w))
}

/// Runs a Taylor-Green vortex and fits the velocity decay.
pub fn taylor_green_decay<C: CollisionOperator + ?Sized>(
    tg: &TaylorGreen,
    op: &C,
    max_steps: usize,
    stop_fraction: f64,
) -> Result<(DecayRun, FieldState), HarnessError> {
    let mut s = init_taylor_green(tg)?;
    let mut amplitudes = Vec::new();
    let mut instability = None;
    for _ in 0..max_steps {
        match step(&mut s, op, 1) {
            Ok(()) => {}
            Err(FlgaError::Instability(i)) => {
                instability = Some(i);
                break;
            }
            Err(e) => return Err(e.into()),
        }
        let a = max_abs_ux(&s.macroscopic());
        if !a.is_finite() {
            break;
        }
        amplitudes.push(a);
        if a < stop_fraction * tg.u_max.abs() {
            break;
        }
    }
    let fit = if instability.is_none() {
        decay_window(&amplitudes).and_then(|(_, w)| {
            fit_tau_from_decay(w, tg.wavenumbers().0, ViscosityConvention::Standard).ok()
        })
    } else {
        None
    };
    Ok((DecayRun { amplitudes, fit, instability }, s))
}

pub fn max_abs_ux(m: &MacroField) -> f64 {
    m.ux.iter().fold(0.0, |a: f64, u| if u.is_finite() { a.max(u.abs()) } else { f64::NAN })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityScan {
    /// `(C, fitted τ)`; `None` marks an unstable run.
    pub samples: Vec<(f64, Option<f64>)>,
    /// Largest C below the first unstable one.
    pub max_stable_c: Option<f64>,
    /// Smallest fitted τ among stable samples up to `max_stable_c`.
    pub min_tau: Option<f64>,
}

/// Taylor-Green fits over a grid of C values with strict negativity checks.
pub fn stability_scan(
    tg: &TaylorGreen,
    base: &CollisionSpec,
    c_grid: &[f64],
    max_steps: usize,
) -> Result<StabilityScan, HarnessError> {
    let runs: Vec<Result<Option<f64>, HarnessError>> = c_grid
        .par_iter()
        .map(|&c| {
            let mut spec = base.clone().strict();
            spec.orders.iter_mut().for_each(|o| o.1 = c);
            let (run, _) = taylor_green_decay(tg, &spec.collider()?, max_steps, 0.1)?;
            Ok(if run.stable() { run.tau() } else { None })
        })
        .collect();
    let mut samples = Vec::new();
    for (c, r) in c_grid.iter().zip(runs) {
        samples.push((*c, r?));
    }
    let stable_prefix: Vec<(f64, f64)> =
        samples.iter().map_while(|(c, t)| t.map(|t| (*c, t))).collect();
    Ok(StabilityScan {
        max_stable_c: stable_prefix.last().map(|s| s.0),
        min_tau: stable_prefix.iter().map(|s| s.1).reduce(f64::min),
        samples,
    })
}

#[derive(Clone, Debug)]
pub struct QflgaComparison {
    pub classical: FieldState,
    pub quantum: FieldState,
    pub max_abs: f64,
}

/// One shockwave step through the statevector emulator and the classical kernel.
pub fn qflga_compare(l: usize, rho1: f64, rho2: f64, lambda: f64, c: f64) -> Result<QflgaComparison, HarnessError> {
    let s = init_shockwave(l, rho1, rho2)?;
    let quantum = qflga::qflga_step(&s, lambda, c)?;
    let mut classical = s.clone();
    step(&mut classical, &CollisionSpec::new(Model::D1Q3, &[(2, c)], lambda).collider()?, 1)?;
    let max_abs = max_abs_diff(&classical.f, &quantum.f);
    Ok(QflgaComparison { classical, quantum, max_abs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CavitySummary {
    /// Site of the largest stream-function magnitude.
    pub vortex_center: (usize, usize),
    /// `u_x` along the vertical centerline, bottom to top.
    pub centerline_ux: Vec<f64>,
    /// `u_y` along the horizontal centerline, left to right.
    pub centerline_uy: Vec<f64>,
}

pub fn cavity_summary(s: &FieldState) -> CavitySummary {
    let m = s.macroscopic();
    let (nx, ny) = (s.nx, s.ny);
    let mut best = (0.0, (nx / 2, ny / 2));
    for x in 1..nx - 1 {
        let mut psi = 0.0;
        for y in 1..ny - 1 {
            psi += m.ux[m.index(x, y)];
            if psi.abs() > best.0 {
                best = (psi.abs(), (x, y));
            }
        }
    }
    CavitySummary {
        vortex_center: best.1,
        centerline_ux: (0..ny).map(|y| m.ux[m.index(nx / 2, y)]).collect(),
        centerline_uy: (0..nx).map(|x| m.uy[m.index(x, ny / 2)]).collect(),
    }
}
