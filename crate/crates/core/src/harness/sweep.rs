//! Relaxation time against collision scale.

use rayon::prelude::*;
use serde::Serialize;

use super::cases::{match_lbm_tau, shockwave_run, taylor_green_decay};
use super::config::{CaseKind, RunConfig};
use super::{ConfigError, HarnessError};
use crate::calibration::{CalibrationCurve, TauModel};
use crate::equilibrium::TaylorGreen;
use crate::flga::NegativePolicy;

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub curve: CalibrationCurve,
    /// C values whose run went unstable or could not be fitted.
    pub flagged: Vec<f64>,
}

/// Measures τ for every entry of `c_list`, scaling all body orders alike.
///
/// Taylor-Green configs fit the velocity decay; shockwave configs find the
/// BGK τ with the closest density profile.
pub fn sweep_tau(cfg: &RunConfig) -> Result<SweepResult, HarnessError> {
    if cfg.c_list.is_empty() {
        return Err(ConfigError::single("c_list", "sweep needs at least one C").into());
    }
    let results: Vec<Result<f64, HarnessError>> = cfg
        .c_list
        .par_iter()
        .map(|&c| {
            let mut run_cfg = cfg.clone();
            run_cfg.c = vec![c; cfg.bodies.len()];
            let mut spec = super::collision_spec(&run_cfg);
            match cfg.case {
                CaseKind::TaylorGreen => {
                    spec.negative = NegativePolicy::Strict;
                    let tg = TaylorGreen { nx: cfg.nx, ny: cfg.ny, u_max: cfg.u_max, rho0: cfg.rho0 };
                    let (run, _) = taylor_green_decay(&tg, &spec.collider()?, cfg.steps, 0.1)?;
                    Ok(if run.stable() { run.tau().unwrap_or(f64::NAN) } else { f64::NAN })
                }
                CaseKind::Shockwave => {
                    let s = shockwave_run(cfg.nx, cfg.rho1, cfg.rho2, cfg.steps, &spec.collider()?)?;
                    if !s.instabilities.is_empty() {
                        return Ok(f64::NAN);
                    }
                    Ok(match_lbm_tau(&s, cfg.rho1, cfg.rho2, cfg.smoothing)?.0)
                }
                _ => Err(ConfigError::single("case", "sweep-tau supports taylor-green and shockwave").into()),
            }
        })
        .collect();
    let mut samples = Vec::new();
    let mut flagged = Vec::new();
    for (&c, r) in cfg.c_list.iter().zip(results) {
        let tau = r?;
        if !tau.is_finite() {
            flagged.push(c);
        }
        samples.push((c, tau));
    }
    let curve = CalibrationCurve::fit(samples.clone(), TauModel::Approx)
        .unwrap_or(CalibrationCurve { samples, gamma: f64::NAN, pi0: f64::NAN, model: TauModel::Approx });
    Ok(SweepResult { curve, flagged })
}
