//! Equilibrium distributions and initial conditions.

use std::f64::consts::PI;

use thiserror::Error;

use crate::field::{FieldError, FieldState, MacroField, SiteKind};
use crate::lattice::Model;

#[derive(Debug, Error, PartialEq)]
pub enum InitError {
    #[error("velocity split U={0} outside [-1, 1]")]
    SplitOutOfRange(f64),
    #[error("shockwave needs an even length of at least 4, got {0}")]
    ShockLength(usize),
    #[error("densities must be finite and non-negative")]
    BadDensity,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// D1Q3 equilibrium, ordered rest, right, left. Exact fixed point of the
/// two-body collision for any `u`.
#[inline]
pub fn feq_1d(rho: f64, u: f64) -> [f64; 3] {
    let s = (1.0 + 3.0 * u * u).sqrt() - 1.0;
    [
        2.0 / 3.0 * rho * (1.0 - s),
        rho / 6.0 * (1.0 + 3.0 * u + 2.0 * s),
        rho / 6.0 * (1.0 - 3.0 * u + 2.0 * s),
    ]
}

#[inline]
fn d1_slot(v: i32) -> usize {
    match v {
        0 => 0,
        1 => 1,
        _ => 2,
    }
}

/// D2Q9 equilibrium as the product of 1D factors in x (carrying `rho`) and y.
#[inline]
pub fn feq_2d(rho: f64, ux: f64, uy: f64) -> [f64; 9] {
    let fx = feq_1d(rho, ux);
    let fy = feq_1d(1.0, uy);
    let mut f = [0.0; 9];
    for (fi, v) in f.iter_mut().zip(&Model::D2Q9.descriptor().velocities) {
        *fi = fx[d1_slot(v[0])] * fy[d1_slot(v[1])];
    }
    f
}

pub fn feq(model: Model, rho: f64, u: [f64; 2]) -> Vec<f64> {
    match model {
        Model::D1Q3 => feq_1d(rho, u[0]).to_vec(),
        Model::D2Q9 => feq_2d(rho, u[0], u[1]).to_vec(),
    }
}

/// Sets every site of `state` from `fields` through [`feq`].
pub fn fill_equilibrium(state: &mut FieldState, fields: &MacroField) {
    let q = state.q();
    let model = state.model;
    for (i, site) in state.f.chunks_exact_mut(q).enumerate() {
        if state.sites[i].is_fluid() {
            site.copy_from_slice(&feq(model, fields.rho[i], [fields.ux[i], fields.uy[i]]));
        }
    }
}

/// Sinusoidal 1D start: unit mass per site, a third of it moving, split
/// between right and left as `(1 ± U)/2 · sin(πx/L)`.
pub fn init_sine(u_split: f64, l: usize) -> Result<FieldState, InitError> {
    let profile = sine_profile(u_split, l)?;
    let mut s = FieldState::new(Model::D1Q3, l, 1)?;
    for (x, p) in profile.iter().enumerate() {
        s.set_site(x, 0, p)?;
    }
    Ok(s)
}

/// 2D variant: the 1D profile along x, spread over y with rest weights.
pub fn init_sine_2d(u_split: f64, nx: usize, ny: usize) -> Result<FieldState, InitError> {
    let profile = sine_profile(u_split, nx)?;
    let wy = Model::D1Q3.descriptor().weights.clone();
    let d = Model::D2Q9.descriptor();
    let mut s = FieldState::new(Model::D2Q9, nx, ny)?;
    for y in 0..ny {
        for (x, p) in profile.iter().enumerate() {
            let site = s.site_mut(x, y);
            for (fi, v) in site.iter_mut().zip(&d.velocities) {
                *fi = p[d1_slot(v[0])] * wy[d1_slot(v[1])];
            }
        }
    }
    Ok(s)
}

fn sine_profile(u_split: f64, l: usize) -> Result<Vec<[f64; 3]>, InitError> {
    if !(-1.0..=1.0).contains(&u_split) {
        return Err(InitError::SplitOutOfRange(u_split));
    }
    Ok((0..l)
        .map(|x| {
            let s = (PI * x as f64 / l as f64).sin();
            let right = (1.0 + u_split) / 2.0 * s / 3.0;
            let left = (1.0 - u_split) / 2.0 * s / 3.0;
            [1.0 - right - left, right, left]
        })
        .collect())
}

/// Two resting densities split at `L/2`, walls at both ends.
pub fn init_shockwave(l: usize, rho1: f64, rho2: f64) -> Result<FieldState, InitError> {
    if l < 4 || !l.is_multiple_of(2) {
        return Err(InitError::ShockLength(l));
    }
    if !(rho1.is_finite() && rho2.is_finite() && rho1 >= 0.0 && rho2 >= 0.0) {
        return Err(InitError::BadDensity);
    }
    let mut s = FieldState::new(Model::D1Q3, l, 1)?;
    for x in 0..l {
        let rho = if x < l / 2 { rho1 } else { rho2 };
        s.set_site(x, 0, &feq_1d(rho, 0.0))?;
    }
    s.set_kind(0, 0, SiteKind::Wall)?;
    s.set_kind(l - 1, 0, SiteKind::Wall)?;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaylorGreen {
    pub nx: usize,
    pub ny: usize,
    pub u_max: f64,
    pub rho0: f64,
}

impl TaylorGreen {
    pub fn new(nx: usize, ny: usize) -> TaylorGreen {
        TaylorGreen { nx, ny, u_max: 0.1, rho0: 1.0 }
    }

    pub fn wavenumbers(&self) -> (f64, f64) {
        (2.0 * PI / self.nx as f64, 2.0 * PI / self.ny as f64)
    }

    /// Analytic fields at time `t` for viscosity `nu`; `pressure` is returned
    /// alongside, with `rho = rho0 + 3 P`.
    pub fn analytic(&self, t: f64, nu: f64) -> (MacroField, Vec<f64>) {
        let (kx, ky) = self.wavenumbers();
        let decay = (-nu * (kx * kx + ky * ky) * t).exp();
        let mut m = MacroField::zeros(self.nx, self.ny);
        let mut p = vec![0.0; self.nx * self.ny];
        for y in 0..self.ny {
            for x in 0..self.nx {
                let (ax, ay) = (kx * x as f64, ky * y as f64);
                let i = m.index(x, y);
                m.ux[i] = -self.u_max * (ky / kx).sqrt() * ax.cos() * ay.sin() * decay;
                m.uy[i] = self.u_max * (kx / ky).sqrt() * ax.sin() * ay.cos() * decay;
                p[i] = -0.25 * self.u_max * self.u_max * decay * decay
                    * ((ky / kx) * (2.0 * ax).cos() + (kx / ky) * (2.0 * ay).cos());
                m.rho[i] = self.rho0 + 3.0 * p[i];
            }
        }
        (m, p)
    }
}

/// Periodic Taylor-Green vortex initialised at its `t = 0` fields.
pub fn init_taylor_green(tg: &TaylorGreen) -> Result<FieldState, InitError> {
    let mut s = FieldState::new(Model::D2Q9, tg.nx, tg.ny)?;
    let (m, _) = tg.analytic(0.0, 0.0);
    fill_equilibrium(&mut s, &m);
    Ok(s)
}

pub fn taylor_green_analytic(tg: &TaylorGreen, t: f64, nu: f64) -> MacroField {
    tg.analytic(t, nu).0
}

/// Square cavity: walls on three sides, lid moving with `u_lid` along +x on top.
pub fn init_lid_cavity(l: usize, u_lid: f64, rho0: f64) -> Result<FieldState, InitError> {
    let mut s = FieldState::uniform(Model::D2Q9, l, l, rho0)?;
    for i in 0..l {
        s.set_kind(0, i, SiteKind::Wall)?;
        s.set_kind(l - 1, i, SiteKind::Wall)?;
        s.set_kind(i, 0, SiteKind::Wall)?;
    }
    // the lid spans the corners so its wall corrections cancel pairwise
    for x in 0..l {
        s.set_kind(x, l - 1, SiteKind::MovingWall { velocity: [u_lid, 0.0] })?;
    }
    Ok(s)
}
