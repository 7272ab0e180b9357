//! Distribution-function grid, site flags and macroscopic moments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{LatticeDescriptor, Model};

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("invalid grid {nx}x{ny} for {model}")]
    BadShape { model: Model, nx: usize, ny: usize },
    #[error("site ({x}, {y}) outside {nx}x{ny} grid")]
    OutOfBounds { x: usize, y: usize, nx: usize, ny: usize },
    #[error("wall speed {0} is not below the lattice speed 1")]
    WallSpeed(f64),
    #[error("distribution slice has {got} entries, expected {expected}")]
    SliceLength { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum SiteKind {
    #[default]
    Fluid,
    /// Stationary bounce-back wall.
    Wall,
    /// Bounce-back wall moving tangentially with `velocity`.
    MovingWall { velocity: [f64; 2] },
}

impl SiteKind {
    #[inline]
    pub fn is_fluid(&self) -> bool {
        matches!(self, SiteKind::Fluid)
    }
}

/// Negative (or non-finite) distribution value produced by a collision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instability {
    pub step: u64,
    pub x: usize,
    pub y: usize,
    pub channel: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MacroField {
    pub nx: usize,
    pub ny: usize,
    pub rho: Vec<f64>,
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
}

impl MacroField {
    pub fn zeros(nx: usize, ny: usize) -> MacroField {
        let n = nx * ny;
        MacroField { nx, ny, rho: vec![0.0; n], ux: vec![0.0; n], uy: vec![0.0; n] }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }
}

/// Row-major grid (`x` fastest) of `Q` distribution values per site.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub model: Model,
    pub nx: usize,
    pub ny: usize,
    pub f: Vec<f64>,
    pub(crate) post: Vec<f64>,
    pub sites: Vec<SiteKind>,
    pub instabilities: Vec<Instability>,
    /// Completed time steps.
    pub time: u64,
}

impl FieldState {
    pub fn new(model: Model, nx: usize, ny: usize) -> Result<FieldState, FieldError> {
        if nx == 0 || ny == 0 || (model == Model::D1Q3 && ny != 1) {
            return Err(FieldError::BadShape { model, nx, ny });
        }
        let len = nx * ny * model.descriptor().q();
        Ok(FieldState {
            model,
            nx,
            ny,
            f: vec![0.0; len],
            post: vec![0.0; len],
            sites: vec![SiteKind::Fluid; nx * ny],
            instabilities: Vec::new(),
            time: 0,
        })
    }

    /// Uniform rest state with density `rho` on every site.
    pub fn uniform(model: Model, nx: usize, ny: usize, rho: f64) -> Result<FieldState, FieldError> {
        let mut s = Self::new(model, nx, ny)?;
        let w = &model.descriptor().weights;
        for site in s.f.chunks_exact_mut(w.len()) {
            for (fi, wi) in site.iter_mut().zip(w) {
                *fi = rho * wi;
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn descriptor(&self) -> &'static LatticeDescriptor {
        self.model.descriptor()
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.descriptor().q()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    fn check(&self, x: usize, y: usize) -> Result<usize, FieldError> {
        if x >= self.nx || y >= self.ny {
            return Err(FieldError::OutOfBounds { x, y, nx: self.nx, ny: self.ny });
        }
        Ok(self.index(x, y))
    }

    pub fn site(&self, x: usize, y: usize) -> &[f64] {
        let q = self.q();
        let i = self.index(x, y);
        &self.f[i * q..(i + 1) * q]
    }

    pub fn site_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let q = self.q();
        let i = self.index(x, y);
        &mut self.f[i * q..(i + 1) * q]
    }

    pub fn set_site(&mut self, x: usize, y: usize, f: &[f64]) -> Result<(), FieldError> {
        self.check(x, y)?;
        if f.len() != self.q() {
            return Err(FieldError::SliceLength { expected: self.q(), got: f.len() });
        }
        self.site_mut(x, y).copy_from_slice(f);
        Ok(())
    }

    /// Sets a site flag. Solid sites hold no mass.
    pub fn set_kind(&mut self, x: usize, y: usize, kind: SiteKind) -> Result<(), FieldError> {
        let i = self.check(x, y)?;
        if let SiteKind::MovingWall { velocity } = kind {
            let speed = velocity[0].hypot(velocity[1]);
            if !(speed < 1.0) {
                return Err(FieldError::WallSpeed(speed));
            }
        }
        self.sites[i] = kind;
        if !kind.is_fluid() {
            let q = self.q();
            self.f[i * q..(i + 1) * q].iter_mut().for_each(|v| *v = 0.0);
        }
        Ok(())
    }

    pub fn kind(&self, x: usize, y: usize) -> SiteKind {
        self.sites[self.index(x, y)]
    }

    pub fn fluid_sites(&self) -> usize {
        self.sites.iter().filter(|s| s.is_fluid()).count()
    }

    pub fn total_mass(&self) -> f64 {
        self.f.iter().sum()
    }

    pub fn total_momentum(&self) -> [f64; 2] {
        let d = self.descriptor();
        self.f.chunks_exact(d.q()).fold([0.0; 2], |acc, site| {
            let m = d.momentum(site);
            [acc[0] + m[0], acc[1] + m[1]]
        })
    }

    /// Density and velocity per site; velocity is 0 where density is 0.
    pub fn macroscopic(&self) -> MacroField {
        let d = self.descriptor();
        let mut m = MacroField::zeros(self.nx, self.ny);
        for (i, site) in self.f.chunks_exact(d.q()).enumerate() {
            let rho = d.density(site);
            m.rho[i] = rho;
            if rho > 0.0 {
                let p = d.momentum(site);
                m.ux[i] = p[0] / rho;
                m.uy[i] = p[1] / rho;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_validation() {
        assert!(FieldState::new(Model::D1Q3, 10, 2).is_err());
        assert!(FieldState::new(Model::D2Q9, 0, 3).is_err());
        assert!(FieldState::new(Model::D2Q9, 4, 3).is_ok());
    }

    #[test]
    fn weights_give_unit_density_at_rest() {
        let s = FieldState::uniform(Model::D1Q3, 1, 1, 1.0).unwrap();
        let m = s.macroscopic();
        assert_eq!(m.rho[0], 1.0);
        assert_eq!(m.ux[0], 0.0);
    }

    #[test]
    fn empty_site_has_zero_velocity() {
        let s = FieldState::new(Model::D2Q9, 2, 2).unwrap();
        let m = s.macroscopic();
        assert!(m.ux.iter().chain(&m.uy).all(|&u| u == 0.0));
    }

    #[test]
    fn walls_reject_lattice_speed() {
        let mut s = FieldState::new(Model::D2Q9, 3, 3).unwrap();
        assert_eq!(
            s.set_kind(0, 0, SiteKind::MovingWall { velocity: [1.0, 0.0] }),
            Err(FieldError::WallSpeed(1.0))
        );
        assert!(s.set_kind(0, 0, SiteKind::MovingWall { velocity: [0.2, 0.0] }).is_ok());
        assert!(s.set_kind(5, 0, SiteKind::Wall).is_err());
    }

    #[test]
    fn setting_a_wall_clears_its_mass() {
        let mut s = FieldState::uniform(Model::D1Q3, 4, 1, 1.0).unwrap();
        s.set_kind(0, 0, SiteKind::Wall).unwrap();
        assert!((s.total_mass() - 3.0).abs() < 1e-15);
        assert_eq!(s.fluid_sites(), 3);
    }
}
