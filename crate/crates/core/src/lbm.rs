//! Single-relaxation-time (BGK) lattice Boltzmann reference.

use rayon::prelude::*;
use thiserror::Error;

use crate::field::FieldState;
use crate::flga::{self, CollisionOperator, FlgaError};
use crate::lattice::{Model, MAX_Q};

#[derive(Debug, Error, PartialEq)]
pub enum LbmError {
    #[error("relaxation time {0} must exceed 0.5")]
    Tau(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BgkParams {
    tau: f64,
}

impl BgkParams {
    pub fn new(tau: f64) -> Result<BgkParams, LbmError> {
        if !(tau > 0.5) || !tau.is_finite() {
            return Err(LbmError::Tau(tau));
        }
        Ok(BgkParams { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// Second-order polynomial equilibrium.
pub fn lbm_feq(model: Model, rho: f64, u: [f64; 2], out: &mut [f64]) {
    let d = model.descriptor();
    let uu = u[0] * u[0] + u[1] * u[1];
    for ((o, v), w) in out.iter_mut().zip(&d.velocities).zip(&d.weights) {
        let vu = v[0] as f64 * u[0] + v[1] as f64 * u[1];
        *o = w * rho * (1.0 + 3.0 * vu + 4.5 * vu * vu - 1.5 * uu);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Bgk {
    pub model: Model,
    pub params: BgkParams,
    pub parallel: bool,
}

impl Bgk {
    pub fn new(model: Model, params: BgkParams) -> Bgk {
        Bgk { model, params, parallel: true }
    }
}

impl CollisionOperator for Bgk {
    fn model(&self) -> Model {
        self.model
    }

    fn collide(&self, state: &mut FieldState) -> Result<(), FlgaError> {
        if state.model != self.model {
            return Err(FlgaError::ModelMismatch { operator: self.model, state: state.model });
        }
        let d = self.model.descriptor();
        let q = d.q();
        let omega = 1.0 / self.params.tau;
        let site = |(f, kind): (&mut [f64], &crate::field::SiteKind)| {
            if !kind.is_fluid() {
                return;
            }
            let rho = d.density(f);
            if rho <= 0.0 {
                return;
            }
            let m = d.momentum(f);
            let mut eq = [0.0; MAX_Q];
            lbm_feq(self.model, rho, [m[0] / rho, m[1] / rho], &mut eq[..q]);
            for (fi, e) in f.iter_mut().zip(&eq[..q]) {
                *fi -= (*fi - e) * omega;
            }
        };
        if self.parallel && state.len() >= 1 << 14 {
            state.f.par_chunks_exact_mut(q).zip(state.sites.par_iter()).for_each(site);
        } else {
            state.f.chunks_exact_mut(q).zip(state.sites.iter()).for_each(site);
        }
        Ok(())
    }
}

/// `n` BGK steps with the shared streaming and boundary code.
pub fn lbm_step(state: &mut FieldState, params: BgkParams, n: usize) -> Result<(), FlgaError> {
    flga::step(state, &Bgk::new(state.model, params), n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_must_exceed_half() {
        assert!(BgkParams::new(0.5).is_err());
        assert!(BgkParams::new(f64::NAN).is_err());
        assert!(BgkParams::new(0.51).is_ok());
    }

    #[test]
    fn feq_moments() {
        for model in [Model::D1Q3, Model::D2Q9] {
            let d = model.descriptor();
            let mut f = vec![0.0; d.q()];
            lbm_feq(model, 1.0, [0.0, 0.0], &mut f);
            assert!(f.iter().zip(&d.weights).all(|(a, b)| (a - b).abs() < 1e-16));
            let u = if model == Model::D1Q3 { [0.2, 0.0] } else { [0.1, -0.07] };
            lbm_feq(model, 1.7, u, &mut f);
            let m = d.momentum(&f);
            assert!((d.density(&f) - 1.7).abs() < 1e-14);
            assert!((m[0] - 1.7 * u[0]).abs() < 1e-14 && (m[1] - 1.7 * u[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn collision_conserves_and_large_tau_is_identity() {
        let mut s = FieldState::new(Model::D2Q9, 3, 2).unwrap();
        for (i, v) in s.f.iter_mut().enumerate() {
            *v = 0.1 + (i % 7) as f64 * 0.03;
        }
        let before = s.clone();
        Bgk::new(Model::D2Q9, BgkParams::new(0.8).unwrap()).collide(&mut s).unwrap();
        let d = Model::D2Q9.descriptor();
        for (a, b) in s.f.chunks(9).zip(before.f.chunks(9)) {
            assert!((d.density(a) - d.density(b)).abs() < 1e-12);
            let (ma, mb) = (d.momentum(a), d.momentum(b));
            assert!((ma[0] - mb[0]).abs() < 1e-12 && (ma[1] - mb[1]).abs() < 1e-12);
        }
        let mut t = before.clone();
        Bgk::new(Model::D2Q9, BgkParams::new(1e300).unwrap()).collide(&mut t).unwrap();
        assert_eq!(t.f, before.f);
    }

    #[test]
    fn uniform_equilibrium_is_stationary() {
        let mut s = FieldState::new(Model::D2Q9, 4, 4).unwrap();
        let mut eq = [0.0; 9];
        lbm_feq(Model::D2Q9, 1.0, [0.05, 0.02], &mut eq);
        for site in s.f.chunks_exact_mut(9) {
            site.copy_from_slice(&eq);
        }
        let before = s.f.clone();
        lbm_step(&mut s, BgkParams::new(0.7).unwrap(), 10).unwrap();
        assert!(s.f.iter().zip(&before).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
