use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CollisionOperator, FlgaError};
use crate::field::{FieldState, Instability, SiteKind};
use crate::lattice::{CollisionTable, LatticeDescriptor, Model, MAX_Q};

/// Density used in the `rho^(k-1)` denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Local site density.
    #[default]
    Local,
    /// Mean density over fluid sites, fixed for the step.
    GlobalMean,
}

/// Treatment of negative post-collision values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NegativePolicy {
    /// Record, set to 0 and rescale the site back to its density.
    #[default]
    Clamp,
    /// Record and fail the step.
    Strict,
}

const PAR_THRESHOLD: usize = 1 << 14;

/// FLGA collision with one or more tables, applied in ascending body count.
#[derive(Clone, Debug)]
pub struct Collider {
    model: Model,
    tables: Vec<CollisionTable>,
    pub normalization: Normalization,
    pub negative: NegativePolicy,
    pub parallel: bool,
}

impl Collider {
    pub fn new(mut tables: Vec<CollisionTable>) -> Result<Collider, FlgaError> {
        let model = tables.first().ok_or(FlgaError::NoTables)?.model;
        if let Some(t) = tables.iter().find(|t| t.model != model) {
            return Err(FlgaError::ModelMismatch { operator: model, state: t.model });
        }
        tables.sort_by_key(|t| t.k);
        Ok(Collider {
            model,
            tables,
            normalization: Normalization::Local,
            negative: NegativePolicy::Clamp,
            parallel: true,
        })
    }

    pub fn single(table: CollisionTable) -> Collider {
        Self::new(vec![table]).expect("one table")
    }

    pub fn with_normalization(mut self, n: Normalization) -> Self {
        self.normalization = n;
        self
    }

    pub fn with_negative(mut self, p: NegativePolicy) -> Self {
        self.negative = p;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn tables(&self) -> &[CollisionTable] {
        &self.tables
    }

    /// Total collision increment for one site (all tables, in order).
    pub fn increment(&self, f: &[f64]) -> Vec<f64> {
        let d = self.model.descriptor();
        let mut cur = [0.0; MAX_Q];
        cur[..d.q()].copy_from_slice(f);
        self.collide_site(d, &mut cur[..d.q()], None);
        cur[..d.q()].iter().zip(f).map(|(a, b)| a - b).collect()
    }

    #[inline]
    fn collide_site(&self, d: &LatticeDescriptor, f: &mut [f64], fixed_rho: Option<f64>) {
        let mut inc = [0.0; MAX_Q];
        let q = d.q();
        for table in &self.tables {
            let rho = fixed_rho.unwrap_or_else(|| d.density(f));
            table.site_increment(f, rho, &mut inc[..q]);
            for (fi, di) in f.iter_mut().zip(&inc[..q]) {
                *fi += di;
            }
        }
    }

    /// Checks a collided site; clamps under `Clamp`. Returns the first bad channel.
    #[inline]
    fn police(&self, d: &LatticeDescriptor, f: &mut [f64], rho_before: f64) -> Option<(usize, f64)> {
        let bad = f.iter().position(|v| !(*v >= 0.0))?;
        let value = f[bad];
        if self.negative == NegativePolicy::Clamp {
            for v in f.iter_mut() {
                if !(*v >= 0.0) {
                    *v = 0.0;
                }
            }
            let rho = d.density(f);
            if rho > 0.0 && rho_before.is_finite() {
                let s = rho_before / rho;
                f.iter_mut().for_each(|v| *v *= s);
            }
        }
        Some((bad, value))
    }
}

impl CollisionOperator for Collider {
    fn model(&self) -> Model {
        self.model
    }

    fn collide(&self, state: &mut FieldState) -> Result<(), FlgaError> {
        if state.model != self.model {
            return Err(FlgaError::ModelMismatch { operator: self.model, state: state.model });
        }
        let d = self.model.descriptor();
        let q = d.q();
        let fixed_rho = match self.normalization {
            Normalization::Local => None,
            Normalization::GlobalMean => {
                let n = state.fluid_sites();
                Some(if n > 0 { state.total_mass() / n as f64 } else { 0.0 })
            }
        };
        let site_fn = |(idx, (f, kind)): (usize, (&mut [f64], &SiteKind))| -> Option<(usize, usize, f64)> {
            if !kind.is_fluid() {
                return None;
            }
            let rho_before = d.density(f);
            self.collide_site(d, f, fixed_rho);
            self.police(d, f, rho_before).map(|(c, v)| (idx, c, v))
        };
        let bad: Vec<(usize, usize, f64)> = if self.parallel && state.len() >= PAR_THRESHOLD {
            state.f.par_chunks_exact_mut(q).zip(state.sites.par_iter()).enumerate().filter_map(site_fn).collect()
        } else {
            state.f.chunks_exact_mut(q).zip(state.sites.iter()).enumerate().filter_map(site_fn).collect()
        };
        if bad.is_empty() {
            return Ok(());
        }
        let step = state.time;
        let nx = state.nx;
        let flags = bad.iter().map(|&(idx, channel, value)| Instability { step, x: idx % nx, y: idx / nx, channel, value });
        state.instabilities.extend(flags);
        match self.negative {
            NegativePolicy::Clamp => Ok(()),
            NegativePolicy::Strict => {
                let first = bad[0];
                Err(FlgaError::Instability(Instability {
                    step,
                    x: first.0 % nx,
                    y: first.0 / nx,
                    channel: first.1,
                    value: first.2,
                }))
            }
        }
    }
}
