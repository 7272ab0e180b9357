//! FLGA time stepping: collision, streaming and wall boundaries.

mod collide;
mod stream;

pub use collide::{Collider, NegativePolicy, Normalization};
pub use stream::{apply_boundaries, stream};

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::field::{FieldError, FieldState, Instability};
use crate::lattice::{LatticeError, Model};

#[derive(Debug, Error, PartialEq)]
pub enum FlgaError {
    #[error("negative distribution {} in channel {} at site ({}, {}) on step {}", .0.value, .0.channel, .0.x, .0.y, .0.step)]
    Instability(Instability),
    #[error("operator built for {operator}, state is {state}")]
    ModelMismatch { operator: Model, state: Model },
    #[error("collider needs at least one table")]
    NoTables,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A local collision rule applied to every fluid site.
pub trait CollisionOperator: Sync {
    fn model(&self) -> Model;
    fn collide(&self, state: &mut FieldState) -> Result<(), FlgaError>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    pub collide: Duration,
    pub stream: Duration,
    pub boundaries: Duration,
}

impl PhaseTimes {
    pub fn total(&self) -> Duration {
        self.collide + self.stream + self.boundaries
    }
}

/// `n` repetitions of collide, stream, apply_boundaries.
pub fn step<C: CollisionOperator + ?Sized>(state: &mut FieldState, op: &C, n: usize) -> Result<(), FlgaError> {
    let mut times = PhaseTimes::default();
    step_timed(state, op, n, &mut times)
}

pub fn step_timed<C: CollisionOperator + ?Sized>(
    state: &mut FieldState,
    op: &C,
    n: usize,
    times: &mut PhaseTimes,
) -> Result<(), FlgaError> {
    if op.model() != state.model {
        return Err(FlgaError::ModelMismatch { operator: op.model(), state: state.model });
    }
    for _ in 0..n {
        let t0 = Instant::now();
        op.collide(state)?;
        let t1 = Instant::now();
        stream(state);
        let t2 = Instant::now();
        apply_boundaries(state);
        let t3 = Instant::now();
        times.collide += t1 - t0;
        times.stream += t2 - t1;
        times.boundaries += t3 - t2;
        state.time += 1;
    }
    Ok(())
}
