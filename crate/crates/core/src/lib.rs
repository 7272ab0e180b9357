//! Float lattice gas automata solver with lattice Boltzmann, integer lattice
//! gas and quantum-circuit reference implementations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod lattice;
pub mod equilibrium;
pub mod field;
pub mod flga;
pub mod calibration;
pub mod lbm;
pub mod stats;
pub mod ilga;
pub mod qflga;
pub mod snapshot;
pub mod harness;
