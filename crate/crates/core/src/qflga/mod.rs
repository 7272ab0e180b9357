//! Statevector emulation of one quantum FLGA step for D1Q3.
//!
//! Register layout, least significant qubit first: lattice position, then
//! three 2-qubit channel registers (`00` rest, `01` right, `10` left), then
//! one ancilla.

mod circuits;
mod gate;

pub use circuits::{
    angle_from_probability, collision_angles, collision_circuit, propagation_circuit, propagation_circuit_qft, qft,
};
pub use gate::{Circuit, CircuitParseError, Gate, GateKind};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::field::{FieldState, SiteKind};
use crate::lattice::Model;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("lattice length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("quantum emulation supports D1Q3 only")]
    Model,
    #[error("negative distribution {value} at site {x}")]
    Negative { x: usize, value: f64 },
    #[error("zero total mass")]
    ZeroMass,
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("merge probability C*lambda = {0} exceeds 1")]
    MergeRate(f64),
    #[error("moving walls are not supported")]
    MovingWall,
    #[error("state has {got} qubits, layout needs {expected}")]
    Qubits { expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    pub lattice_qubits: usize,
}

impl RegisterLayout {
    pub fn for_length(l: usize) -> Result<RegisterLayout, QuantumError> {
        if !l.is_power_of_two() {
            return Err(QuantumError::NotPowerOfTwo(l));
        }
        Ok(RegisterLayout { lattice_qubits: l.trailing_zeros() as usize })
    }

    pub fn sites(&self) -> usize {
        1 << self.lattice_qubits
    }

    pub fn qubits(&self) -> usize {
        self.lattice_qubits + 7
    }

    pub fn c1(&self) -> [usize; 2] {
        [self.lattice_qubits, self.lattice_qubits + 1]
    }

    pub fn c2(&self) -> [usize; 2] {
        [self.lattice_qubits + 2, self.lattice_qubits + 3]
    }

    pub fn c3(&self) -> [usize; 2] {
        [self.lattice_qubits + 4, self.lattice_qubits + 5]
    }

    pub fn ancilla(&self) -> usize {
        self.lattice_qubits + 6
    }

    /// Basis index of `|l, c1, c2, c3, a⟩`.
    pub fn index(&self, l: usize, c1: usize, c2: usize, c3: usize, a: usize) -> usize {
        let n = self.lattice_qubits;
        l | (c1 << n) | (c2 << (n + 2)) | (c3 << (n + 4)) | (a << (n + 6))
    }

    pub fn lattice_of(&self, i: usize) -> usize {
        i & (self.sites() - 1)
    }

    pub fn c3_of(&self, i: usize) -> usize {
        (i >> (self.lattice_qubits + 4)) & 3
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    pub layout: RegisterLayout,
    pub amps: Vec<Complex64>,
    /// Total mass removed by normalization, restored on measurement.
    pub mass: f64,
}

impl QuantumState {
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply(&mut self, circuit: &Circuit) -> Result<(), QuantumError> {
        if circuit.qubits != self.layout.qubits() {
            return Err(QuantumError::Qubits { expected: self.layout.qubits(), got: circuit.qubits });
        }
        circuit.apply(&mut self.amps);
        Ok(())
    }

    /// Measurement probabilities over `(lattice site, c3)`, `[site][channel]`.
    pub fn marginals(&self) -> Vec<[f64; 4]> {
        let mut p = vec![[0.0; 4]; self.layout.sites()];
        for (i, a) in self.amps.iter().enumerate() {
            p[self.layout.lattice_of(i)][self.layout.c3_of(i)] += a.norm_sqr();
        }
        p
    }
}

/// Amplitude encoding `√(f_c1 f_c2 / ρ)` over two channel registers,
/// normalized by the global mass.
pub fn encode(state: &FieldState) -> Result<QuantumState, QuantumError> {
    if state.model != Model::D1Q3 {
        return Err(QuantumError::Model);
    }
    let layout = RegisterLayout::for_length(state.nx)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << layout.qubits()];
    let d = state.descriptor();
    let mut mass = 0.0;
    for x in 0..state.nx {
        let f = state.site(x, 0);
        if let Some(&value) = f.iter().find(|v| !(**v >= 0.0)) {
            return Err(QuantumError::Negative { x, value });
        }
        let rho = d.density(f);
        mass += rho;
        if rho == 0.0 {
            continue;
        }
        for c1 in 0..3 {
            for c2 in 0..3 {
                amps[layout.index(x, c1, c2, 0, 0)] = Complex64::new((f[c1] * f[c2] / rho).sqrt(), 0.0);
            }
        }
    }
    if !(mass > 0.0) {
        return Err(QuantumError::ZeroMass);
    }
    let s = mass.sqrt().recip();
    amps.iter_mut().for_each(|a| *a *= s);
    Ok(QuantumState { layout, amps, mass })
}

/// Distribution from exact `(site, c3)` marginals times the stored mass.
pub fn measure_step(psi: &QuantumState) -> Result<FieldState, QuantumError> {
    let p = psi.marginals();
    let total: f64 = p.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(QuantumError::ZeroMass);
    }
    to_field(&p, psi.mass / total)
}

/// As [`measure_step`] but from `shots` simulated measurements.
pub fn measure_shots<R: Rng>(psi: &QuantumState, shots: u64, rng: &mut R) -> Result<FieldState, QuantumError> {
    let p = psi.marginals();
    let total: f64 = p.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(QuantumError::ZeroMass);
    }
    // multinomial through sequential conditional binomials
    let mut left = shots;
    let mut rest = 1.0;
    let mut counts = vec![[0.0; 4]; p.len()];
    for (cell, out) in p.iter().flatten().zip(counts.iter_mut().flatten()) {
        let pi = cell / total;
        if left == 0 || rest <= 0.0 {
            break;
        }
        let q = (pi / rest).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        *out = k as f64;
        left -= k;
        rest -= pi;
    }
    to_field(&counts, psi.mass / shots as f64)
}

fn to_field(p: &[[f64; 4]], scale: f64) -> Result<FieldState, QuantumError> {
    let mut out = FieldState::new(Model::D1Q3, p.len(), 1).map_err(|_| QuantumError::ZeroMass)?;
    for (x, cell) in p.iter().enumerate() {
        out.site_mut(x, 0).copy_from_slice(&[cell[0] * scale, cell[1] * scale, cell[2] * scale]);
    }
    Ok(out)
}

/// Folds mass that streamed onto solid sites back into the opposite
/// channel of the site it came from, and restores the site flags.
pub fn reflect_walls(measured: &mut FieldState, template: &FieldState) -> Result<(), QuantumError> {
    let d = Model::D1Q3.descriptor();
    let n = measured.nx as isize;
    for x in 0..measured.nx {
        match template.sites[x] {
            SiteKind::Fluid => continue,
            SiteKind::MovingWall { .. } => return Err(QuantumError::MovingWall),
            SiteKind::Wall => {}
        }
        for c in 1..3 {
            let m = measured.site(x, 0)[c];
            if m == 0.0 {
                continue;
            }
            let src = (x as isize - d.velocities[c][0] as isize).rem_euclid(n) as usize;
            measured.site_mut(src, 0)[d.opposite[c]] += m;
        }
        measured.site_mut(x, 0).iter_mut().for_each(|v| *v = 0.0);
    }
    measured.sites.clone_from(&template.sites);
    measured.time = template.time + 1;
    Ok(())
}

/// One full step: encode, collide, propagate, measure, wall fix.
pub fn qflga_step(state: &FieldState, lambda: f64, c: f64) -> Result<FieldState, QuantumError> {
    let mut psi = encode(state)?;
    let layout = psi.layout;
    psi.apply(&collision_circuit(&layout, lambda, c)?)?;
    psi.apply(&propagation_circuit(&layout))?;
    let mut out = measure_step(&psi)?;
    reflect_walls(&mut out, state)?;
    Ok(out)
}
