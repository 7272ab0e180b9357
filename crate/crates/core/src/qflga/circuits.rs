use std::f64::consts::PI;

use super::gate::{Circuit, Gate, GateKind};
use super::{QuantumError, RegisterLayout};

/// `θ = 2 asin(√p)`, so a rotated branch carries probability `p`.
pub fn angle_from_probability(p: f64) -> Result<f64, QuantumError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QuantumError::Probability(p));
    }
    Ok(2.0 * p.sqrt().asin())
}

/// Rotation angles `(θ, φ)` reproducing the classical two-body rates:
/// split `Cλ/16` per moving channel and merge `Cλ`.
pub fn collision_angles(lambda: f64, c: f64) -> Result<(f64, f64), QuantumError> {
    let rate = lambda * c;
    if !(rate >= 0.0) {
        return Err(QuantumError::Probability(rate));
    }
    if rate > 1.0 {
        return Err(QuantumError::MergeRate(rate));
    }
    Ok((angle_from_probability(rate / 8.0)?, angle_from_probability(rate)?))
}

fn reg_is(lo: usize, hi: usize, value: u8) -> [(usize, bool); 2] {
    [(lo, value & 1 == 1), (hi, value & 2 == 2)]
}

const REST: u8 = 0;
const RIGHT: u8 = 1;
const LEFT: u8 = 2;

/// Copy `c1 -> c3`, then the three collision boxes.
pub fn collision_circuit(layout: &RegisterLayout, lambda: f64, c: f64) -> Result<Circuit, QuantumError> {
    let (theta, phi) = collision_angles(lambda, c)?;
    let [c1l, c1h] = layout.c1();
    let [c2l, c2h] = layout.c2();
    let [c3l, c3h] = layout.c3();
    let a = layout.ancilla();
    let mut k = Circuit::new(layout.qubits());

    // A: copy
    k.push(Gate::new(GateKind::X, c3l).control(c1l, true));
    k.push(Gate::new(GateKind::X, c3h).control(c1h, true));

    // B: rest + rest -> right + left
    let flag = Gate::new(GateKind::X, a).controls(&reg_is(c1l, c1h, REST)).controls(&reg_is(c2l, c2h, REST));
    k.push(flag.clone());
    k.push(Gate::new(GateKind::Ry(theta), c3l).control(a, true).controls(&reg_is(c1l, c1h, REST)));
    k.push(Gate::new(GateKind::H, c3h).control(c3l, true).controls(&reg_is(c1l, c1h, REST)));
    k.push(Gate::new(GateKind::X, c3l).control(c3h, true).controls(&reg_is(c1l, c1h, REST)));
    k.push(flag);

    // C1: left + right -> rest, on the left copy
    let flag = Gate::new(GateKind::X, a).controls(&reg_is(c1l, c1h, LEFT)).controls(&reg_is(c2l, c2h, RIGHT));
    k.push(flag.clone());
    k.push(Gate::new(GateKind::Ry(phi), c3h).control(a, true).controls(&reg_is(c1l, c1h, LEFT)));
    k.push(flag);

    // C2: right + left -> rest, on the right copy
    let flag = Gate::new(GateKind::X, a).controls(&reg_is(c1l, c1h, RIGHT)).controls(&reg_is(c2l, c2h, LEFT));
    k.push(flag.clone());
    k.push(Gate::new(GateKind::Ry(phi), c3l).control(a, true).controls(&reg_is(c1l, c1h, RIGHT)));
    k.push(flag);
    Ok(k)
}

/// Lattice shift by ±1 conditioned on `c3`, as a cyclic permutation gate.
pub fn propagation_circuit(layout: &RegisterLayout) -> Circuit {
    let [c3l, c3h] = layout.c3();
    let w = layout.lattice_qubits;
    let mut k = Circuit::new(layout.qubits());
    if w == 0 {
        return k;
    }
    k.push(Gate::new(GateKind::Shift { width: w, offset: 1 }, 0).controls(&reg_is(c3l, c3h, RIGHT)));
    k.push(Gate::new(GateKind::Shift { width: w, offset: -1 }, 0).controls(&reg_is(c3l, c3h, LEFT)));
    k
}

/// Fourier transform of the lattice register without the final swaps:
/// qubit `j` ends up carrying phase `2π x / 2^(j+1)`.
pub fn qft(width: usize, qubits: usize) -> Circuit {
    let mut k = Circuit::new(qubits);
    for j in (0..width).rev() {
        k.push(Gate::new(GateKind::H, j));
        for i in (0..j).rev() {
            k.push(Gate::new(GateKind::Phase(PI / (1u64 << (j - i)) as f64), j).control(i, true));
        }
    }
    k
}

/// Same map as [`propagation_circuit`] built from a Fourier-space adder.
pub fn propagation_circuit_qft(layout: &RegisterLayout) -> Circuit {
    let [c3l, c3h] = layout.c3();
    let w = layout.lattice_qubits;
    let f = qft(w, layout.qubits());
    let mut k = f.clone();
    for (value, offset) in [(RIGHT, 1.0), (LEFT, -1.0)] {
        for j in 0..w {
            let phi = 2.0 * PI * offset / (1u64 << (j + 1)) as f64;
            k.push(Gate::new(GateKind::Phase(phi), j).controls(&reg_is(c3l, c3h, value)));
        }
    }
    k.extend(&f.inverse());
    k
}
