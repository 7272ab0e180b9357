use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    X,
    H,
    /// Rotation about y by the given angle.
    Ry(f64),
    /// Phase `e^{iφ}` on the `|1⟩` component.
    Phase(f64),
    /// Cyclic add of `offset` to the `width`-qubit register starting at the target.
    Shift { width: usize, offset: i64 },
}

/// A gate with zero or more controls; each control fires on the given bit value.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<(usize, bool)>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize) -> Gate {
        Gate { kind, target, controls: Vec::new() }
    }

    pub fn control(mut self, qubit: usize, value: bool) -> Gate {
        self.controls.push((qubit, value));
        self
    }

    pub fn controls(mut self, cs: &[(usize, bool)]) -> Gate {
        self.controls.extend_from_slice(cs);
        self
    }

    fn span(&self) -> std::ops::Range<usize> {
        match self.kind {
            GateKind::Shift { width, .. } => self.target..self.target + width,
            _ => self.target..self.target + 1,
        }
    }

    pub fn inverse(&self) -> Gate {
        let kind = match self.kind {
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Phase(p) => GateKind::Phase(-p),
            GateKind::Shift { width, offset } => GateKind::Shift { width, offset: -offset },
            k => k,
        };
        Gate { kind, ..self.clone() }
    }

    fn mask(&self) -> (usize, usize) {
        let mut mask = 0;
        let mut want = 0;
        for &(q, v) in &self.controls {
            mask |= 1 << q;
            if v {
                want |= 1 << q;
            }
        }
        (mask, want)
    }

    /// Applies the gate in place; `scratch` must match `amps` in length.
    pub fn apply(&self, amps: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let (mask, want) = self.mask();
        let t = 1usize << self.target;
        let pair = |amps: &mut [Complex64], m: [[Complex64; 2]; 2]| {
            for i in 0..amps.len() {
                if i & t == 0 && i & mask == want {
                    let (a, b) = (amps[i], amps[i | t]);
                    amps[i] = m[0][0] * a + m[0][1] * b;
                    amps[i | t] = m[1][0] * a + m[1][1] * b;
                }
            }
        };
        let r = |x: f64| Complex64::new(x, 0.0);
        match self.kind {
            GateKind::X => {
                for i in 0..amps.len() {
                    if i & t == 0 && i & mask == want {
                        amps.swap(i, i | t);
                    }
                }
            }
            GateKind::H => {
                let s = r(std::f64::consts::FRAC_1_SQRT_2);
                pair(amps, [[s, s], [s, -s]]);
            }
            GateKind::Ry(theta) => {
                let (sn, cs) = (theta / 2.0).sin_cos();
                pair(amps, [[r(cs), r(-sn)], [r(sn), r(cs)]]);
            }
            GateKind::Phase(phi) => {
                let p = Complex64::from_polar(1.0, phi);
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & t != 0 && i & mask == want {
                        *a *= p;
                    }
                }
            }
            GateKind::Shift { width, offset } => {
                let size = 1i64 << width;
                let reg = (size as usize - 1) << self.target;
                scratch.clear();
                scratch.extend_from_slice(amps);
                for (i, a) in scratch.iter().enumerate() {
                    if i & mask == want {
                        let v = ((i & reg) >> self.target) as i64;
                        let nv = (v + offset).rem_euclid(size) as usize;
                        amps[(i & !reg) | (nv << self.target)] = *a;
                    }
                }
                for (i, a) in scratch.iter().enumerate() {
                    if i & mask != want {
                        amps[i] = *a;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing `qubits N` header")]
    MissingHeader,
}

/// Ordered gate list over a fixed number of qubits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub const MAX_QUBITS: usize = 30;

    pub fn new(qubits: usize) -> Circuit {
        Circuit { qubits, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn inverse(&self) -> Circuit {
        Circuit { qubits: self.qubits, gates: self.gates.iter().rev().map(Gate::inverse).collect() }
    }

    pub fn apply(&self, amps: &mut [Complex64]) {
        let mut scratch = Vec::new();
        for g in &self.gates {
            g.apply(amps, &mut scratch);
        }
    }

    /// Parses the text form written by `Display`:
    ///
    /// ```text
    /// qubits 14
    /// x 13 ctrl 7:0 8:0 9:0 10:0
    /// ry 11 0.7227342478134157 ctrl 13:1 7:0 8:0
    /// shift 0 7 -1 ctrl 11:0 12:1
    /// ```
    pub fn parse(text: &str) -> Result<Circuit, CircuitParseError> {
        let mut circuit: Option<Circuit> = None;
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: String| CircuitParseError::Syntax { line, msg };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut toks = body.split_whitespace();
            let op = toks.next().unwrap_or_default().to_ascii_lowercase();
            let toks: Vec<&str> = toks.collect();
            let (args, ctrl) = match toks.iter().position(|t| *t == "ctrl") {
                Some(p) => (&toks[..p], &toks[p + 1..]),
                None => (&toks[..], &toks[..0]),
            };
            if op == "qubits" {
                if circuit.is_some() {
                    return Err(err("duplicate header".into()));
                }
                let [q] = args else { return Err(err("expected `qubits N`".into())) };
                let q: usize = q.parse().map_err(|_| err(format!("bad qubit count `{q}`")))?;
                if q == 0 || q > Self::MAX_QUBITS {
                    return Err(err(format!("qubit count {q} outside 1..={}", Self::MAX_QUBITS)));
                }
                if !ctrl.is_empty() {
                    return Err(err("header takes no controls".into()));
                }
                circuit = Some(Circuit::new(q));
                continue;
            }
            let c = circuit.as_mut().ok_or(CircuitParseError::MissingHeader)?;
            let qubit = |s: &str| -> Result<usize, CircuitParseError> {
                let q: usize = s.parse().map_err(|_| err(format!("bad qubit `{s}`")))?;
                if q >= c.qubits {
                    return Err(err(format!("qubit {q} out of range")));
                }
                Ok(q)
            };
            let angle = |s: &str| -> Result<f64, CircuitParseError> {
                match s.parse::<f64>() {
                    Ok(a) if a.is_finite() => Ok(a),
                    _ => Err(err(format!("bad angle `{s}`"))),
                }
            };
            let gate = match (op.as_str(), args) {
                ("x", [t]) => Gate::new(GateKind::X, qubit(t)?),
                ("h", [t]) => Gate::new(GateKind::H, qubit(t)?),
                ("ry", [t, a]) => Gate::new(GateKind::Ry(angle(a)?), qubit(t)?),
                ("p", [t, a]) => Gate::new(GateKind::Phase(angle(a)?), qubit(t)?),
                ("shift", [t, w, o]) => {
                    let t = qubit(t)?;
                    let w: usize = w.parse().map_err(|_| err(format!("bad width `{w}`")))?;
                    let o: i64 = o.parse().map_err(|_| err(format!("bad offset `{o}`")))?;
                    if w == 0 || t + w > c.qubits {
                        return Err(err("shift register out of range".into()));
                    }
                    Gate::new(GateKind::Shift { width: w, offset: o }, t)
                }
                (op, _) => return Err(err(format!("unknown gate or arity `{op}`"))),
            };
            let mut gate = gate;
            for tok in ctrl {
                let (q, v) = tok.split_once(':').ok_or_else(|| err(format!("bad control `{tok}`")))?;
                let q = qubit(q)?;
                let v = match v {
                    "0" => false,
                    "1" => true,
                    _ => return Err(err(format!("bad control value `{v}`"))),
                };
                if gate.span().contains(&q) || gate.controls.iter().any(|c| c.0 == q) {
                    return Err(err(format!("control {q} overlaps target or repeats")));
                }
                gate.controls.push((q, v));
            }
            c.gates.push(gate);
        }
        circuit.ok_or(CircuitParseError::MissingHeader)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.qubits)?;
        for g in &self.gates {
            match g.kind {
                GateKind::X => write!(f, "x {}", g.target)?,
                GateKind::H => write!(f, "h {}", g.target)?,
                GateKind::Ry(a) => write!(f, "ry {} {:?}", g.target, a)?,
                GateKind::Phase(a) => write!(f, "p {} {:?}", g.target, a)?,
                GateKind::Shift { width, offset } => write!(f, "shift {} {} {}", g.target, width, offset)?,
            }
            if !g.controls.is_empty() {
                write!(f, " ctrl")?;
                for (q, v) in &g.controls {
                    write!(f, " {}:{}", q, u8::from(*v))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
