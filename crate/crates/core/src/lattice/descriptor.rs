use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::LatticeError;

/// Largest channel count of any supported lattice.
pub const MAX_Q: usize = 9;

/// Lattice sound speed squared, lattice units.
pub const CS2: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    D1Q3,
    D2Q9,
}

impl Model {
    pub fn descriptor(self) -> &'static LatticeDescriptor {
        build_descriptor(self)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::D1Q3 => "d1q3",
            Model::D2Q9 => "d2q9",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Model::D1Q3 => 1,
            Model::D2Q9 => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Model> {
        match tag {
            1 => Some(Model::D1Q3),
            2 => Some(Model::D2Q9),
            _ => None,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d1q3" => Ok(Model::D1Q3),
            "d2q9" => Ok(Model::D2Q9),
            other => Err(LatticeError::UnknownModel(other.to_string())),
        }
    }
}

/// Static geometry of a lattice: channel velocities, weights and symmetry.
///
/// Channel ordering for D2Q9:
/// ```text
///   6   2   5
///    \  |  /
///   3 - 0 - 1
///    /  |  \
///   7   4   8
/// ```
#[derive(Debug)]
pub struct LatticeDescriptor {
    pub model: Model,
    pub dimension: usize,
    /// Per-channel velocity `[vx, vy]`; `vy` is 0 in 1D.
    pub velocities: Vec<[i32; 2]>,
    pub weights: Vec<f64>,
    /// Exact weights as `(numerator, denominator)`.
    pub weight_ratios: Vec<(u64, u64)>,
    pub opposite: Vec<usize>,
}

impl LatticeDescriptor {
    #[inline]
    pub fn q(&self) -> usize {
        self.velocities.len()
    }

    pub fn channel_of(&self, v: [i32; 2]) -> Option<usize> {
        self.velocities.iter().position(|&c| c == v)
    }

    /// Site density summed as rest + opposite pairs, so that mirror images
    /// of a state give bit-identical densities.
    #[inline]
    pub fn density(&self, f: &[f64]) -> f64 {
        match self.model {
            Model::D1Q3 => f[0] + (f[1] + f[2]),
            Model::D2Q9 => f[0] + (f[1] + f[3]) + (f[2] + f[4]) + (f[5] + f[7]) + (f[6] + f[8]),
        }
    }

    #[inline]
    pub fn momentum(&self, f: &[f64]) -> [f64; 2] {
        let mut m = [0.0; 2];
        for (fi, v) in f.iter().zip(&self.velocities) {
            m[0] += *fi * v[0] as f64;
            m[1] += *fi * v[1] as f64;
        }
        m
    }

    /// Channel permutations of the lattice point group (90° rotations and
    /// mirrors). The identity is always first.
    pub fn symmetries(&self) -> Vec<Vec<usize>> {
        let maps: Vec<fn([i32; 2]) -> [i32; 2]> = match self.model {
            Model::D1Q3 => vec![|v| v, |v| [-v[0], v[1]]],
            Model::D2Q9 => vec![
                |v| v,
                |v| [-v[1], v[0]],
                |v| [-v[0], -v[1]],
                |v| [v[1], -v[0]],
                |v| [v[0], -v[1]],
                |v| [-v[0], v[1]],
                |v| [v[1], v[0]],
                |v| [-v[1], -v[0]],
            ],
        };
        maps.into_iter()
            .map(|g| {
                self.velocities
                    .iter()
                    .map(|&v| self.channel_of(g(v)).expect("lattice closed under its point group"))
                    .collect()
            })
            .collect()
    }
}

fn make(model: Model, velocities: Vec<[i32; 2]>, weight_ratios: Vec<(u64, u64)>) -> LatticeDescriptor {
    let weights = weight_ratios.iter().map(|&(n, d)| n as f64 / d as f64).collect();
    let opposite = velocities
        .iter()
        .map(|v| velocities.iter().position(|c| *c == [-v[0], -v[1]]).unwrap())
        .collect();
    let dimension = match model {
        Model::D1Q3 => 1,
        Model::D2Q9 => 2,
    };
    LatticeDescriptor { model, dimension, velocities, weights, weight_ratios, opposite }
}

static D1Q3: LazyLock<LatticeDescriptor> =
    LazyLock::new(|| make(Model::D1Q3, vec![[0, 0], [1, 0], [-1, 0]], vec![(2, 3), (1, 6), (1, 6)]));

static D2Q9: LazyLock<LatticeDescriptor> = LazyLock::new(|| {
    make(
        Model::D2Q9,
        vec![[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1], [1, 1], [-1, 1], [-1, -1], [1, -1]],
        vec![(4, 9), (1, 9), (1, 9), (1, 9), (1, 9), (1, 36), (1, 36), (1, 36), (1, 36)],
    )
});

pub fn build_descriptor(model: Model) -> &'static LatticeDescriptor {
    match model {
        Model::D1Q3 => &D1Q3,
        Model::D2Q9 => &D2Q9,
    }
}
