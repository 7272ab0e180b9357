use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::classes::EquivalenceClass;
use super::descriptor::{LatticeDescriptor, Model};
use super::multiset::Multiset;
use super::LatticeError;

/// How repeated-channel multiplicity enters the assembled kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    /// One term per unordered pair, weight 1.
    #[default]
    Unordered,
    /// Each term weighted by the number of orderings of its input and output.
    Ordered,
}

/// Directed collision term `input -> output`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionTerm {
    pub class_index: usize,
    pub input: Multiset,
    pub output: Multiset,
    /// `C * λ_class * min(1, w_out / w_in)`.
    pub coefficient: f64,
}

/// Per-input row of the assembled kernel: the site increment contributed by
/// a unit product `prod f_j` over `input`.
#[derive(Clone, Debug)]
pub(crate) struct KernelRow {
    pub input: Multiset,
    pub deltas: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct CollisionTable {
    pub model: Model,
    pub k: usize,
    pub lambdas: Vec<f64>,
    pub scale: f64,
    pub multiplicity: Multiplicity,
    pub terms: Vec<CollisionTerm>,
    pub(crate) rows: Vec<KernelRow>,
}

impl CollisionTable {
    pub fn build(
        desc: &LatticeDescriptor,
        classes: &[EquivalenceClass],
        lambdas: &[f64],
        scale: f64,
    ) -> Result<CollisionTable, LatticeError> {
        Self::build_with(desc, classes, lambdas, scale, Multiplicity::Unordered)
    }

    pub fn build_with(
        desc: &LatticeDescriptor,
        classes: &[EquivalenceClass],
        lambdas: &[f64],
        scale: f64,
        multiplicity: Multiplicity,
    ) -> Result<CollisionTable, LatticeError> {
        if lambdas.len() != classes.len() {
            return Err(LatticeError::LambdaLength { expected: classes.len(), got: lambdas.len() });
        }
        if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(LatticeError::BadRate(bad));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(LatticeError::BadScale(scale));
        }
        if let Some(c) = classes.iter().find(|c| c.model != desc.model) {
            return Err(LatticeError::ModelMismatch { expected: desc.model, found: c.model });
        }
        let k = classes.first().map_or(0, |c| c.k);

        let mut terms = Vec::new();
        for class in classes {
            let rate = scale * lambdas[class.class_index];
            for m in &class.members {
                for (a, b) in [(m.input, m.output), (m.output, m.input)] {
                    let ratio = b.weight(desc) / a.weight(desc);
                    terms.push(CollisionTerm {
                        class_index: class.class_index,
                        input: a,
                        output: b,
                        coefficient: rate * ratio.min(1.0),
                    });
                }
            }
        }

        let q = desc.q();
        let mut grouped: BTreeMap<Multiset, Vec<f64>> = BTreeMap::new();
        for t in &terms {
            if t.coefficient == 0.0 {
                continue;
            }
            let a = match multiplicity {
                Multiplicity::Unordered => t.coefficient,
                Multiplicity::Ordered => t.coefficient * (t.input.orderings() * t.output.orderings()) as f64,
            };
            let row = grouped.entry(t.input).or_insert_with(|| vec![0.0; q]);
            for c in t.output.channels() {
                row[c] += a;
            }
            for c in t.input.channels() {
                row[c] -= a;
            }
        }
        let rows = grouped
            .into_iter()
            .map(|(input, dense)| KernelRow {
                input,
                deltas: dense.into_iter().enumerate().filter(|(_, d)| *d != 0.0).collect(),
            })
            .collect();

        Ok(CollisionTable { model: desc.model, k, lambdas: lambdas.to_vec(), scale, multiplicity, terms, rows })
    }

    /// Convenience: enumerate classes and build with the same rate for all.
    pub fn uniform(model: Model, k: usize, lambda: f64, scale: f64) -> Result<CollisionTable, LatticeError> {
        let desc = model.descriptor();
        let classes = super::enumerate_equivalence_classes(desc, k)?;
        Self::build(desc, &classes, &vec![lambda; classes.len()], scale)
    }

    /// Number of distinct input products evaluated per site.
    pub fn distinct_inputs(&self) -> usize {
        self.rows.len()
    }

    /// Coefficient actually applied by the kernel for a term.
    pub fn assembled_coefficient(&self, term: &CollisionTerm) -> f64 {
        match self.multiplicity {
            Multiplicity::Unordered => term.coefficient,
            Multiplicity::Ordered => term.coefficient * (term.input.orderings() * term.output.orderings()) as f64,
        }
    }

    /// Collision increment at one site, `rho` given. Zero when `rho <= 0`.
    pub fn site_increment(&self, f: &[f64], rho: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        if rho <= 0.0 || self.rows.is_empty() {
            return;
        }
        let norm = rho.powi(self.k as i32 - 1).recip();
        for row in &self.rows {
            let p: f64 = row.input.channels().map(|c| f[c]).product();
            if p == 0.0 {
                continue;
            }
            let p = p * norm;
            for &(c, d) in &row.deltas {
                out[c] += d * p;
            }
        }
    }

    /// CSV dump: `class_index,in_multiset,out_multiset,coefficient`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "class_index,in_multiset,out_multiset,coefficient")?;
        for t in &self.terms {
            writeln!(w, "{},{},{},{:.17e}", t.class_index, t.input.to_field(), t.output.to_field(), t.coefficient)?;
        }
        Ok(())
    }
}
