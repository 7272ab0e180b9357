use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use itertools_free::combinations_with_replacement;

use super::descriptor::{LatticeDescriptor, Model};
use super::multiset::Multiset;
use super::LatticeError;

/// An unordered collision `{input, output}` stored with `input < output`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Collision {
    pub input: Multiset,
    pub output: Multiset,
}

impl Collision {
    fn new(a: Multiset, b: Multiset) -> Collision {
        if a <= b {
            Collision { input: a, output: b }
        } else {
            Collision { input: b, output: a }
        }
    }

    fn map(&self, perm: &[usize]) -> Collision {
        Collision::new(self.input.map(perm), self.output.map(perm))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceClass {
    pub model: Model,
    pub k: usize,
    /// Position in the rate vector.
    pub class_index: usize,
    /// Sorted members; the first is the canonical representative.
    pub members: Vec<Collision>,
}

impl EquivalenceClass {
    pub fn representative(&self) -> Collision {
        self.members[0]
    }
}

/// Rate-vector order for two-body D2Q9 classes, given as positions in the
/// canonical (representative-sorted) order. Chosen so that the shear-stress
/// rate reads `(8λ1 + λ3 + 2(λ4 + λ6 + 2λ7 + 4λ8)) / 9`.
const D2Q9_K2_ORDER: [usize; 9] = [3, 0, 1, 6, 5, 8, 2, 7, 4];

/// All k-in/k-out collisions conserving mass and momentum, grouped into
/// orbits of the lattice point group.
///
/// Input and output must not share a channel: a collision with a spectator
/// particle is the lower-order collision of the remaining particles.
pub fn enumerate_equivalence_classes(
    desc: &LatticeDescriptor,
    k: usize,
) -> Result<Vec<EquivalenceClass>, LatticeError> {
    if !(2..=4).contains(&k) {
        return Err(LatticeError::UnsupportedK(k));
    }
    let mut by_momentum: BTreeMap<[i32; 2], Vec<Multiset>> = BTreeMap::new();
    for combo in combinations_with_replacement(desc.q(), k) {
        let m = Multiset::new(&combo);
        by_momentum.entry(m.momentum(desc)).or_default().push(m);
    }

    let mut collisions = BTreeSet::new();
    for group in by_momentum.values() {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                if !a.overlaps(b) {
                    collisions.insert(Collision::new(*a, *b));
                }
            }
        }
    }

    let syms = desc.symmetries();
    let mut seen = BTreeSet::new();
    let mut orbits: Vec<Vec<Collision>> = Vec::new();
    for c in &collisions {
        if seen.contains(c) {
            continue;
        }
        let orbit: BTreeSet<Collision> = syms.iter().map(|p| c.map(p)).collect();
        seen.extend(orbit.iter().copied());
        orbits.push(orbit.into_iter().collect());
    }
    // orbits are discovered in ascending order of their smallest member

    if desc.model == Model::D2Q9 && k == 2 {
        assert_eq!(orbits.len(), D2Q9_K2_ORDER.len());
        orbits = D2Q9_K2_ORDER.iter().map(|&i| orbits[i].clone()).collect();
    }

    Ok(orbits
        .into_iter()
        .enumerate()
        .map(|(class_index, members)| EquivalenceClass { model: desc.model, k, class_index, members })
        .collect())
}

/// Class table for audit and remapping: one row per member.
pub fn write_class_table_csv<W: Write>(classes: &[EquivalenceClass], mut w: W) -> io::Result<()> {
    writeln!(w, "class_index,class_size,representative_in,representative_out,in_multiset,out_multiset")?;
    for class in classes {
        let rep = class.representative();
        for m in &class.members {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                class.class_index,
                class.members.len(),
                rep.input.to_field(),
                rep.output.to_field(),
                m.input.to_field(),
                m.output.to_field()
            )?;
        }
    }
    Ok(())
}

mod itertools_free {
    /// Non-decreasing index tuples of length `k` over `0..n`.
    pub fn combinations_with_replacement(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = vec![0usize; k];
        loop {
            out.push(cur.clone());
            let mut i = k;
            while i > 0 && cur[i - 1] == n - 1 {
                i -= 1;
            }
            if i == 0 {
                return out;
            }
            let v = cur[i - 1] + 1;
            for c in &mut cur[i - 1..] {
                *c = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classes(model: Model, k: usize) -> Vec<EquivalenceClass> {
        enumerate_equivalence_classes(model.descriptor(), k).unwrap()
    }

    fn distinct_inputs(cs: &[EquivalenceClass]) -> usize {
        cs.iter()
            .flat_map(|c| c.members.iter().flat_map(|m| [m.input, m.output]))
            .collect::<BTreeSet<_>>()
            .len()
    }

    fn pair_count(cs: &[EquivalenceClass]) -> usize {
        cs.iter().map(|c| c.members.len()).sum()
    }

    #[test]
    fn combinations_match_binomial() {
        assert_eq!(itertools_free::combinations_with_replacement(9, 2).len(), 45);
        assert_eq!(itertools_free::combinations_with_replacement(9, 3).len(), 165);
        assert_eq!(itertools_free::combinations_with_replacement(3, 4).len(), 15);
    }

    #[test]
    fn rejects_unsupported_k() {
        let d = Model::D2Q9.descriptor();
        assert_eq!(enumerate_equivalence_classes(d, 1), Err(LatticeError::UnsupportedK(1)));
        assert_eq!(enumerate_equivalence_classes(d, 5), Err(LatticeError::UnsupportedK(5)));
    }

    #[test]
    fn d1q3_two_body_single_class() {
        let cs = classes(Model::D1Q3, 2);
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].members, vec![Collision::new(Multiset::new(&[0, 0]), Multiset::new(&[1, 2]))]);
    }

    #[test]
    fn d1q3_higher_order_collisions() {
        assert!(classes(Model::D1Q3, 3).is_empty());
        let k4 = classes(Model::D1Q3, 4);
        assert_eq!(k4.len(), 1);
        assert_eq!(k4[0].members, vec![Collision::new(Multiset::new(&[0, 0, 0, 0]), Multiset::new(&[1, 1, 2, 2]))]);
    }

    #[test]
    fn d2q9_counts() {
        let k2 = classes(Model::D2Q9, 2);
        assert_eq!((k2.len(), pair_count(&k2), distinct_inputs(&k2)), (9, 30, 33));
        let k3 = classes(Model::D2Q9, 3);
        assert_eq!((k3.len(), pair_count(&k3), distinct_inputs(&k3)), (14, 78, 87));
        let k4 = classes(Model::D2Q9, 4);
        assert_eq!((k4.len(), pair_count(&k4), distinct_inputs(&k4)), (75, 401, 291));
    }

    #[test]
    fn d2q9_two_body_rate_order() {
        let reps: Vec<(Vec<usize>, Vec<usize>)> = classes(Model::D2Q9, 2)
            .iter()
            .map(|c| {
                let r = c.representative();
                (r.input.channels().collect(), r.output.channels().collect())
            })
            .collect();
        let expected = [
            ([0, 5], [1, 2]),
            ([0, 0], [1, 3]),
            ([0, 0], [5, 7]),
            ([1, 3], [5, 7]),
            ([1, 3], [2, 4]),
            ([5, 7], [6, 8]),
            ([0, 1], [2, 8]),
            ([1, 6], [3, 5]),
            ([1, 1], [5, 8]),
        ];
        for (got, want) in reps.iter().zip(expected) {
            assert_eq!((got.0.as_slice(), got.1.as_slice()), (&want.0[..], &want.1[..]));
        }
    }

    #[test]
    fn members_conserve_and_are_symmetry_closed() {
        for (model, k) in [(Model::D1Q3, 2), (Model::D2Q9, 2), (Model::D2Q9, 3), (Model::D2Q9, 4)] {
            let d = model.descriptor();
            let syms = d.symmetries();
            for class in classes(model, k) {
                let set: BTreeSet<_> = class.members.iter().copied().collect();
                for m in &class.members {
                    assert_eq!(m.input.len(), k);
                    assert_eq!(m.output.len(), k);
                    assert_ne!(m.input, m.output);
                    assert_eq!(m.input.momentum(d), m.output.momentum(d));
                    for p in &syms {
                        assert!(set.contains(&m.map(p)));
                    }
                }
            }
        }
    }

    #[test]
    fn class_csv_has_one_row_per_member() {
        let cs = classes(Model::D2Q9, 2);
        let mut buf = Vec::new();
        write_class_table_csv(&cs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 31);
        assert_eq!(text.lines().nth(1).unwrap(), "0,4,0 5,1 2,0 5,1 2");
    }
}
