//! Integer lattice gas Monte Carlo collisions at a single site.
//!
//! Used as an oracle: the per-attempt mean change of the counts converges to
//! the FLGA increment evaluated at `f = n / N`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lattice::{CollisionTable, Model, Multiset};

#[derive(Debug, Error, PartialEq)]
pub enum IlgaError {
    #[error("need at least {need} particles, site holds {have}")]
    TooFewParticles { need: usize, have: u64 },
    #[error("outcome probabilities from {input} sum to {total} > 1")]
    ProbabilityExceeded { input: Multiset, total: f64 },
    #[error("counts have {got} channels, lattice has {expected}")]
    ChannelCount { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteCounts {
    pub n: Vec<u64>,
}

impl SiteCounts {
    pub fn new(n: Vec<u64>) -> SiteCounts {
        SiteCounts { n }
    }

    pub fn total(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn momentum(&self, model: Model) -> [i64; 2] {
        let d = model.descriptor();
        self.n.iter().zip(&d.velocities).fold([0, 0], |m, (&c, v)| {
            [m[0] + c as i64 * v[0] as i64, m[1] + c as i64 * v[1] as i64]
        })
    }

    pub fn fractions(&self) -> Vec<f64> {
        let t = self.total() as f64;
        self.n.iter().map(|&c| c as f64 / t).collect()
    }
}

/// Deterministic random stream: a seed plus a stream counter.
#[derive(Clone, Debug)]
pub struct RngStream {
    pub seed: u64,
    pub counter: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> RngStream {
        Self::with_counter(seed, 0)
    }

    pub fn with_counter(seed: u64, counter: u64) -> RngStream {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(counter);
        RngStream { seed, counter, rng }
    }

    /// Independent stream for the same seed.
    pub fn substream(&self, counter: u64) -> RngStream {
        Self::with_counter(self.seed, counter)
    }

    /// Uniform integer in `1..=n`.
    pub fn draw(&mut self, n: u64) -> u64 {
        self.rng.gen_range(1..=n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairDraw {
    /// Each later draw excludes the particles already picked.
    #[default]
    WithoutReplacement,
    WithReplacement,
}

/// Channel `s` with `sum(n[..s]) < r <= sum(n[..=s])`, for `r` in `1..=N`.
pub fn select_channel(n: &[u64], r: u64) -> usize {
    let mut acc = 0;
    for (i, &c) in n.iter().enumerate() {
        acc += c;
        if r <= acc {
            return i;
        }
    }
    panic!("draw {r} exceeds total {acc}");
}

/// Ordered draw of `k` particles.
pub fn sample_bodies(counts: &SiteCounts, k: usize, rng: &mut RngStream, mode: PairDraw) -> Result<Vec<usize>, IlgaError> {
    let total = counts.total();
    if total < k as u64 {
        return Err(IlgaError::TooFewParticles { need: k, have: total });
    }
    let mut n = counts.n.clone();
    let mut left = total;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let s = select_channel(&n, rng.draw(left));
        if mode == PairDraw::WithoutReplacement {
            n[s] -= 1;
            left -= 1;
        }
        out.push(s);
    }
    Ok(out)
}

pub fn sample_pair(counts: &SiteCounts, rng: &mut RngStream, mode: PairDraw) -> Result<(usize, usize), IlgaError> {
    let s = sample_bodies(counts, 2, rng, mode)?;
    Ok((s[0], s[1]))
}

/// Outcome probabilities per drawn input multiset.
///
/// An ordered draw lands on multiset `J` with probability proportional to
/// its number of orderings, so each outcome gets `A_JM / orderings(J)`.
#[derive(Clone, Debug)]
pub struct McTable {
    pub model: Model,
    pub k: usize,
    outcomes: HashMap<Multiset, Vec<(Multiset, f64)>>,
}

impl McTable {
    pub fn new(table: &CollisionTable) -> Result<McTable, IlgaError> {
        let mut outcomes: HashMap<Multiset, Vec<(Multiset, f64)>> = HashMap::new();
        for t in &table.terms {
            let p = table.assembled_coefficient(t) / t.input.orderings() as f64;
            if p > 0.0 {
                outcomes.entry(t.input).or_default().push((t.output, p));
            }
        }
        for (input, outs) in &outcomes {
            let total: f64 = outs.iter().map(|o| o.1).sum();
            if total > 1.0 + 1e-12 {
                return Err(IlgaError::ProbabilityExceeded { input: *input, total });
            }
        }
        Ok(McTable { model: table.model, k: table.k, outcomes })
    }

    /// Largest total outcome probability of any input at this table's scale.
    pub fn max_probability(table: &CollisionTable) -> f64 {
        let mut sums: HashMap<Multiset, f64> = HashMap::new();
        for t in &table.terms {
            *sums.entry(t.input).or_default() += table.assembled_coefficient(t) / t.input.orderings() as f64;
        }
        sums.values().copied().fold(0.0, f64::max)
    }

    fn pick(&self, input: &Multiset, u: f64) -> Option<Multiset> {
        let mut acc = 0.0;
        for (out, p) in self.outcomes.get(input)? {
            acc += p;
            if u < acc {
                return Some(*out);
            }
        }
        None
    }
}

/// One collision attempt; returns the fired `(input, output)` if any.
pub fn attempt(counts: &SiteCounts, table: &McTable, rng: &mut RngStream, mode: PairDraw) -> Result<Option<(Multiset, Multiset)>, IlgaError> {
    let drawn = sample_bodies(counts, table.k, rng, mode)?;
    let input = Multiset::new(&drawn);
    let u = rng.uniform();
    Ok(table.pick(&input, u).map(|out| (input, out)))
}

/// `c_int` sequential collision attempts.
pub fn mc_collide(
    counts: &SiteCounts,
    table: &McTable,
    c_int: usize,
    rng: &mut RngStream,
    mode: PairDraw,
) -> Result<SiteCounts, IlgaError> {
    let q = table.model.descriptor().q();
    if counts.n.len() != q {
        return Err(IlgaError::ChannelCount { expected: q, got: counts.n.len() });
    }
    let mut cur = counts.clone();
    for _ in 0..c_int {
        if let Some((input, output)) = attempt(&cur, table, rng, mode)? {
            input.channels().for_each(|c| cur.n[c] -= 1);
            output.channels().for_each(|c| cur.n[c] += 1);
        }
    }
    Ok(cur)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub trials: u64,
    /// Mean change of each channel count per attempt.
    pub mean: Vec<f64>,
    /// Standard error of `mean`.
    pub stderr: Vec<f64>,
}

impl EnsembleStats {
    /// Per-channel `|mean - expected| / stderr`; zero where both vanish.
    pub fn z_scores(&self, expected: &[f64]) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.stderr)
            .zip(expected)
            .map(|((m, s), e)| {
                let d = (m - e).abs();
                if *s > 0.0 {
                    d / s
                } else if d < 1e-15 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }
}

/// Single-attempt trials from a fixed start, split over rayon workers with
/// one substream per block.
pub fn ensemble_increment(
    counts: &SiteCounts,
    table: &McTable,
    trials: u64,
    seed: u64,
    mode: PairDraw,
) -> Result<EnsembleStats, IlgaError> {
    const BLOCKS: u64 = 64;
    let q = counts.n.len();
    sample_bodies(counts, table.k, &mut RngStream::new(seed), mode)?;
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..BLOCKS)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::with_counter(seed, b);
            let n = trials / BLOCKS + u64::from(b < trials % BLOCKS);
            let mut sum = vec![0.0; q];
            let mut sq = vec![0.0; q];
            let mut delta = vec![0i64; q];
            for _ in 0..n {
                if let Some((input, output)) = attempt(counts, table, &mut rng, mode).expect("checked above") {
                    delta.iter_mut().for_each(|d| *d = 0);
                    input.channels().for_each(|c| delta[c] -= 1);
                    output.channels().for_each(|c| delta[c] += 1);
                    for ((s, s2), &d) in sum.iter_mut().zip(sq.iter_mut()).zip(&delta) {
                        *s += d as f64;
                        *s2 += (d * d) as f64;
                    }
                }
            }
            (sum, sq)
        })
        .collect();
    let t = trials as f64;
    let mut mean = vec![0.0; q];
    let mut stderr = vec![0.0; q];
    for c in 0..q {
        let s: f64 = partial.iter().map(|p| p.0[c]).sum();
        let s2: f64 = partial.iter().map(|p| p.1[c]).sum();
        mean[c] = s / t;
        let var = (s2 / t - mean[c] * mean[c]).max(0.0) * t / (t - 1.0);
        stderr[c] = (var / t).sqrt();
    }
    Ok(EnsembleStats { trials, mean, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_rule() {
        assert_eq!(select_channel(&[3, 2, 1], 4), 1);
        assert_eq!(select_channel(&[3, 2, 1], 3), 0);
        assert_eq!(select_channel(&[3, 2, 1], 6), 2);
        let mut rng = RngStream::new(1);
        for _ in 0..100 {
            assert_eq!(sample_pair(&SiteCounts::new(vec![0, 5, 0]), &mut rng, PairDraw::WithoutReplacement).unwrap(), (1, 1));
        }
    }

    #[test]
    fn pair_needs_two_particles() {
        let mut rng = RngStream::new(1);
        let r = sample_pair(&SiteCounts::new(vec![1, 0, 0]), &mut rng, PairDraw::WithReplacement);
        assert_eq!(r, Err(IlgaError::TooFewParticles { need: 2, have: 1 }));
    }

    #[test]
    fn first_draw_frequencies_chi_square() {
        let counts = SiteCounts::new(vec![500, 300, 200]);
        let mut rng = RngStream::new(7);
        let draws = 1_000_000;
        let mut hits = [0u64; 3];
        for _ in 0..draws {
            hits[sample_pair(&counts, &mut rng, PairDraw::WithoutReplacement).unwrap().0] += 1;
        }
        let chi2: f64 = hits
            .iter()
            .zip(counts.fractions())
            .map(|(&h, p)| {
                let e = p * draws as f64;
                (h as f64 - e).powi(2) / e
            })
            .sum();
        // 2 dof, 99.9% quantile
        assert!(chi2 < 13.8, "{chi2}");
    }

    #[test]
    fn zero_attempts_is_identity() {
        let t = McTable::new(&CollisionTable::uniform(Model::D1Q3, 2, 1.0, 1.0).unwrap()).unwrap();
        let c = SiteCounts::new(vec![6, 3, 1]);
        assert_eq!(mc_collide(&c, &t, 0, &mut RngStream::new(3), PairDraw::WithoutReplacement).unwrap(), c);
    }

    #[test]
    fn rest_pair_splits_at_rate_over_sixteen() {
        let lambda = 1.0;
        let t = McTable::new(&CollisionTable::uniform(Model::D1Q3, 2, lambda, 1.0).unwrap()).unwrap();
        let c = SiteCounts::new(vec![2, 0, 0]);
        let trials = 400_000;
        let mut rng = RngStream::new(11);
        let mut fired = 0;
        for _ in 0..trials {
            let out = mc_collide(&c, &t, 1, &mut rng, PairDraw::WithoutReplacement).unwrap();
            if out.n == vec![0, 1, 1] {
                fired += 1;
            } else {
                assert_eq!(out, c);
            }
        }
        let p = lambda / 16.0;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((fired as f64 / trials as f64 - p).abs() < 4.0 * se);
    }

    #[test]
    fn collisions_conserve_mass_and_momentum() {
        let table = CollisionTable::uniform(Model::D2Q9, 3, 1.0, 1.0).unwrap();
        let scale = 1.0 / McTable::max_probability(&table);
        let t = McTable::new(&CollisionTable::uniform(Model::D2Q9, 3, 1.0, scale).unwrap()).unwrap();
        let c = SiteCounts::new(vec![40, 10, 12, 9, 11, 3, 2, 4, 3]);
        let out = mc_collide(&c, &t, 500, &mut RngStream::new(5), PairDraw::WithoutReplacement).unwrap();
        assert_eq!(out.total(), c.total());
        assert_eq!(out.momentum(Model::D2Q9), c.momentum(Model::D2Q9));
    }

    #[test]
    fn overfull_probabilities_are_rejected() {
        let table = CollisionTable::uniform(Model::D2Q9, 2, 1.0, 1.0).unwrap();
        assert!(McTable::max_probability(&table) > 1.0);
        assert!(matches!(McTable::new(&table), Err(IlgaError::ProbabilityExceeded { .. })));
    }

    #[test]
    fn ensemble_is_deterministic() {
        let t = McTable::new(&CollisionTable::uniform(Model::D1Q3, 2, 1.5, 0.5).unwrap()).unwrap();
        let c = SiteCounts::new(vec![600, 250, 150]);
        let a = ensemble_increment(&c, &t, 10_000, 9, PairDraw::WithoutReplacement).unwrap();
        let b = ensemble_increment(&c, &t, 10_000, 9, PairDraw::WithoutReplacement).unwrap();
        assert_eq!(a, b);
        assert!(a.mean.iter().sum::<f64>().abs() < 1e-12);
    }
}
