//! Collision-step timing against grid size.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use super::cases::CollisionSpec;
use crate::equilibrium::{init_taylor_green, TaylorGreen};
use crate::flga::CollisionOperator;
use crate::lattice::Model;
use crate::lbm::{Bgk, BgkParams};
use crate::stats::{linear_fit, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Solver {
    Lbm,
    Flga2,
    Flga3,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Lbm, Solver::Flga2, Solver::Flga3];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Lbm => "lbm",
            Solver::Flga2 => "flga2",
            Solver::Flga3 => "flga3",
        }
    }

    /// Serial operator, so timings reflect per-site work.
    pub fn operator(self) -> Box<dyn CollisionOperator> {
        match self {
            Solver::Lbm => {
                let mut b = Bgk::new(Model::D2Q9, BgkParams::new(0.8).expect("valid tau"));
                b.parallel = false;
                Box::new(b)
            }
            Solver::Flga2 | Solver::Flga3 => {
                let k = if self == Solver::Flga2 { 2 } else { 3 };
                let c = CollisionSpec::new(Model::D2Q9, &[(k, 0.5)], 1.0).collider().expect("valid table");
                Box::new(c.with_parallel(false))
            }
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Solver::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown solver `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub solver: Solver,
    pub sites: usize,
    /// Minimum over repetitions of the mean collide time per step.
    pub seconds_per_step: f64,
}

/// Times the collision step on square D2Q9 grids with the given edges.
pub fn bench_timing(edges: &[usize], solvers: &[Solver], reps: usize) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &solver in solvers {
        let op = solver.operator();
        for &n in edges {
            let mut s = init_taylor_green(&TaylorGreen::new(n, n)).expect("valid grid");
            let sites = n * n;
            // batch small grids so each repetition is long enough to time
            let batch = ((1usize << 18) / sites).max(1);
            let mut best = f64::INFINITY;
            for _ in 0..reps.max(1) {
                let t0 = Instant::now();
                for _ in 0..batch {
                    op.collide(&mut s).expect("stable benchmark state");
                }
                best = best.min(t0.elapsed().as_secs_f64() / batch as f64);
            }
            rows.push(BenchRow { solver, sites, seconds_per_step: best });
        }
    }
    rows
}

/// Log-log slope of time against site count for one solver.
pub fn scaling_fit(rows: &[BenchRow], solver: Solver) -> Option<LinearFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.solver == solver && r.seconds_per_step > 0.0)
        .map(|r| ((r.sites as f64).ln(), r.seconds_per_step.ln()))
        .unzip();
    (x.len() >= 2).then(|| linear_fit(&x, &y))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut w: W) -> io::Result<()> {
    writeln!(w, "solver,sites,seconds_per_step")?;
    for r in rows {
        writeln!(w, "{},{},{:e}", r.solver, r.sites, r.seconds_per_step)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bench_produces_rows() {
        let rows = bench_timing(&[8, 16], &[Solver::Lbm, Solver::Flga2], 2);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.seconds_per_step > 0.0));
        assert!(scaling_fit(&rows, Solver::Lbm).is_some());
        assert!(scaling_fit(&rows, Solver::Flga3).is_none());
    }

    #[test]
    fn solver_names_parse() {
        for s in Solver::ALL {
            assert_eq!(s.name().parse::<Solver>().unwrap(), s);
        }
    }
}
