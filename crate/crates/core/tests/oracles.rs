use flga::equilibrium::init_shockwave;
use flga::flga::step;
use flga::harness::cases::CollisionSpec;
use flga::ilga::{ensemble_increment, McTable, PairDraw, SiteCounts};
use flga::lattice::{CollisionTable, Model};
use flga::qflga::qflga_step;
use flga::stats::max_abs_diff;

fn rms_error(counts: &SiteCounts, table: &CollisionTable, trials: u64, seeds: std::ops::Range<u64>) -> f64 {
    let mc = McTable::new(table).unwrap();
    let mut expected = vec![0.0; counts.n.len()];
    table.site_increment(&counts.fractions(), 1.0, &mut expected);
    let mut sq = 0.0;
    let n = seeds.end - seeds.start;
    for seed in seeds {
        let stats = ensemble_increment(counts, &mc, trials, seed, PairDraw::WithReplacement).unwrap();
        sq += stats.mean.iter().zip(&expected).map(|(m, e)| (m - e).powi(2)).sum::<f64>();
    }
    (sq / n as f64).sqrt()
}

#[test]
fn monte_carlo_error_shrinks_like_inverse_sqrt_trials() {
    let table = CollisionTable::uniform(Model::D1Q3, 2, 1.5, 1.0).unwrap();
    let counts = SiteCounts::new(vec![500, 300, 200]);
    let coarse = rms_error(&counts, &table, 10_000, 0..16);
    let fine = rms_error(&counts, &table, 1_000_000, 100..116);
    let ratio = coarse / fine;
    // ten-fold expected; sixteen repeats keep the estimate within a factor of ~1.5
    assert!((6.0..16.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn with_replacement_matches_increment_d2q9() {
    let mut table = CollisionTable::uniform(Model::D2Q9, 2, 1.0, 1.0).unwrap();
    let p = McTable::max_probability(&table);
    table = CollisionTable::uniform(Model::D2Q9, 2, 1.0, 1.0 / p).unwrap();
    let counts = SiteCounts::new(vec![300, 120, 90, 80, 110, 70, 60, 100, 70]);
    let mc = McTable::new(&table).unwrap();
    let stats = ensemble_increment(&counts, &mc, 400_000, 99, PairDraw::WithReplacement).unwrap();
    let mut expected = vec![0.0; 9];
    table.site_increment(&counts.fractions(), 1.0, &mut expected);
    let z = stats.z_scores(&expected);
    assert!(z.iter().all(|z| *z < 4.5), "{z:?}");
}

#[test]
fn emulator_matches_classical_step_on_several_lengths() {
    for l in [8, 32, 128] {
        let s = init_shockwave(l, 4.0, 2.0).unwrap();
        let quantum = qflga_step(&s, 1.0, 0.5).unwrap();
        let mut classical = s.clone();
        step(&mut classical, &CollisionSpec::new(Model::D1Q3, &[(2, 0.5)], 1.0).collider().unwrap(), 1).unwrap();
        let d = max_abs_diff(&classical.f, &quantum.f);
        assert!(d <= 1e-10, "L={l}: {d}");
    }
}

#[test]
fn emulator_rejects_merge_probability_above_one() {
    let s = init_shockwave(8, 4.0, 2.0).unwrap();
    assert!(qflga_step(&s, 1.0, 1.5).is_err());
}
