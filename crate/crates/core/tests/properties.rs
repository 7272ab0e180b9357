use flga::calibration::tau_approx;
use flga::equilibrium::{feq, feq_1d, feq_2d};
use flga::field::FieldState;
use flga::flga::{step, stream, Collider, CollisionOperator};
use flga::harness::cases::CollisionSpec;
use flga::lattice::{CollisionTable, Model};
use flga::lbm::{Bgk, BgkParams};
use flga::qflga::{Circuit, Gate, GateKind};
use flga::snapshot::{decode_binary, encode_binary};
use num_complex::Complex64;
use proptest::prelude::*;

fn site(q: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..2.0, q)
}

fn state(model: Model, nx: usize, ny: usize, values: &[f64]) -> FieldState {
    let mut s = FieldState::new(model, nx, ny).unwrap();
    s.f.copy_from_slice(values);
    s
}

fn moments(model: Model, f: &[f64]) -> (f64, [f64; 2]) {
    let d = model.descriptor();
    (d.density(f), d.momentum(f))
}

fn collider(model: Model, k: usize, c: f64) -> Collider {
    CollisionSpec::new(model, &[(k, c)], 1.0).collider().unwrap()
}

proptest! {
    #[test]
    fn collide_conserves_per_site(f in site(9), k in 2usize..=4, c in 0.05f64..1.0) {
        let inc = collider(Model::D2Q9, k, c).increment(&f);
        let (rho, _) = moments(Model::D2Q9, &f);
        let (dr, dm) = moments(Model::D2Q9, &inc);
        prop_assert!(dr.abs() <= 1e-12 * rho.max(1e-300));
        prop_assert!(dm[0].abs() <= 1e-12 * rho && dm[1].abs() <= 1e-12 * rho);
    }

    #[test]
    fn collide_conserves_per_site_1d(f in site(3), k in prop::sample::select(vec![2usize, 4])) {
        let inc = collider(Model::D1Q3, k, 1.0).increment(&f);
        let (rho, _) = moments(Model::D1Q3, &f);
        let (dr, dm) = moments(Model::D1Q3, &inc);
        prop_assert!(dr.abs() <= 1e-12 * rho.max(1e-300) && dm[0].abs() <= 1e-12 * rho.max(1e-300));
    }

    #[test]
    fn bgk_conserves_per_site(f in site(9), tau in 0.51f64..5.0) {
        let mut s = state(Model::D2Q9, 1, 1, &f);
        Bgk::new(Model::D2Q9, BgkParams::new(tau).unwrap()).collide(&mut s).unwrap();
        let (r0, m0) = moments(Model::D2Q9, &f);
        let (r1, m1) = moments(Model::D2Q9, &s.f);
        prop_assert!((r1 - r0).abs() <= 1e-12 * r0);
        prop_assert!((m1[0] - m0[0]).abs() <= 1e-12 * r0 && (m1[1] - m0[1]).abs() <= 1e-12 * r0);
    }

    #[test]
    fn mirrored_1d_step_is_exact(values in prop::collection::vec(0.05f64..2.0, 3 * 12), steps in 1usize..20) {
        let mirror = |s: &FieldState| {
            let mut m = s.clone();
            for x in 0..s.nx {
                let f = s.site(x, 0);
                m.set_site(s.nx - 1 - x, 0, &[f[0], f[2], f[1]]).unwrap();
            }
            m
        };
        let op = collider(Model::D1Q3, 2, 1.0);
        let mut a = state(Model::D1Q3, 12, 1, &values);
        let mut b = mirror(&a);
        step(&mut a, &op, steps).unwrap();
        step(&mut b, &op, steps).unwrap();
        prop_assert_eq!(mirror(&a).f, b.f);
    }

    #[test]
    fn periodic_streaming_is_a_permutation(values in prop::collection::vec(0.0f64..1.0, 9 * 6 * 4)) {
        let mut s = state(Model::D2Q9, 6, 4, &values);
        let mass = s.total_mass();
        // every D2Q9 speed is at most one cell per axis, so lcm(6, 4) steps return home
        for n in 1..=12 {
            stream(&mut s);
            prop_assert!((s.total_mass() - mass).abs() <= 1e-12 * mass);
            if n < 12 {
                continue;
            }
            prop_assert_eq!(&s.f, &values);
        }
    }

    #[test]
    fn feq_moments_are_exact(rho in 0.01f64..10.0, ux in -0.5f64..0.5, uy in -0.5f64..0.5) {
        for (model, u) in [(Model::D1Q3, [ux, 0.0]), (Model::D2Q9, [ux, uy])] {
            let f = feq(model, rho, u);
            let (r, m) = moments(model, &f);
            prop_assert!((r - rho).abs() <= 1e-14 * rho);
            prop_assert!((m[0] - rho * u[0]).abs() <= 1e-14 * rho);
            prop_assert!((m[1] - rho * u[1]).abs() <= 1e-14 * rho);
        }
    }

    #[test]
    fn feq_2d_rest_row_is_scaled_1d(rho in 0.01f64..10.0, ux in -1.0f64..1.0) {
        let f2 = feq_2d(rho, ux, 0.0);
        let f1 = feq_1d(rho, ux);
        // y-rest channels: rest, east, west
        let scale = f2[0] / f1[0];
        prop_assert!((f2[1] - scale * f1[1]).abs() <= 1e-14 * rho);
        prop_assert!((f2[3] - scale * f1[2]).abs() <= 1e-14 * rho);
        prop_assert!(f1.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn tau_approx_decreases_in_c(c in 0.01f64..5.0, dc in 0.001f64..1.0, gamma in 0.05f64..4.0) {
        prop_assert!(tau_approx(c + dc, gamma).unwrap() < tau_approx(c, gamma).unwrap());
    }

    #[test]
    fn gates_preserve_norm(
        gates in prop::collection::vec((0u8..5, 0usize..5, -6.0f64..6.0, prop::option::of((0usize..5, any::<bool>()))), 1..30),
        seed in prop::collection::vec(-1.0f64..1.0, 64),
    ) {
        let mut amps: Vec<Complex64> = seed.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= n);
        let mut circuit = Circuit::new(5);
        for (kind, target, angle, ctrl) in gates {
            let kind = match kind {
                0 => GateKind::X,
                1 => GateKind::H,
                2 => GateKind::Ry(angle),
                3 => GateKind::Phase(angle),
                _ => GateKind::Shift { width: 2, offset: if angle > 0.0 { 1 } else { -1 } },
            };
            let target = if matches!(kind, GateKind::Shift { .. }) { target.min(3) } else { target };
            let mut g = Gate::new(kind, target);
            if let Some((q, v)) = ctrl {
                let span = if matches!(kind, GateKind::Shift { .. }) { target..target + 2 } else { target..target + 1 };
                if !span.contains(&q) {
                    g = g.control(q, v);
                }
            }
            circuit.push(g);
        }
        circuit.apply(&mut amps);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        let text = circuit.to_string();
        prop_assert_eq!(Circuit::parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn binary_snapshot_round_trips(nx in 1usize..6, ny in 1usize..6, seed in any::<u64>(), time in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut s = FieldState::new(Model::D2Q9, nx, ny).unwrap();
        s.f.iter_mut().for_each(|v| *v = rng.gen::<f64>() * 3.0);
        s.time = time;
        let back = decode_binary(&encode_binary(&s)).unwrap();
        prop_assert_eq!(back.f, s.f);
        prop_assert_eq!(back.time, time);
    }
}

#[test]
fn detailed_balance_over_all_tables() {
    for (model, ks) in [(Model::D1Q3, vec![2, 4]), (Model::D2Q9, vec![2, 3, 4])] {
        let d = model.descriptor();
        for k in ks {
            let t = CollisionTable::uniform(model, k, 0.7, 1.3).unwrap();
            for a in &t.terms {
                let b = t
                    .terms
                    .iter()
                    .find(|b| b.input == a.output && b.output == a.input)
                    .expect("reverse term present");
                let lhs = a.input.weight(d) * a.coefficient / (1.3 * 0.7);
                let rhs = b.input.weight(d) * b.coefficient / (1.3 * 0.7);
                assert!((lhs - rhs).abs() <= 1e-14, "{model} k={k} {:?}", a);
            }
        }
    }
}
