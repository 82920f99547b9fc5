use proptest::prelude::*;
use qbgk::distributions::{
    discrete_moments, eval_equilibrium, h_functional, tail_extent, DistributionField, MomentumGrid,
};
use qbgk::oracle;
use qbgk::quantum_integrals::Statistics;

const F: Statistics = Statistics::Fermion;
const B: Statistics = Statistics::Boson;

#[test]
fn constant_field_moments() {
    let g = MomentumGrid::new(3.0, 8).unwrap();
    let f = DistributionField::constant(&g, F, 1.0, 1.0);
    let mom = discrete_moments(&f, &g);
    assert!((mom.density - 216.0).abs() < 1e-12);
    assert_eq!(mom.momentum, [0.0; 3]);
}

#[test]
fn lattice_density_matches_continuum() {
    let g = MomentumGrid::new(8.0, 64).unwrap();
    let f = eval_equilibrium(1.0, [0.0; 3], 0.0, 1.0, F, &g).unwrap();
    let mom = discrete_moments(&f, &g);
    assert!((mom.density - oracle::moment0(F, 0.0)).abs() < 1e-6);
    assert!((mom.density - 4.2606).abs() < 1e-3);

    let shifted = eval_equilibrium(1.0, [0.3, 0.0, 0.0], 0.0, 1.0, F, &g).unwrap();
    let mom = discrete_moments(&shifted, &g);
    let v = mom.momentum[0] / mom.density;
    assert!((v - 0.3).abs() < 1e-9, "{v}");
    assert!(mom.momentum[1].abs() < 1e-12 && mom.momentum[2].abs() < 1e-12);
}

#[test]
fn zero_drift_gives_bitwise_zero_momentum() {
    for (stats, c) in [(F, -3.0), (B, 0.4)] {
        let g = MomentumGrid::new(5.0, 16).unwrap();
        let f = eval_equilibrium(0.7, [0.0; 3], c, 1.6, stats, &g).unwrap();
        assert_eq!(discrete_moments(&f, &g).momentum, [0.0; 3]);
    }
}

#[test]
fn on_grid_shift_equivariance() {
    // Δp = 0.25; m u = (0.5, −0.25, 0.75) is an exact node offset of (2, −1, 3)
    let g = MomentumGrid::new(2.0, 16).unwrap();
    let m = 0.5;
    let u = [1.0, -0.5, 1.5];
    let base = eval_equilibrium(2.0, [0.0; 3], 0.2, m, F, &g).unwrap();
    let moved = eval_equilibrium(2.0, u, 0.2, m, F, &g).unwrap();
    let shift = [2isize, -1, 3];
    for k in 3..16 {
        for j in 0..15 {
            for i in 2..16 {
                let src = g.index(
                    (i as isize - shift[0]) as usize,
                    (j as isize - shift[1]) as usize,
                    (k as isize - shift[2]) as usize,
                );
                assert_eq!(moved.values[g.index(i, j, k)], base.values[src]);
            }
        }
    }
}

#[test]
fn refinement_converges_at_least_second_order() {
    // narrow attractor so the n = 64 error is still above round-off
    let (a, c) = (4.0, 0.0);
    let exact = (1.0f64 / a).powf(1.5) * oracle::moment0(F, c);
    let errs: Vec<f64> = [32usize, 48, 64]
        .iter()
        .map(|&n| {
            let g = MomentumGrid::new(8.0, n).unwrap();
            let f = eval_equilibrium(a, [0.0; 3], c, 1.0, F, &g).unwrap();
            (discrete_moments(&f, &g).density - exact).abs()
        })
        .collect();
    let order1 = (errs[0] / errs[1]).ln() / 1.5f64.ln();
    let order2 = (errs[1] / errs[2]).ln() / (4.0f64 / 3.0).ln();
    eprintln!("refinement errors {errs:?}, observed orders {order1:.2} {order2:.2}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(order1 >= 1.7 && order2 >= 1.7, "orders {order1} {order2}");
}

#[test]
fn covering_grid_keeps_tails_below_threshold() {
    for (stats, m, a, b, c) in [
        (F, 1.0, 1.0, [0.0; 3], 0.0),
        (F, 2.0, 0.5, [0.4, -0.2, 0.1], -6.0),
        (B, 0.5, 3.0, [1.0, 0.0, 0.0], 0.05),
    ] {
        let g = MomentumGrid::covering(16, [tail_extent(m, a, b, c)]).unwrap();
        let f = eval_equilibrium(a, b, c, m, stats, &g).unwrap();
        let n = g.n;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let on_face = [i, j, k].iter().any(|&x| x == 0 || x == n - 1);
                    if on_face {
                        assert!(f.values[g.index(i, j, k)] < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn h_functional_examples() {
    let g = MomentumGrid::new(1.5, 4).unwrap();
    let half = DistributionField::constant(&g, F, 1.0, 0.5);
    let h = h_functional(&half, &half, &g).unwrap();
    let expect = -2.0 * 3.0f64.powi(3) * 2f64.ln();
    assert!((h - expect).abs() < 1e-13);

    let zero = DistributionField::zeros(&g, B, 1.0);
    assert_eq!(h_functional(&zero, &DistributionField::zeros(&g, F, 1.0), &g).unwrap(), 0.0);

    let over = DistributionField::constant(&g, F, 1.0, 1.0 + 1e-9);
    assert!(h_functional(&over, &half, &g).is_err());
}

#[test]
fn reductions_do_not_depend_on_thread_count() {
    let g = MomentumGrid::new(6.0, 24).unwrap();
    let f = eval_equilibrium(1.1, [0.2, 0.1, -0.3], -1.0, 1.3, F, &g).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| (discrete_moments(&f, &g), h_functional(&f, &f, &g).unwrap()))
    };
    let (m1, h1) = run(1);
    let (m4, h4) = run(4);
    assert_eq!(m1, m4);
    assert_eq!(h1.to_bits(), h4.to_bits());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fermion_values_stay_below_one(
        a in 1e-3f64..1e3,
        c in -1e4f64..50.0,
        bx in -2.0f64..2.0,
        m in 0.1f64..10.0,
    ) {
        let g = MomentumGrid::new(3.0, 8).unwrap();
        let f = eval_equilibrium(a, [bx, 0.0, 0.0], c, m, F, &g).unwrap();
        prop_assert!(f.max_value() < 1.0);
        prop_assert!(f.min_value() >= 0.0);
    }
}
