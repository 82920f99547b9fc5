use proptest::prelude::*;
use qbgk::oracle;
use qbgk::quantum_integrals::{
    d_func, fermion_j_limit, g_val, inv_moment0, j_val, moment0, moment2, radial_moments_with,
    y_of_x, IntegralAccuracy, MixturePair, Statistics,
};

const F: Statistics = Statistics::Fermion;
const B: Statistics = Statistics::Boson;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Frozen from mpmath (30 digits): -π^{3/2} Li_{3/2}(-e^{-x}), -(3/2)π^{3/2} Li_{5/2}(-e^{-x}).
const FERMI_NEGATIVE: [(f64, f64, f64); 3] = [
    (-10.0, 134.111_269_670_279_63, 843.644_296_273_053_2),
    (-5.0, 49.247_456_001_209_37, 174.687_921_566_440_9),
    (-1.0, 8.773_684_646_792_927, 16.723_845_160_091_326),
];

#[test]
fn origin_values_match_closed_forms() {
    let pi32 = std::f64::consts::PI.powf(1.5);
    let h_f = moment0(F, 0.0).unwrap();
    assert!(rel(h_f, pi32 * oracle::eta(1.5)) < 1e-12);
    assert!((h_f - 4.2608).abs() < 1e-3);
    let h_b = moment0(B, 0.0).unwrap();
    assert!(rel(h_b, pi32 * oracle::zeta(1.5)) < 1e-12);
    assert!((h_b - 14.546).abs() < 1e-3);

    let m2_f = moment2(F, 0.0).unwrap();
    assert!(rel(m2_f, 1.5 * pi32 * oracle::eta(2.5)) < 1e-12);
    assert!((m2_f - 7.2433).abs() < 1e-4);
    let m2_b = moment2(B, 0.0).unwrap();
    assert!(rel(m2_b, 1.5 * pi32 * oracle::zeta(2.5)) < 1e-12);
    assert!((m2_b - 11.2048).abs() < 1e-4);

    let j_f = j_val(F, 0.0).unwrap();
    assert!(rel(j_f, h_f / m2_f.powf(0.6)) < 1e-14);
}

#[test]
fn negative_fermion_grid_matches_frozen_polylog_values() {
    for (x, h, m2) in FERMI_NEGATIVE {
        assert!(rel(moment0(F, x).unwrap(), h) < 1e-12, "h at {x}");
        assert!(rel(moment2(F, x).unwrap(), m2) < 1e-12, "m2 at {x}");
        // the trapezoid oracle reproduces them as well
        assert!(rel(oracle::moment0(F, x), h) < 1e-12);
        assert!(rel(oracle::moment2(F, x), m2) < 1e-12);
    }
}

#[test]
fn oracle_equivalence_on_grids() {
    for x in [-10.0, -5.0, -1.0, 0.0, 1.0, 5.0, 10.0] {
        assert!(rel(moment0(F, x).unwrap(), oracle::moment0(F, x)) <= 1e-10);
        assert!(rel(moment2(F, x).unwrap(), oracle::moment2(F, x)) <= 1e-10);
    }
    for x in [0.1, 0.5, 1.0, 5.0, 10.0] {
        assert!(rel(moment0(B, x).unwrap(), oracle::moment0(B, x)) <= 1e-10);
        assert!(rel(moment2(B, x).unwrap(), oracle::moment2(B, x)) <= 1e-10);
    }
}

#[test]
fn j_approaches_limit_with_sommerfeld_correction() {
    let lim = fermion_j_limit();
    assert!((lim - 2.409_598_551_726_329).abs() < 1e-14);
    // j(−μ) = lim · (1 − π²/(4μ²) + O(μ^{-4}))
    for mu in [40.0_f64, 200.0, 1000.0] {
        let j = j_val(F, -mu).unwrap();
        let predicted = lim * (1.0 - std::f64::consts::PI.powi(2) / (4.0 * mu * mu));
        assert!(j < lim);
        assert!(rel(j, predicted) < 30.0 / mu.powi(4), "mu={mu}: {j} vs {predicted}");
    }
    // mpmath quadrature of the definition at x = −40
    assert!((j_val(F, -40.0).unwrap() - 2.405_897_503_433_616).abs() < 1e-11);
}

#[test]
fn inverse_examples() {
    let target = moment0(F, 1.7).unwrap();
    assert!((inv_moment0(F, target).unwrap() - 1.7).abs() < 1e-10);
    let pi32 = std::f64::consts::PI.powf(1.5);
    let x = inv_moment0(B, pi32 * oracle::zeta(1.5)).unwrap();
    assert!(x.abs() < 1e-8);
    assert!(inv_moment0(B, 2.0 * pi32 * oracle::zeta(1.5)).is_err());
}

#[test]
fn y_examples() {
    let ratio = moment0(F, 2.0).unwrap() / moment0(F, 1.0).unwrap();
    let y = y_of_x(F, F, 1.0, 1.0, 1.0, ratio, 1.0).unwrap();
    assert!((y - 2.0).abs() < 1e-9);
    // density ratio identity m1^{3/2} h(x) / (m2^{3/2} h(y)) = N1/N2
    let (m1, m2, n1, n2, x) = (1.0, 3.0, 0.7, 0.2, 0.4);
    let y = y_of_x(F, B, m1, m2, n1, n2, x).unwrap();
    let lhs = m1.powf(1.5) * moment0(F, x).unwrap() / (m2.powf(1.5) * moment0(B, y).unwrap());
    assert!(rel(lhs, n1 / n2) < 1e-12);
    // Bose range violation: scaled target above h_{-1}(0)
    assert!(y_of_x(F, B, 1.0, 1.0, 1.0, 1.0, -10.0).is_err());
}

#[test]
fn g_examples() {
    let g = g_val(F, F, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
    let expect = moment0(F, 0.0).unwrap() / (2.0 * moment2(F, 0.0).unwrap()).powf(0.6);
    assert!(rel(g, expect) < 1e-13);

    let pair = MixturePair::new(F, B, 1.0, 2.0, 1.0, 0.5).unwrap();
    let lb = pair.admissible_lower_bound().unwrap();
    let expect_lb = inv_moment0(F, (2.0f64).powf(1.5) * 1.0 / 0.5 * moment0(B, 0.0).unwrap()).unwrap();
    assert!((lb - expect_lb).abs() < 1e-12);
    let at_boundary = pair.g(lb).unwrap();
    assert!(at_boundary.is_finite() && at_boundary > 0.0);
    assert!(pair.y(lb).unwrap().abs() < 1e-9);
    assert!(pair.g(lb - 0.1).is_err());
    assert!(pair.g(lb + 0.1).unwrap() < at_boundary);
}

#[test]
fn d_examples() {
    // mpmath quadrature of the definition
    assert!((d_func(F, 0.0).unwrap() + 0.102_080_980_507_306_83).abs() < 1e-12);
    assert!((d_func(B, 0.5).unwrap() + 0.235_700_326_908_801_66).abs() < 1e-12);
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[test]
fn monotonicity_and_sign_properties() {
    for (stats, xs) in [(F, linspace(-20.0, 20.0, 60)), (B, linspace(0.0, 20.0, 60))] {
        let h: Vec<f64> = xs.iter().map(|&x| moment0(stats, x).unwrap()).collect();
        let m2: Vec<f64> = xs.iter().map(|&x| moment2(stats, x).unwrap()).collect();
        let j: Vec<f64> = xs.iter().map(|&x| j_val(stats, x).unwrap()).collect();
        assert!(strictly_decreasing(&h));
        assert!(strictly_decreasing(&m2));
        assert!(strictly_decreasing(&j));
        for &x in &xs {
            assert!(d_func(stats, x).unwrap() < 0.0, "D({x})");
            let back = inv_moment0(stats, moment0(stats, x).unwrap()).unwrap();
            assert!((back - x).abs() < 1e-9, "inverse at {x}: {back}");
        }
    }
}

#[test]
fn g_strictly_decreasing_for_all_pairs_and_mass_ratios() {
    for (s1, s2) in [(F, F), (B, B), (F, B)] {
        for ratio in [1.0, 2.0, 10.0] {
            for (n1, n2) in [(1.0, 1.0), (0.3, 1.2)] {
                let pair = MixturePair::new(s1, s2, 1.0, ratio, n1, n2).unwrap();
                let lb = pair.admissible_lower_bound().unwrap();
                let start = if lb.is_finite() { lb } else { -20.0 };
                let xs = linspace(start, start + 30.0, 55);
                let g: Vec<f64> = xs.iter().map(|&x| pair.g(x).unwrap()).collect();
                assert!(strictly_decreasing(&g), "{s1:?}-{s2:?} ratio {ratio}");
                assert!(pair.boundary_value().unwrap() >= g[0]);
            }
        }
    }
}

#[test]
fn g_derivative_identity_matches_finite_differences() {
    for (s1, s2, x) in [(F, F, -1.0), (F, B, 2.0), (B, B, 1.5)] {
        let pair = MixturePair::new(s1, s2, 1.0, 2.0, 0.8, 0.5).unwrap();
        let step = 1e-4;
        let fd = (pair.g(x + step).unwrap() - pair.g(x - step).unwrap()) / (2.0 * step);
        let analytic = pair.g_derivative(x).unwrap();
        assert!(analytic < 0.0);
        assert!(rel(analytic, fd) < 1e-6, "{s1:?}-{s2:?}: {analytic} vs {fd}");
    }
}

#[test]
fn doubling_tail_cutoff_is_invisible() {
    let acc = IntegralAccuracy::default();
    for (stats, x) in [(F, -40.0), (F, 0.0), (F, 35.0), (B, 0.0), (B, 0.2), (B, 12.0)] {
        let base = radial_moments_with(stats, x, &acc).unwrap();
        let wide = IntegralAccuracy {
            tail_cutoff: Some(2.0 * acc.cutoff_for(x)),
            ..acc
        };
        let doubled = radial_moments_with(stats, x, &wide).unwrap();
        assert!(rel(doubled.r2, base.r2) <= acc.rel_tol);
        assert!(rel(doubled.r4, base.r4) <= acc.rel_tol);
        if base.r0.is_finite() {
            assert!(rel(doubled.r0, base.r0) <= acc.rel_tol);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_roundtrip_fermion(x in -60.0f64..60.0) {
        let back = inv_moment0(F, moment0(F, x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-9);
    }

    #[test]
    fn inverse_roundtrip_boson(x in 1e-6f64..60.0) {
        let back = inv_moment0(B, moment0(B, x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-9);
    }

    #[test]
    fn matches_oracle_at_nonnegative_x(x in 0.0f64..30.0, boson in any::<bool>()) {
        let stats = if boson { B } else { F };
        prop_assume!(!(boson && x < 1e-3));
        prop_assert!(rel(moment0(stats, x).unwrap(), oracle::moment0(stats, x)) < 1e-10);
        prop_assert!(rel(moment2(stats, x).unwrap(), oracle::moment2(stats, x)) < 1e-10);
    }
}
