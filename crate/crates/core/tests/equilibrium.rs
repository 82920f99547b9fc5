use proptest::prelude::*;
use qbgk::equilibrium::{
    check_feasibility_inter, inter_a_from_density, inter_feasibility, solve_inter, solve_inter_with,
    solve_intra, verify_coeffs, verify_intra, InterCoeffs, MixtureProblem, SolverOptions, Species,
    SpeciesMoments, Vec3, DEFAULT_RESIDUAL_TOL,
};
use qbgk::error::Infeasibility;
use qbgk::oracle;
use qbgk::quantum_integrals::{g_val, j_val, Statistics};

const F: Statistics = Statistics::Fermion;
const B: Statistics = Statistics::Boson;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Moments of one attractor from the series/trapezoid oracle.
fn oracle_moments(m: f64, stats: Statistics, a: f64, b: Vec3, c: f64) -> SpeciesMoments {
    let n = (m / a).powf(1.5) * oracle::moment0(stats, c);
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let e = 0.5 * m.powf(1.5) * a.powf(-2.5) * oracle::moment2(stats, c) + 0.5 * m * b2 * n;
    SpeciesMoments::new(n, [m * b[0] * n, m * b[1] * n, m * b[2] * n], e)
}

fn forward(s1: Species, s2: Species, c: &InterCoeffs) -> MixtureProblem {
    MixtureProblem::new(
        s1,
        s2,
        oracle_moments(s1.mass, s1.statistics, c.a, c.b, c.c12),
        oracle_moments(s2.mass, s2.statistics, c.a, c.b, c.c21),
    )
}

fn sp(mass: f64, statistics: Statistics) -> Species {
    Species { mass, statistics }
}

fn assert_recovers(got: &InterCoeffs, want: &InterCoeffs, tol: f64, label: &str) {
    assert!(close(got.a, want.a, tol), "{label}: a {} vs {}", got.a, want.a);
    assert!(close(got.c12, want.c12, tol), "{label}: c12 {} vs {}", got.c12, want.c12);
    assert!(close(got.c21, want.c21, tol), "{label}: c21 {} vs {}", got.c21, want.c21);
    for k in 0..3 {
        assert!(close(got.b[k], want.b[k], tol), "{label}: b[{k}]");
    }
}

#[test]
fn forward_constructed_fermion_boson_instance() {
    let want = InterCoeffs { a: 1.0, b: [0.0; 3], c12: 0.5, c21: 0.3 };
    let prob = forward(sp(1.0, F), sp(2.0, B), &want);
    let sol = solve_inter(&prob).unwrap();
    assert_recovers(&sol.coeffs, &want, 1e-8, "FB");
    // same problem with the species listed boson-first
    let flipped = MixtureProblem::new(prob.species2, prob.species1, prob.mom2, prob.mom1);
    let back = solve_inter(&flipped).unwrap().coeffs;
    assert!(close(back.c12, 0.3, 1e-8) && close(back.c21, 0.5, 1e-8));
}

#[test]
fn ratio_matches_g_at_root() {
    let want = InterCoeffs { a: 0.8, b: [0.1, 0.0, -0.2], c12: -1.0, c21: 0.4 };
    let prob = forward(sp(1.0, F), sp(3.0, F), &want);
    let c = solve_inter(&prob).unwrap().coeffs;
    let ratio = prob.mom1.density / prob.mixture_internal_energy().powf(0.6);
    let g = g_val(F, F, 1.0, 3.0, prob.mom1.density, prob.mom2.density, c.c12).unwrap();
    assert!((g - ratio).abs() <= 1e-11 * ratio);
}

#[test]
fn intra_root_matches_target_ratio() {
    let mom = oracle_moments(2.0, F, 1.7, [0.3, 0.0, 0.0], -4.0);
    let sol = solve_intra(2.0, F, &mom).unwrap();
    let e_int = 2.0 * 2.0 * mom.energy - mom.momentum[0].powi(2) / mom.density;
    let ratio = mom.density / e_int.powf(0.6);
    assert!((j_val(F, sol.coeffs.c).unwrap() - ratio).abs() <= 1e-11 * ratio);
    assert!(close(sol.coeffs.c, -4.0, 1e-9));
    assert!(verify_intra(&sol.coeffs, 2.0, F, &mom, DEFAULT_RESIDUAL_TOL).passed);
}

#[test]
fn identical_species_reduce_to_intra() {
    for stats in [F, B] {
        let mom = oracle_moments(1.3, stats, 0.9, [0.2, -0.4, 0.1], 0.7);
        let intra = solve_intra(1.3, stats, &mom).unwrap().coeffs;
        let prob = MixtureProblem::new(sp(1.3, stats), sp(1.3, stats), mom, mom);
        let inter = solve_inter(&prob).unwrap().coeffs;
        assert!(close(inter.a, intra.a, 1e-10));
        assert!(close(inter.c12, intra.c, 1e-10));
        assert!(close(inter.c21, intra.c, 1e-10));
        for k in 0..3 {
            assert!(close(inter.b[k], intra.b[k], 1e-10));
        }
    }
}

#[test]
fn dilute_symmetric_mixture_is_feasible() {
    let mom = SpeciesMoments::new(1e-3, [0.0; 3], 1.0);
    let prob = MixtureProblem::new(sp(1.0, F), sp(1.0, F), mom, mom);
    assert!(check_feasibility_inter(&prob));
}

#[test]
fn dense_boson_mixture_is_infeasible() {
    // cold and dense: the ratio exceeds g at the admissible boundary
    let prob = MixtureProblem::new(
        sp(1.0, B),
        sp(1.0, B),
        SpeciesMoments::new(1.0, [0.0; 3], 0.05),
        SpeciesMoments::new(50.0, [0.0; 3], 0.05),
    );
    assert!(matches!(
        inter_feasibility(&prob),
        Err(Infeasibility::MixtureRatioAboveBound { .. })
    ));
    assert!(solve_inter(&prob).is_err());
}

#[test]
fn verification_detects_perturbations() {
    let want = InterCoeffs { a: 1.2, b: [0.3, 0.1, 0.0], c12: 0.5, c21: 1.0 };
    let prob = forward(sp(1.0, F), sp(2.0, B), &want);
    let sol = solve_inter(&prob).unwrap().coeffs;
    let ok = verify_coeffs(&sol, &prob, DEFAULT_RESIDUAL_TOL);
    assert!(ok.passed && ok.max <= 1e-8, "{ok:?}");

    let bad_c = InterCoeffs { c12: sol.c12 + 0.1, ..sol };
    let rep = verify_coeffs(&bad_c, &prob, DEFAULT_RESIDUAL_TOL);
    assert!(rep.get("N1").unwrap() > 1e-3 && !rep.passed);

    let bad_b = InterCoeffs { b: [sol.b[0] + 0.1, sol.b[1], sol.b[2]], ..sol };
    let rep = verify_coeffs(&bad_b, &prob, DEFAULT_RESIDUAL_TOL);
    let p_scale = (prob.total_mass() * 2.0 * prob.total_energy()).sqrt();
    let expected = 0.1 * prob.total_mass() / p_scale;
    assert!((rep.get("P").unwrap() - expected).abs() < 1e-8 * expected);
}

#[test]
fn translation_covariance() {
    let want = InterCoeffs { a: 0.6, b: [0.0; 3], c12: 0.2, c21: 2.0 };
    let (s1, s2) = (sp(1.0, B), sp(2.0, B));
    let prob = forward(s1, s2, &want);
    let u = [0.5, -1.5, 2.0];
    let shifted = MixtureProblem::new(s1, s2, prob.mom1.boosted(s1.mass, u), prob.mom2.boosted(s2.mass, u));
    let c0 = solve_inter(&prob).unwrap().coeffs;
    let c1 = solve_inter(&shifted).unwrap().coeffs;
    assert!(close(c1.a, c0.a, 1e-10));
    assert!(close(c1.c12, c0.c12, 1e-10));
    assert!(close(c1.c21, c0.c21, 1e-10));
    for k in 0..3 {
        assert!((c1.b[k] - c0.b[k] - u[k]).abs() < 1e-12);
    }
}

const PAIRS: [(Statistics, Statistics); 3] = [(F, F), (B, B), (F, B)];
const MASS_RATIOS: [f64; 3] = [1.0, 2.0, 10.0];

fn parameter_sets(s1: Statistics, s2: Statistics) -> [InterCoeffs; 3] {
    // fermions also get a degenerate (negative-fugacity) case
    let deep = |s: Statistics, v: f64| if s.is_boson() { 0.75 } else { v };
    [
        InterCoeffs { a: 1.3, b: [0.2, -0.1, 0.4], c12: 0.5, c21: 0.3 },
        InterCoeffs { a: 0.7, b: [0.0; 3], c12: 2.0, c21: 1.5 },
        InterCoeffs { a: 2.5, b: [1.0, 0.0, 0.0], c12: deep(s1, -3.0), c21: deep(s2, -0.8) },
    ]
}

#[test]
fn roundtrip_across_pairs_and_mass_ratios() {
    for (s1, s2) in PAIRS {
        for ratio in MASS_RATIOS {
            for want in parameter_sets(s1, s2) {
                let prob = forward(sp(1.0, s1), sp(ratio, s2), &want);
                let sol = solve_inter(&prob).unwrap().coeffs;
                assert_recovers(&sol, &want, 1e-8, &format!("{s1:?}-{s2:?} m2={ratio}"));
                assert!(verify_coeffs(&sol, &prob, DEFAULT_RESIDUAL_TOL).passed);
                let a_density = inter_a_from_density(&sol, &prob).unwrap();
                assert!(close(a_density, sol.a, 1e-10));
            }
        }
    }
}

#[test]
fn bracket_start_does_not_change_root() {
    for (s1, s2) in PAIRS {
        let want = InterCoeffs { a: 1.0, b: [0.0; 3], c12: 1.2, c21: 0.7 };
        let prob = forward(sp(1.0, s1), sp(2.0, s2), &want);
        let r1 = solve_inter_with(&prob, &SolverOptions { bracket_step: 1.0 }).unwrap().coeffs;
        let r2 = solve_inter_with(&prob, &SolverOptions { bracket_step: 37.5 }).unwrap().coeffs;
        assert!((r1.c12 - r2.c12).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roundtrip_random_coefficients(
        pair in 0usize..3,
        m2 in prop::sample::select(MASS_RATIOS.to_vec()),
        a in 0.3f64..3.0,
        bx in -1.0f64..1.0,
        c12 in 0.05f64..4.0,
        c21 in 0.05f64..4.0,
        shift in -6.0f64..0.0,
    ) {
        let (s1, s2) = PAIRS[pair];
        let c12 = if s1.is_boson() { c12 } else { c12 + shift };
        let c21 = if s2.is_boson() { c21 } else { c21 + shift };
        let want = InterCoeffs { a, b: [bx, 0.0, 0.0], c12, c21 };
        let prob = forward(sp(1.0, s1), sp(m2, s2), &want);
        let got = solve_inter(&prob).unwrap().coeffs;
        prop_assert!(close(got.a, a, 1e-8));
        prop_assert!(close(got.c12, c12, 1e-8));
        prop_assert!(close(got.c21, c21, 1e-8));
        prop_assert!(close(got.b[0], bx, 1e-8));
    }
}
