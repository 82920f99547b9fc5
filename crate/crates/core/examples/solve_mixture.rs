// Forward-construct a fermion/boson mixture, then recover its coefficients.

use qbgk::equilibrium::{
    solve_inter, solve_intra, verify_coeffs, InterCoeffs, MixtureProblem, Species, DEFAULT_RESIDUAL_TOL,
};
use qbgk::quantum_integrals::Statistics;

pub fn run() -> qbgk::error::Result<()> {
    let fermion = Species { mass: 1.0, statistics: Statistics::Fermion };
    let boson = Species { mass: 2.0, statistics: Statistics::Boson };
    // boson listed first; coefficients come back in this order
    let truth = InterCoeffs { a: 1.2, b: [0.3, 0.0, -0.1], c12: 0.3, c21: 0.5 };
    let (m_b, m_f) = truth.moments(&boson, &fermion)?;
    let prob = MixtureProblem::new(boson, fermion, m_b, m_f);
    let sol = solve_inter(&prob)?;
    let c = sol.coeffs;
    println!("inter: a = {:.12}, b = {:?}, c12 = {:.12}, c21 = {:.12} ({} iterations)", c.a, c.b, c.c12, c.c21, sol.iterations);

    let report = verify_coeffs(&c, &prob, DEFAULT_RESIDUAL_TOL);
    for r in &report.residuals {
        println!("  residual {:<3} {:.3e}", r.name, r.value);
    }

    for (s, m) in [(boson, &m_b), (fermion, &m_f)] {
        let intra = solve_intra(s.mass, s.statistics, m)?.coeffs;
        println!("intra {:?}: a = {:.10}, c = {:.10}", s.statistics, intra.a, intra.c);
    }
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
