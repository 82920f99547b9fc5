// Two fermion gases relaxing toward a common equilibrium.

use qbgk::config::{Collision, EquilibriumInit, GridSpec, InitSpec, Mode, SimConfig, Splitting};
use qbgk::dynamics::{max_drifts, Simulation};
use qbgk::equilibrium::Species;
use qbgk::quantum_integrals::Statistics;

pub fn run() -> qbgk::error::Result<()> {
    let fermion = |mass| Species { mass, statistics: Statistics::Fermion };
    let cfg = SimConfig {
        mode: Mode::Homogeneous,
        dt: 0.05,
        t_end: 3.0,
        nx: 1,
        x_length: 1.0,
        grid: GridSpec { n: 16, p_max: None },
        species: [fermion(1.0), fermion(3.0)],
        init: InitSpec::ShiftedEquilibria {
            species: [
                Some(EquilibriumInit { a: 1.0, b: [0.0; 3], c: -2.0, shift: [0.7, 0.0, 0.0] }),
                Some(EquilibriumInit { a: 2.0, b: [0.0, 0.3, 0.0], c: 0.5, shift: [0.0; 3] }),
            ],
        },
        diag_every: 10,
        collision: Collision { nu_intra: 1.0, nu_inter: 2.0 },
        splitting: Splitting::Lie,
        discrete_consistent: true,
    };
    let mut sim = Simulation::new(cfg)?;
    sim.run()?;
    println!("{:>6} {:>22} {:>10} {:>10}", "t", "H", "max f1", "max f2");
    for r in &sim.state.diagnostics {
        println!("{:>6.2} {:>22.15e} {:>10.6} {:>10.6}", r.t, r.h, r.max_f1, r.max_f2);
    }
    let d = max_drifts(&sim.state.diagnostics, [1.0, 3.0]);
    println!("max drifts: mass1 {:.1e}, mass2 {:.1e}, momentum {:.1e}, energy {:.1e}", d[0], d[1], d[2], d[3]);

    let c = sim.attractors()?[0];
    if let Some(inter) = c.inter {
        println!("final inter attractor: a = {:.8}, c12 = {:.8}, c21 = {:.8}", inter.a, inter.c12, inter.c21);
    }
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
