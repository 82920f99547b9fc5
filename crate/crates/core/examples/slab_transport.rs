// Periodic slab: a density wave in a fermion/boson mixture, Strang splitting.

use qbgk::config::{Collision, EquilibriumInit, GridSpec, InitSpec, Mode, SimConfig, Splitting};
use qbgk::distributions::discrete_moments;
use qbgk::dynamics::{courant_number, max_drifts, Simulation};
use qbgk::equilibrium::Species;
use qbgk::quantum_integrals::Statistics;

pub fn run() -> qbgk::error::Result<()> {
    let cfg = SimConfig {
        mode: Mode::Slab1d,
        dt: 0.02,
        t_end: 0.6,
        nx: 8,
        x_length: 1.0,
        grid: GridSpec { n: 8, p_max: Some(6.0) },
        species: [
            Species { mass: 1.0, statistics: Statistics::Fermion },
            Species { mass: 2.0, statistics: Statistics::Boson },
        ],
        init: InitSpec::CosinePerturbation {
            species: [
                EquilibriumInit { a: 1.0, b: [0.0; 3], c: 0.0, shift: [0.0; 3] },
                EquilibriumInit { a: 1.0, b: [0.2, 0.0, 0.0], c: 1.0, shift: [0.0; 3] },
            ],
            amplitude: 0.4,
            wavenumber: 1,
        },
        diag_every: 5,
        collision: Collision::default(),
        splitting: Splitting::Strang,
        discrete_consistent: true,
    };
    let courant = courant_number(&qbgk::distributions::MomentumGrid::new(6.0, 8)?, &cfg.species, cfg.dt, cfg.dx());
    println!("Courant number {courant:.3}");

    let mut sim = Simulation::new(cfg)?;
    let profile = |sim: &Simulation| -> Vec<f64> {
        sim.state.cells.iter().map(|c| discrete_moments(&c.f1, &sim.grid).density).collect()
    };
    println!("species 1 density, t = 0:   {:.4?}", profile(&sim));
    sim.run()?;
    println!("species 1 density, t = {:.1}: {:.4?}", sim.state.t, profile(&sim));
    let d = max_drifts(&sim.state.diagnostics, [1.0, 2.0]);
    println!("max drifts: mass1 {:.1e}, mass2 {:.1e}, momentum {:.1e}, energy {:.1e}", d[0], d[1], d[2], d[3]);
    let h: Vec<f64> = sim.state.diagnostics.iter().map(|r| r.h).collect();
    println!("H: {:.6?}", h);
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
