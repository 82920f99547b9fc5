// Write a field snapshot, read it back, and restart a run from it.

use qbgk::config::{GridSpec, InitSpec, Mode, SimConfig};
use qbgk::distributions::{discrete_moments, eval_equilibrium, MomentumGrid};
use qbgk::dynamics::{diagnostics_csv, Simulation};
use qbgk::equilibrium::Species;
use qbgk::quantum_integrals::Statistics;
use qbgk::snapshot;

pub fn run() -> qbgk::error::Result<()> {
    let dir = std::env::temp_dir().join(format!("qbgk-snapshots-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let grid = MomentumGrid::new(5.0, 12)?;
    let f1 = eval_equilibrium(1.0, [0.5, 0.0, 0.0], -1.0, 1.0, Statistics::Fermion, &grid)?;
    let f2 = eval_equilibrium(1.0, [-0.5, 0.0, 0.0], 0.5, 1.0, Statistics::Boson, &grid)?;
    let paths = [dir.join("fermion.bin"), dir.join("boson.bin")];
    snapshot::write(&paths[0], &f1, &grid)?;
    snapshot::write(&paths[1], &f2, &grid)?;
    let bytes = std::fs::metadata(&paths[0])?.len();
    println!("snapshot size {bytes} bytes for {} nodes", grid.num_nodes());

    let (g, back) = snapshot::read(&paths[0])?;
    assert_eq!((g, &back), (grid, &f1));
    println!("round trip exact; density {:.10}", discrete_moments(&back, &g).density);

    let cfg = SimConfig {
        mode: Mode::Homogeneous,
        dt: 0.1,
        t_end: 0.5,
        nx: 1,
        x_length: 1.0,
        grid: GridSpec { n: 12, p_max: Some(5.0) },
        species: [
            Species { mass: 1.0, statistics: Statistics::Fermion },
            Species { mass: 1.0, statistics: Statistics::Boson },
        ],
        init: InitSpec::Snapshot { paths: paths.clone() },
        diag_every: 1,
        collision: Default::default(),
        splitting: Default::default(),
        discrete_consistent: true,
    };
    let mut sim = Simulation::new(cfg)?;
    sim.run()?;
    print!("{}", diagnostics_csv(&sim.state.diagnostics));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
