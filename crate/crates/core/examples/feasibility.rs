// Which moment sets admit quantum equilibria, and why others do not.

use qbgk::equilibrium::{inter_feasibility, intra_feasibility, MixtureProblem, Species, SpeciesMoments};
use qbgk::quantum_integrals::Statistics;

pub fn run() -> qbgk::error::Result<()> {
    let f = Statistics::Fermion;
    let b = Statistics::Boson;
    let cases = [
        ("dilute fermions", f, SpeciesMoments::new(1e-3, [0.0; 3], 1.0)),
        ("dense cold fermions", f, SpeciesMoments::new(10.0, [0.0; 3], 0.1)),
        ("dense cold bosons", b, SpeciesMoments::new(10.0, [0.0; 3], 0.1)),
        ("super-kinetic momentum", f, SpeciesMoments::new(1.0, [2.0, 0.0, 0.0], 1.0)),
    ];
    for (label, stats, mom) in cases {
        match intra_feasibility(1.0, stats, &mom) {
            Ok(()) => println!("{label:<24} feasible"),
            Err(why) => println!("{label:<24} infeasible: {why}"),
        }
    }

    let s = |statistics| Species { mass: 1.0, statistics };
    let dilute = SpeciesMoments::new(1e-3, [0.0; 3], 1.0);
    let prob = MixtureProblem::new(s(f), s(f), dilute, dilute);
    println!("dilute FF mixture        {:?}", inter_feasibility(&prob));

    // the second boson species carries far more density than the first can balance
    let prob = MixtureProblem::new(s(b), s(b), SpeciesMoments::new(0.01, [0.0; 3], 1.0), SpeciesMoments::new(50.0, [0.0; 3], 1.0));
    println!("lopsided BB mixture      {:?}", inter_feasibility(&prob));
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
