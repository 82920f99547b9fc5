// Radial moment functions h, moment2, j and D for both statistics.

use qbgk::quantum_integrals::{d_func, fermion_j_limit, j_sup, radial_moments, Statistics};

pub fn run() -> qbgk::error::Result<()> {
    println!("{:>8} {:>9} {:>14} {:>14} {:>12} {:>12}", "x", "stats", "h", "moment2", "j", "D");
    for (stats, xs) in [
        (Statistics::Fermion, &[-20.0, -5.0, 0.0, 2.0, 10.0][..]),
        (Statistics::Boson, &[1e-6, 0.1, 1.0, 5.0][..]),
    ] {
        for &x in xs {
            let r = radial_moments(stats, x)?;
            println!(
                "{x:>8} {:>9} {:>14.8e} {:>14.8e} {:>12.8} {:>12.4e}",
                format!("{stats:?}"),
                r.moment0(),
                r.moment2(),
                r.j(),
                d_func(stats, x)?
            );
        }
    }
    println!("fermion sup j = {:.12} (closed form {:.12})", j_sup(Statistics::Fermion)?, fermion_j_limit());
    println!("boson   sup j = {:.12}", j_sup(Statistics::Boson)?);
    Ok(())
}

fn main() -> qbgk::error::Result<()> {
    run()
}
