//! Coefficients whose attractors reproduce *lattice* moments exactly.
//!
//! The continuum solution of the moment relations leaves a quadrature-sized
//! mismatch on a finite grid, which a relaxation step would turn into drift of
//! the conserved quantities. Here the same relations are re-solved with
//! integrals replaced by lattice sums, by damped Newton iteration started from
//! the continuum (or previous-step) coefficients. Unknowns are
//! `(ln a, b, c)` for one species and `(ln a, b, c12, c21)` for a pair.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::distributions::{fill_equilibrium, lattice_sums, MomentumGrid};
use crate::equilibrium::{IntraCoeffs, InterCoeffs, SpeciesMoments};
use crate::error::{Error, Result};
use crate::quantum_integrals::Statistics;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Scaled residual at which iteration stops.
    pub tol: f64,
    /// Residual accepted once a full step no longer improves it.
    pub stagnation_tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            stagnation_tol: 1e-12,
            max_iterations: 60,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteIntra {
    pub coeffs: IntraCoeffs,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteInter {
    pub coeffs: InterCoeffs,
    pub iterations: usize,
    pub residual: f64,
}

/// Lattice moments `(N, P, E)` of one attractor and their derivatives with
/// respect to `(ln a, b, c)`.
struct Block {
    moments: [f64; 5],
    jac: [[f64; 5]; 5],
}

fn species_block(
    buf: &mut [f64],
    grid: &MomentumGrid,
    m: f64,
    stats: Statistics,
    a: f64,
    b: [f64; 3],
    c: f64,
) -> Block {
    fill_equilibrium(buf, a, b, c, m, stats, grid);
    let vol = grid.cell_volume();
    let s = lattice_sums(buf, grid, |f| f);
    let moments = [vol * s[0], vol * s[1], vol * s[2], vol * s[3], vol * s[4] / (2.0 * m)];

    let n = grid.n;
    let nodes = grid.nodes();
    let tau = stats.tau();
    let partials: Vec<[[f64; 5]; 5]> = buf
        .par_chunks(n * n)
        .enumerate()
        .map(|(k, plane)| {
            let mut acc = [[0.0; 5]; 5];
            for j in 0..n {
                for i in 0..n {
                    let f = plane[i + n * j];
                    let w = f * (1.0 - tau * f);
                    let p = [nodes[i], nodes[j], nodes[k]];
                    let q = [p[0] - m * b[0], p[1] - m * b[1], p[2] - m * b[2]];
                    let q2 = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
                    let du = [a * q2 / m, -2.0 * a * q[0], -2.0 * a * q[1], -2.0 * a * q[2], 1.0];
                    let phi = [1.0, p[0], p[1], p[2], (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / (2.0 * m)];
                    for (row, ph) in acc.iter_mut().zip(phi) {
                        let wp = w * ph;
                        for (cell, d) in row.iter_mut().zip(du) {
                            *cell += wp * d;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut jac = [[0.0; 5]; 5];
    for part in &partials {
        for (row, prow) in jac.iter_mut().zip(part) {
            for (cell, v) in row.iter_mut().zip(prow) {
                *cell -= vol * v;
            }
        }
    }
    Block { moments, jac }
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Damped Newton on a square system. `eval` returns the scaled residual and
/// Jacobian; `admissible` rejects steps leaving the parameter domain.
fn newton<E, A>(theta0: DVector<f64>, mut eval: E, admissible: A, opts: &NewtonOptions) -> Result<(DVector<f64>, usize, f64)>
where
    E: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)>,
    A: Fn(&DVector<f64>) -> bool,
{
    let mut theta = theta0;
    let (mut r, mut jac) = eval(&theta)?;
    let mut norm = max_abs(&r);
    for it in 0..opts.max_iterations {
        if norm <= opts.tol {
            return Ok((theta, it, norm));
        }
        let step = jac
            .clone()
            .lu()
            .solve(&(-&r))
            .ok_or(Error::NoConvergence { what: "discrete coefficient Newton (singular Jacobian)", iterations: it })?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &theta + &step * lambda;
            if admissible(&trial) {
                if let Ok((rt, jt)) = eval(&trial) {
                    let nt = max_abs(&rt);
                    if nt < norm {
                        accepted = Some((trial, rt, jt, nt));
                        break;
                    }
                }
            }
            if norm <= opts.stagnation_tol {
                break;
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((t, rt, jt, nt)) => {
                theta = t;
                r = rt;
                jac = jt;
                norm = nt;
            }
            None if norm <= opts.stagnation_tol => return Ok((theta, it, norm)),
            None => {
                return Err(Error::NoConvergence {
                    what: "discrete coefficient Newton (line search)",
                    iterations: it,
                })
            }
        }
    }
    if norm <= opts.stagnation_tol {
        Ok((theta, opts.max_iterations, norm))
    } else {
        Err(Error::NoConvergence {
            what: "discrete coefficient Newton",
            iterations: opts.max_iterations,
        })
    }
}

fn finite(theta: &DVector<f64>) -> bool {
    theta.iter().all(|x| x.is_finite()) && theta[0].abs() < 700.0
}

/// Same-species coefficients whose lattice moments equal `target`. On
/// success `buf` holds the attractor values.
pub fn solve_intra_discrete(
    target: &SpeciesMoments,
    m: f64,
    stats: Statistics,
    grid: &MomentumGrid,
    start: &IntraCoeffs,
    opts: &NewtonOptions,
    buf: &mut [f64],
) -> Result<DiscreteIntra> {
    let p_scale = (m * target.density * 2.0 * target.energy).sqrt();
    let scale = [target.density, p_scale, p_scale, p_scale, target.energy];
    let want = [target.density, target.momentum[0], target.momentum[1], target.momentum[2], target.energy];
    let unpack = |t: &DVector<f64>| (t[0].exp(), [t[1], t[2], t[3]], t[4]);

    let eval = |t: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (a, b, c) = unpack(t);
        let blk = species_block(buf, grid, m, stats, a, b, c);
        let r = DVector::from_fn(5, |i, _| (blk.moments[i] - want[i]) / scale[i]);
        let j = DMatrix::from_fn(5, 5, |i, k| blk.jac[i][k] / scale[i]);
        Ok((r, j))
    };
    let admissible = |t: &DVector<f64>| finite(t) && (!stats.is_boson() || t[4] > 0.0);
    let theta0 = DVector::from_vec(vec![start.a.ln(), start.b[0], start.b[1], start.b[2], start.c]);
    let (theta, iterations, residual) = newton(theta0, eval, admissible, opts)?;
    let (a, b, c) = unpack(&theta);
    fill_equilibrium(buf, a, b, c, m, stats, grid);
    Ok(DiscreteIntra {
        coeffs: IntraCoeffs { a, b, c },
        iterations,
        residual,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct PairSpec {
    pub m1: f64,
    pub m2: f64,
    pub stats1: Statistics,
    pub stats2: Statistics,
}

/// Cross-species coefficients whose lattice moments satisfy the mixture
/// relations for `target1`, `target2`. On success the buffers hold the two
/// attractors.
#[allow(clippy::too_many_arguments)]
pub fn solve_inter_discrete(
    target1: &SpeciesMoments,
    target2: &SpeciesMoments,
    pair: &PairSpec,
    grid: &MomentumGrid,
    start: &InterCoeffs,
    opts: &NewtonOptions,
    buf1: &mut [f64],
    buf2: &mut [f64],
) -> Result<DiscreteInter> {
    let total_mass = pair.m1 * target1.density + pair.m2 * target2.density;
    let e_tot = target1.energy + target2.energy;
    let p_scale = (total_mass * 2.0 * e_tot).sqrt();
    let p_tot = [
        target1.momentum[0] + target2.momentum[0],
        target1.momentum[1] + target2.momentum[1],
        target1.momentum[2] + target2.momentum[2],
    ];
    let want = [target1.density, target2.density, p_tot[0], p_tot[1], p_tot[2], e_tot];
    let scale = [target1.density, target2.density, p_scale, p_scale, p_scale, e_tot];
    let unpack = |t: &DVector<f64>| (t[0].exp(), [t[1], t[2], t[3]], t[4], t[5]);

    let eval = |t: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
        let (a, b, c12, c21) = unpack(t);
        let b1 = species_block(buf1, grid, pair.m1, pair.stats1, a, b, c12);
        let b2 = species_block(buf2, grid, pair.m2, pair.stats2, a, b, c21);
        let got = [
            b1.moments[0],
            b2.moments[0],
            b1.moments[1] + b2.moments[1],
            b1.moments[2] + b2.moments[2],
            b1.moments[3] + b2.moments[3],
            b1.moments[4] + b2.moments[4],
        ];
        let r = DVector::from_fn(6, |i, _| (got[i] - want[i]) / scale[i]);
        let mut j = DMatrix::zeros(6, 6);
        for col in 0..4 {
            j[(0, col)] = b1.jac[0][col];
            j[(1, col)] = b2.jac[0][col];
            for row in 1..5 {
                j[(row + 1, col)] = b1.jac[row][col] + b2.jac[row][col];
            }
        }
        j[(0, 4)] = b1.jac[0][4];
        j[(1, 5)] = b2.jac[0][4];
        for row in 1..5 {
            j[(row + 1, 4)] = b1.jac[row][4];
            j[(row + 1, 5)] = b2.jac[row][4];
        }
        for row in 0..6 {
            for col in 0..6 {
                j[(row, col)] /= scale[row];
            }
        }
        Ok((r, j))
    };
    let admissible = |t: &DVector<f64>| {
        finite(t) && (!pair.stats1.is_boson() || t[4] > 0.0) && (!pair.stats2.is_boson() || t[5] > 0.0)
    };
    let theta0 = DVector::from_vec(vec![start.a.ln(), start.b[0], start.b[1], start.b[2], start.c12, start.c21]);
    let (theta, iterations, residual) = newton(theta0, eval, admissible, opts)?;
    let (a, b, c12, c21) = unpack(&theta);
    fill_equilibrium(buf1, a, b, c12, pair.m1, pair.stats1, grid);
    fill_equilibrium(buf2, a, b, c21, pair.m2, pair.stats2, grid);
    Ok(DiscreteInter {
        coeffs: InterCoeffs { a, b, c12, c21 },
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{discrete_moments, eval_equilibrium, DistributionField};
    use crate::equilibrium::{solve_intra, solve_inter, MixtureProblem, Species};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn intra_matches_lattice_moments_of_a_bimodal_field() {
        let g = MomentumGrid::new(7.0, 16).unwrap();
        let s = Statistics::Fermion;
        let l = eval_equilibrium(1.0, [0.6, 0.0, 0.0], -1.0, 1.0, s, &g).unwrap();
        let r = eval_equilibrium(1.0, [-0.4, 0.2, 0.0], -1.0, 1.0, s, &g).unwrap();
        let values = l.values.iter().zip(&r.values).map(|(x, y)| 0.5 * (x + y)).collect();
        let f = DistributionField { values, stats: s, m: 1.0 };
        let target = discrete_moments(&f, &g);
        let start = solve_intra(1.0, s, &target).unwrap().coeffs;
        let mut buf = vec![0.0; g.num_nodes()];
        let sol = solve_intra_discrete(&target, 1.0, s, &g, &start, &NewtonOptions::default(), &mut buf).unwrap();
        let got = discrete_moments(&DistributionField { values: buf, stats: s, m: 1.0 }, &g);
        assert!(rel(got.density, target.density) < 1e-14);
        assert!(rel(got.energy, target.energy) < 1e-14);
        for k in 0..3 {
            assert!((got.momentum[k] - target.momentum[k]).abs() < 1e-14);
        }
        assert!(sol.residual <= 1e-12);
    }

    #[test]
    fn inter_matches_lattice_totals() {
        let g = MomentumGrid::new(8.0, 16).unwrap();
        let (s1, s2) = (Statistics::Fermion, Statistics::Boson);
        let f1 = eval_equilibrium(1.2, [0.3, 0.0, 0.0], 0.2, 1.0, s1, &g).unwrap();
        let f2 = eval_equilibrium(0.8, [-0.1, 0.1, 0.0], 0.9, 2.0, s2, &g).unwrap();
        let (t1, t2) = (discrete_moments(&f1, &g), discrete_moments(&f2, &g));
        let prob = MixtureProblem::new(
            Species { mass: 1.0, statistics: s1 },
            Species { mass: 2.0, statistics: s2 },
            t1,
            t2,
        );
        let start = solve_inter(&prob).unwrap().coeffs;
        let pair = PairSpec { m1: 1.0, m2: 2.0, stats1: s1, stats2: s2 };
        let (mut b1, mut b2) = (vec![0.0; g.num_nodes()], vec![0.0; g.num_nodes()]);
        solve_inter_discrete(&t1, &t2, &pair, &g, &start, &NewtonOptions::default(), &mut b1, &mut b2).unwrap();
        let g1 = discrete_moments(&DistributionField { values: b1, stats: s1, m: 1.0 }, &g);
        let g2 = discrete_moments(&DistributionField { values: b2, stats: s2, m: 2.0 }, &g);
        assert!(rel(g1.density, t1.density) < 1e-14);
        assert!(rel(g2.density, t2.density) < 1e-14);
        assert!(rel(g1.energy + g2.energy, t1.energy + t2.energy) < 1e-14);
        for k in 0..3 {
            let want = t1.momentum[k] + t2.momentum[k];
            assert!((g1.momentum[k] + g2.momentum[k] - want).abs() < 1e-14);
        }
    }
}
