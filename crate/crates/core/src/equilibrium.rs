//! Equilibrium coefficients of the intra- and inter-species attractors.
//!
//! An attractor for species `i` has the form
//! `1 / (e^{m_i a |p/m_i − b|² + c} + τ_i)`. The same-species coefficients
//! `(a_i, b_i, c_i)` are fixed by that species' own number, momentum and energy
//! densities; the cross-species pair `(a, b, c12, c21)` shares `a` and `b` and
//! is fixed by the two densities plus the total momentum and energy.
//!
//! Both reduce to one-dimensional monotone root problems: `j_τ(c) = ratio`
//! for a single species and `g_{τ,τ'}(c12) = ratio` for the pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Infeasibility, Result};
use crate::quantum_integrals::{
    fermion_j_limit, j_val, moment0, radial_moments, MixturePair, Statistics,
    FERMION_BRACKET_START,
};
use crate::root;

pub type Vec3 = [f64; 3];

/// Densities below this are rejected rather than propagated.
pub const MIN_DENSITY: f64 = 1e-300;
/// Relative band around a feasibility bound treated as equality.
pub const BOUNDARY_BAND: f64 = 1e-12;

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Number, momentum and kinetic-energy densities of one species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciesMoments {
    pub density: f64,
    pub momentum: Vec3,
    pub energy: f64,
}

impl SpeciesMoments {
    pub fn new(density: f64, momentum: Vec3, energy: f64) -> Self {
        Self { density, momentum, energy }
    }

    /// Moments seen from a frame moving with velocity `u`.
    pub fn boosted(&self, m: f64, u: Vec3) -> Self {
        let mn = m * self.density;
        let momentum = [
            self.momentum[0] + mn * u[0],
            self.momentum[1] + mn * u[1],
            self.momentum[2] + mn * u[2],
        ];
        let energy = self.energy + dot(&self.momentum, &u) + 0.5 * mn * dot(&u, &u);
        Self { density: self.density, momentum, energy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntraCoeffs {
    pub a: f64,
    pub b: Vec3,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterCoeffs {
    pub a: f64,
    pub b: Vec3,
    pub c12: f64,
    pub c21: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub mass: f64,
    pub statistics: Statistics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureProblem {
    pub species1: Species,
    pub species2: Species,
    pub mom1: SpeciesMoments,
    pub mom2: SpeciesMoments,
}

impl MixtureProblem {
    pub fn new(species1: Species, species2: Species, mom1: SpeciesMoments, mom2: SpeciesMoments) -> Self {
        Self { species1, species2, mom1, mom2 }
    }

    fn swapped(&self) -> Self {
        Self {
            species1: self.species2,
            species2: self.species1,
            mom1: self.mom2,
            mom2: self.mom1,
        }
    }

    /// `m1 N1 + m2 N2`.
    pub fn total_mass(&self) -> f64 {
        self.species1.mass * self.mom1.density + self.species2.mass * self.mom2.density
    }

    pub fn total_momentum(&self) -> Vec3 {
        let (p, q) = (self.mom1.momentum, self.mom2.momentum);
        [p[0] + q[0], p[1] + q[1], p[2] + q[2]]
    }

    pub fn total_energy(&self) -> f64 {
        self.mom1.energy + self.mom2.energy
    }

    /// `2E1 + 2E2 − |P1 + P2|² / (m1 N1 + m2 N2)`.
    pub fn mixture_internal_energy(&self) -> f64 {
        let p = self.total_momentum();
        2.0 * self.total_energy() - dot(&p, &p) / self.total_mass()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntraSolution {
    pub coeffs: IntraCoeffs,
    pub iterations: usize,
    /// Ratio sat on the fermion bound; `c` was clamped to the bracket start.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterSolution {
    pub coeffs: InterCoeffs,
    pub iterations: usize,
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// First step of the upward bracket search for the fugacity.
    pub bracket_step: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { bracket_step: 1.0 }
    }
}

/// `2 m E − |P|² / N`.
pub fn internal_energy_scalar(m: f64, mom: &SpeciesMoments) -> f64 {
    2.0 * m * mom.energy - dot(&mom.momentum, &mom.momentum) / mom.density
}

enum Boundary {
    Interior(f64),
    Clamped,
}

fn intra_ratio(m: f64, stats: Statistics, mom: &SpeciesMoments) -> std::result::Result<Boundary, Infeasibility> {
    if !(mom.density >= MIN_DENSITY) {
        return Err(Infeasibility::DegenerateDensity { species: 1 });
    }
    let e_int = internal_energy_scalar(m, mom);
    if !(e_int > 0.0) {
        return Err(Infeasibility::NonpositiveInternalEnergy { species: 1 });
    }
    let ratio = mom.density / e_int.powf(0.6);
    let bound = match stats {
        Statistics::Fermion => fermion_j_limit(),
        Statistics::Boson => j_val(stats, 0.0).map_err(|_| Infeasibility::CondensationEdge)?,
    };
    if ratio > bound * (1.0 + BOUNDARY_BAND) {
        return Err(Infeasibility::IntraRatioAboveBound { species: 1, ratio, bound });
    }
    if ratio >= bound * (1.0 - BOUNDARY_BAND) {
        return match stats {
            Statistics::Fermion => Ok(Boundary::Clamped),
            Statistics::Boson => Err(Infeasibility::CondensationEdge),
        };
    }
    Ok(Boundary::Interior(ratio))
}

pub fn intra_feasibility(m: f64, stats: Statistics, mom: &SpeciesMoments) -> std::result::Result<(), Infeasibility> {
    intra_ratio(m, stats, mom).map(|_| ())
}

pub fn check_feasibility_intra(m: f64, stats: Statistics, mom: &SpeciesMoments) -> bool {
    intra_feasibility(m, stats, mom).is_ok()
}

/// Same-species attractor coefficients reproducing `(N, P, E)`.
pub fn solve_intra(m: f64, stats: Statistics, mom: &SpeciesMoments) -> Result<IntraSolution> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    let (c, iterations, clamped) = match intra_ratio(m, stats, mom)? {
        Boundary::Clamped => (FERMION_BRACKET_START, 0, true),
        Boundary::Interior(ratio) => {
            let j = |x: f64| j_val(stats, x);
            let lo = match stats {
                Statistics::Boson => 0.0,
                Statistics::Fermion => {
                    if j(FERMION_BRACKET_START)? >= ratio {
                        FERMION_BRACKET_START
                    } else {
                        root::expand_down(&j, ratio, 2.0 * FERMION_BRACKET_START, 64)?
                    }
                }
            };
            let hi = root::expand_up(&j, ratio, lo, 1.0, 64)?;
            let r = root::bisect_decreasing(j, ratio, lo, hi)?;
            (r.x, r.iterations, false)
        }
    };
    let h = moment0(stats, c)?;
    let a = m * h.powf(2.0 / 3.0) * mom.density.powf(-2.0 / 3.0);
    let mn = m * mom.density;
    let b = [mom.momentum[0] / mn, mom.momentum[1] / mn, mom.momentum[2] / mn];
    Ok(IntraSolution {
        coeffs: IntraCoeffs { a, b, c },
        iterations,
        clamped,
    })
}

/// Validated inputs for the cross-species root problem, already in
/// fermion-first order.
struct InterSetup {
    prob: MixtureProblem,
    swapped: bool,
    pair: MixturePair,
    e_mix: f64,
    lower_bound: f64,
    boundary: Boundary,
}

fn inter_setup(prob: &MixtureProblem) -> Result<InterSetup> {
    let swapped = prob.species1.statistics == Statistics::Boson
        && prob.species2.statistics == Statistics::Fermion;
    let p = if swapped { prob.swapped() } else { *prob };
    let user_index = |solver_index: usize| if swapped { 3 - solver_index } else { solver_index };

    for (i, sp) in [(1, &p.species1), (2, &p.species2)] {
        if !(sp.mass > 0.0) {
            return Err(Error::Domain(format!("species {} mass must be positive", user_index(i))));
        }
    }
    for (i, mom) in [(1, &p.mom1), (2, &p.mom2)] {
        if !(mom.density >= MIN_DENSITY) {
            return Err(Infeasibility::DegenerateDensity { species: user_index(i) }.into());
        }
    }
    let e_mix = p.mixture_internal_energy();
    if !(e_mix > 0.0) {
        return Err(Infeasibility::NonpositiveMixtureEnergy.into());
    }
    let ratio = p.mom1.density / e_mix.powf(0.6);
    let pair = MixturePair::new(
        p.species1.statistics,
        p.species2.statistics,
        p.species1.mass,
        p.species2.mass,
        p.mom1.density,
        p.mom2.density,
    )?;
    let lower_bound = pair.admissible_lower_bound()?;
    let bound = pair.boundary_value()?;
    if ratio > bound * (1.0 + BOUNDARY_BAND) {
        return Err(Infeasibility::MixtureRatioAboveBound { ratio, bound }.into());
    }
    let any_boson = p.species1.statistics.is_boson() || p.species2.statistics.is_boson();
    let boundary = if ratio >= bound * (1.0 - BOUNDARY_BAND) {
        if any_boson {
            return Err(Infeasibility::CondensationEdge.into());
        }
        Boundary::Clamped
    } else {
        Boundary::Interior(ratio)
    };
    Ok(InterSetup {
        prob: p,
        swapped,
        pair,
        e_mix,
        lower_bound,
        boundary,
    })
}

pub fn inter_feasibility(prob: &MixtureProblem) -> std::result::Result<(), Infeasibility> {
    match inter_setup(prob) {
        Ok(_) => Ok(()),
        Err(Error::Infeasible(reason)) => Err(reason),
        // Bracket and accuracy failures while probing the bound count as infeasible edges.
        Err(_) => Err(Infeasibility::CondensationEdge),
    }
}

pub fn check_feasibility_inter(prob: &MixtureProblem) -> bool {
    inter_feasibility(prob).is_ok()
}

pub fn solve_inter(prob: &MixtureProblem) -> Result<InterSolution> {
    solve_inter_with(prob, &SolverOptions::default())
}

pub fn solve_inter_with(prob: &MixtureProblem, opts: &SolverOptions) -> Result<InterSolution> {
    let setup = inter_setup(prob)?;
    let pair = setup.pair;
    let lb = setup.lower_bound;
    let g = |x: f64| pair.g_unchecked(x, lb);

    let (c12, iterations, clamped) = match setup.boundary {
        Boundary::Clamped => (FERMION_BRACKET_START, 0, true),
        Boundary::Interior(ratio) => {
            let lo = if lb.is_finite() {
                let lo = lb + 1e-12 * lb.abs().max(1.0);
                if g(lo)? < ratio {
                    return Err(Error::Bracket(format!(
                        "g at admissible bound {lo} already below target {ratio}"
                    )));
                }
                lo
            } else if g(FERMION_BRACKET_START)? >= ratio {
                FERMION_BRACKET_START
            } else {
                root::expand_down(&g, ratio, 2.0 * FERMION_BRACKET_START, 64)?
            };
            let hi = root::expand_up(&g, ratio, lo, opts.bracket_step, 64)?;
            let r = root::bisect_decreasing(g, ratio, lo, hi)?;
            (r.x, r.iterations, false)
        }
    };

    let c21 = pair.y(c12)?;
    let p = &setup.prob;
    let w1 = p.species1.mass.powf(1.5);
    let w2 = p.species2.mass.powf(1.5);
    let m2_12 = radial_moments(p.species1.statistics, c12)?.moment2();
    let m2_21 = radial_moments(p.species2.statistics, c21)?.moment2();
    let a = ((w1 * m2_12 + w2 * m2_21) / setup.e_mix).powf(0.4);
    let total = p.total_mass();
    let pt = p.total_momentum();
    let b = [pt[0] / total, pt[1] / total, pt[2] / total];

    let (c12, c21) = if setup.swapped { (c21, c12) } else { (c12, c21) };
    Ok(InterSolution {
        coeffs: InterCoeffs { a, b, c12, c21 },
        iterations,
        clamped,
    })
}

impl IntraCoeffs {
    /// Continuum moments of the attractor these coefficients describe.
    pub fn moments(&self, m: f64, stats: Statistics) -> Result<SpeciesMoments> {
        equilibrium_moments(m, stats, self.a, self.b, self.c)
    }
}

impl InterCoeffs {
    /// Continuum moments of the two cross-species attractors, in user order.
    pub fn moments(&self, s1: &Species, s2: &Species) -> Result<(SpeciesMoments, SpeciesMoments)> {
        Ok((
            equilibrium_moments(s1.mass, s1.statistics, self.a, self.b, self.c12)?,
            equilibrium_moments(s2.mass, s2.statistics, self.a, self.b, self.c21)?,
        ))
    }
}

/// `N = (m/a)^{3/2} h(c)`, `P = m b N`,
/// `E = ½ m^{3/2} a^{−5/2} ∫|p|²… + ½ m |b|² N`.
pub fn equilibrium_moments(m: f64, stats: Statistics, a: f64, b: Vec3, c: f64) -> Result<SpeciesMoments> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    let r = radial_moments(stats, c)?;
    let n = (m / a).powf(1.5) * r.moment0();
    let momentum = [m * b[0] * n, m * b[1] * n, m * b[2] * n];
    let energy = 0.5 * m.powf(1.5) * a.powf(-2.5) * r.moment2() + 0.5 * m * dot(&b, &b) * n;
    Ok(SpeciesMoments { density: n, momentum, energy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub residuals: Vec<Residual>,
    pub max: f64,
    pub tol: f64,
    pub passed: bool,
}

impl ResidualReport {
    fn from_entries(entries: Vec<(&str, f64)>, tol: f64) -> Self {
        let max = entries.iter().map(|e| e.1).fold(0.0, f64::max);
        let any_nan = entries.iter().any(|e| !e.1.is_finite());
        Self {
            residuals: entries
                .into_iter()
                .map(|(name, value)| Residual { name: name.to_string(), value })
                .collect(),
            max: if any_nan { f64::NAN } else { max },
            tol,
            passed: !any_nan && max <= tol,
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.name == name).map(|r| r.value)
    }

    fn failed(names: &[&str], tol: f64) -> Self {
        Self::from_entries(names.iter().map(|n| (*n, f64::NAN)).collect(), tol)
    }
}

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Relative residuals of the same-species constraints: density, momentum
/// (scaled by `sqrt(m N · 2E)`) and energy.
pub fn verify_intra(coeffs: &IntraCoeffs, m: f64, stats: Statistics, mom: &SpeciesMoments, tol: f64) -> ResidualReport {
    let names = ["N", "P", "E"];
    let Ok(got) = coeffs.moments(m, stats) else {
        return ResidualReport::failed(&names, tol);
    };
    let p_scale = (m * mom.density * 2.0 * mom.energy).sqrt();
    let dp = [
        got.momentum[0] - mom.momentum[0],
        got.momentum[1] - mom.momentum[1],
        got.momentum[2] - mom.momentum[2],
    ];
    ResidualReport::from_entries(
        vec![
            ("N", (got.density - mom.density).abs() / mom.density),
            ("P", norm(&dp) / p_scale),
            ("E", (got.energy - mom.energy).abs() / mom.energy),
        ],
        tol,
    )
}

/// Relative residuals of the cross-species constraints: each density, the
/// total momentum (scaled by `sqrt(M · 2E_tot)`) and the total energy.
pub fn verify_coeffs(coeffs: &InterCoeffs, prob: &MixtureProblem, tol: f64) -> ResidualReport {
    let names = ["N1", "N2", "P", "E"];
    let Ok((g1, g2)) = coeffs.moments(&prob.species1, &prob.species2) else {
        return ResidualReport::failed(&names, tol);
    };
    let pt = prob.total_momentum();
    let et = prob.total_energy();
    let p_scale = (prob.total_mass() * 2.0 * et).sqrt();
    let dp = [
        g1.momentum[0] + g2.momentum[0] - pt[0],
        g1.momentum[1] + g2.momentum[1] - pt[1],
        g1.momentum[2] + g2.momentum[2] - pt[2],
    ];
    ResidualReport::from_entries(
        vec![
            ("N1", (g1.density - prob.mom1.density).abs() / prob.mom1.density),
            ("N2", (g2.density - prob.mom2.density).abs() / prob.mom2.density),
            ("P", norm(&dp) / p_scale),
            ("E", (g1.energy + g2.energy - et).abs() / et),
        ],
        tol,
    )
}

/// `a` recovered from species 1's density, `m1 (h(c12)/N1)^{2/3}`; agrees
/// with the energy-based value when the constraints hold.
pub fn inter_a_from_density(coeffs: &InterCoeffs, prob: &MixtureProblem) -> Result<f64> {
    let h = moment0(prob.species1.statistics, coeffs.c12)?;
    Ok(prob.species1.mass * (h / prob.mom1.density).powf(2.0 / 3.0))
}
