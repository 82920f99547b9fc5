//! Semi-infinite moment integrals of Fermi–Dirac and Bose–Einstein
//! occupancies, their ratios, and the monotone inverses the equilibrium
//! solver is built on.
//!
//! Everything reduces to the radial integrals
//! `R_s(x) = ∫_0^∞ r^s / (e^{r²+x} + τ) dr` for `s ∈ {0, 2, 4}`:
//!
//! * `h_τ(x)      = 4π R_2(x)`  (number moment, [`moment0`])
//! * `∫|p|² …dp   = 4π R_4(x)`  ([`moment2`])
//! * `j_τ(x)      = h_τ(x) / (4π R_4(x))^{3/5}`
//! * `D_τ(x)      = (9/5) R_2² − R_4 R_0`

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{composite, graded_breaks};
use crate::root::{self, Root};

/// Occupancy statistics. The sign `τ` enters the occupancy as `1/(e^u + τ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    /// `τ = +1`, Fermi–Dirac.
    Fermion,
    /// `τ = −1`, Bose–Einstein.
    Boson,
}

impl Statistics {
    pub fn tau(self) -> f64 {
        match self {
            Statistics::Fermion => 1.0,
            Statistics::Boson => -1.0,
        }
    }

    pub fn from_tau(tau: i32) -> Result<Self> {
        match tau {
            1 => Ok(Statistics::Fermion),
            -1 => Ok(Statistics::Boson),
            other => Err(Error::Domain(format!("statistics sign must be ±1, got {other}"))),
        }
    }

    pub fn tau_int(self) -> i32 {
        match self {
            Statistics::Fermion => 1,
            Statistics::Boson => -1,
        }
    }

    /// Left end of the domain on which the equilibrium relations are posed:
    /// `−∞` for fermions, `0` for bosons.
    pub fn lower_limit(self) -> f64 {
        match self {
            Statistics::Fermion => f64::NEG_INFINITY,
            Statistics::Boson => 0.0,
        }
    }

    pub fn is_boson(self) -> bool {
        self == Statistics::Boson
    }
}

/// Below this a boson fugacity is treated as exactly zero.
pub const BOSE_ZERO_SNAP: f64 = 1e-12;
/// Fermion brackets start here and expand downward.
pub const FERMION_BRACKET_START: f64 = -50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralAccuracy {
    pub rel_tol: f64,
    /// Radial cutoff; `None` selects `sqrt(max(0, 40 − x)) + 10`.
    pub tail_cutoff: Option<f64>,
}

impl Default for IntegralAccuracy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            tail_cutoff: None,
        }
    }
}

impl IntegralAccuracy {
    pub fn cutoff_for(&self, x: f64) -> f64 {
        self.tail_cutoff
            .unwrap_or_else(|| default_tail_cutoff(x))
    }
}

pub fn default_tail_cutoff(x: f64) -> f64 {
    (40.0 - x).max(0.0).sqrt() + 10.0
}

/// `1 / (e^u + τ)` without overflow for either sign of `u`.
#[inline]
pub fn occupancy(stats: Statistics, u: f64) -> f64 {
    match stats {
        Statistics::Fermion => {
            if u > 0.0 {
                let e = (-u).exp();
                e / (1.0 + e)
            } else {
                1.0 / (u.exp() + 1.0)
            }
        }
        Statistics::Boson => 1.0 / u.exp_m1(),
    }
}

/// `limₓ→−∞ j_{+1}(x) = (4π)^{2/5} 5^{3/5} / 3`.
pub fn fermion_j_limit() -> f64 {
    (4.0 * PI).powf(0.4) * 5f64.powf(0.6) / 3.0
}

/// The three radial integrals `R_0, R_2, R_4` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMoments {
    pub r0: f64,
    pub r2: f64,
    pub r4: f64,
}

impl RadialMoments {
    pub fn moment0(&self) -> f64 {
        4.0 * PI * self.r2
    }

    pub fn moment2(&self) -> f64 {
        4.0 * PI * self.r4
    }

    pub fn j(&self) -> f64 {
        self.moment0() / self.moment2().powf(0.6)
    }

    pub fn d(&self) -> f64 {
        1.8 * self.r2 * self.r2 - self.r4 * self.r0
    }
}

fn check_domain(stats: Statistics, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {x}")));
    }
    match stats {
        Statistics::Boson if x < 0.0 => Err(Error::Domain(format!(
            "Bose integrals need x >= 0, got {x}"
        ))),
        Statistics::Boson if x < BOSE_ZERO_SNAP => Ok(0.0),
        _ => Ok(x),
    }
}

/// Real part and distance from the real axis of the singularity of the
/// radial integrand closest to the positive real axis.
fn nearest_pole(stats: Statistics, x: f64) -> (f64, f64) {
    match stats {
        Statistics::Fermion => complex_sqrt(-x, PI),
        Statistics::Boson => (0.0, x.sqrt().max(1e-6)),
    }
}

fn complex_sqrt(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if a >= 0.0 {
        let re = (0.5 * (r + a)).sqrt();
        (re, b / (2.0 * re))
    } else {
        let im = (0.5 * (r - a)).sqrt();
        (b / (2.0 * im), im)
    }
}

pub fn radial_moments(stats: Statistics, x: f64) -> Result<RadialMoments> {
    radial_moments_with(stats, x, &IntegralAccuracy::default())
}

pub fn radial_moments_with(
    stats: Statistics,
    x: f64,
    acc: &IntegralAccuracy,
) -> Result<RadialMoments> {
    let x = check_domain(stats, x)?;
    let cutoff = acc.cutoff_for(x);
    let (center, delta) = nearest_pole(stats, x);
    let breaks = graded_breaks(center, delta, cutoff);

    // R_0 diverges for a boson gas at x = 0.
    let r0_finite = !(stats.is_boson() && x == 0.0);

    let (vals, diffs) = composite::<3, _>(&breaks, |r| {
        let r2 = r * r;
        let f = occupancy(stats, r2 + x);
        [if r0_finite { f } else { 0.0 }, r2 * f, r2 * r2 * f]
    });

    for k in 0..3 {
        if k == 0 && !r0_finite {
            continue;
        }
        if !vals[k].is_finite() {
            return Err(Error::Accuracy {
                estimate: f64::INFINITY,
                tol: acc.rel_tol,
            });
        }
        if diffs[k] > acc.rel_tol * vals[k].abs() {
            return Err(Error::Accuracy {
                estimate: diffs[k] / vals[k].abs(),
                tol: acc.rel_tol,
            });
        }
    }

    Ok(RadialMoments {
        r0: if r0_finite { vals[0] } else { f64::INFINITY },
        r2: vals[1],
        r4: vals[2],
    })
}

/// `h_τ(x) = ∫_{R³} 1/(e^{|p|²+x} + τ) dp`.
pub fn moment0(stats: Statistics, x: f64) -> Result<f64> {
    Ok(radial_moments(stats, x)?.moment0())
}

/// `∫_{R³} |p|²/(e^{|p|²+x} + τ) dp`.
pub fn moment2(stats: Statistics, x: f64) -> Result<f64> {
    Ok(radial_moments(stats, x)?.moment2())
}

pub fn j_val(stats: Statistics, x: f64) -> Result<f64> {
    Ok(radial_moments(stats, x)?.j())
}

/// `D_τ(x)`; `−∞` for a boson gas at `x = 0`, where `R_0` diverges.
pub fn d_func(stats: Statistics, x: f64) -> Result<f64> {
    let m = radial_moments(stats, x)?;
    if m.r0.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(m.d())
}

/// Supremum of `j_τ` over its domain: the closed-form limit for fermions,
/// `j_{−1}(0)` for bosons.
pub fn j_sup(stats: Statistics) -> Result<f64> {
    match stats {
        Statistics::Fermion => Ok(fermion_j_limit()),
        Statistics::Boson => j_val(stats, 0.0),
    }
}

/// Inverse of the strictly decreasing `h_τ`.
pub fn inv_moment0(stats: Statistics, target: f64) -> Result<f64> {
    Ok(inv_moment0_root(stats, target)?.x)
}

pub fn inv_moment0_root(stats: Statistics, target: f64) -> Result<Root> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Domain(format!("h^-1 needs a positive target, got {target}")));
    }
    let h = |x: f64| moment0(stats, x);
    match stats {
        Statistics::Boson => {
            let h0 = h(0.0)?;
            if target > h0 * (1.0 + 1e-12) {
                return Err(Error::Range { target, max: h0 });
            }
            if target >= h0 {
                return Ok(Root { x: 0.0, iterations: 0 });
            }
            let hi = root::expand_up(&h, target, 0.0, 1.0, 64)?;
            root::bisect_decreasing(h, target, 0.0, hi)
        }
        Statistics::Fermion => {
            let start = FERMION_BRACKET_START;
            let lo = if h(start)? >= target {
                start
            } else {
                root::expand_down(&h, target, 2.0 * start, 64)?
            };
            let hi = root::expand_up(&h, target, lo, 1.0, 64)?;
            root::bisect_decreasing(h, target, lo, hi)
        }
    }
}

/// The moment functions of a two-species pair at fixed masses and densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixturePair {
    pub stats1: Statistics,
    pub stats2: Statistics,
    pub m1: f64,
    pub m2: f64,
    pub n1: f64,
    pub n2: f64,
}

impl MixturePair {
    pub fn new(stats1: Statistics, stats2: Statistics, m1: f64, m2: f64, n1: f64, n2: f64) -> Result<Self> {
        for (name, v) in [("m1", m1), ("m2", m2), ("N1", n1), ("N2", n2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { stats1, stats2, m1, m2, n1, n2 })
    }

    /// `m1^{3/2} N2 / (m2^{3/2} N1)`, the factor mapping `h_τ(x)` to `h_τ'(y)`.
    pub fn density_scale(&self) -> f64 {
        (self.m1 / self.m2).powf(1.5) * self.n2 / self.n1
    }

    pub fn y(&self, x: f64) -> Result<f64> {
        let target = self.density_scale() * moment0(self.stats1, x)?;
        inv_moment0(self.stats2, target)
    }

    /// `max{l(τ), h_τ^{-1}(m2^{3/2} N1 / (m1^{3/2} N2) · h_τ'(l(τ')))}`; may be `−∞`.
    pub fn admissible_lower_bound(&self) -> Result<f64> {
        let l1 = self.stats1.lower_limit();
        if self.stats2 == Statistics::Fermion {
            // h_{+1}(−∞) = ∞, whose preimage is the left end of the domain.
            return Ok(l1);
        }
        let t = moment0(Statistics::Boson, 0.0)? / self.density_scale();
        let inner = match self.stats1 {
            Statistics::Boson if t >= moment0(Statistics::Boson, 0.0)? => l1,
            _ => inv_moment0(self.stats1, t)?,
        };
        Ok(inner.max(l1))
    }

    fn k_from(&self, rx: &RadialMoments, ry: &RadialMoments) -> f64 {
        let w1 = self.m1.powf(1.5);
        let w2 = self.m2.powf(1.5);
        w1 * rx.moment0() / (w1 * rx.moment2() + w2 * ry.moment2()).powf(0.6)
    }

    /// `g_{τ,τ'}(x) = k_{τ,τ'}(x, y(x))` on the admissible domain.
    pub fn g(&self, x: f64) -> Result<f64> {
        let lb = self.admissible_lower_bound()?;
        self.g_unchecked(x, lb)
    }

    pub(crate) fn g_unchecked(&self, x: f64, lower_bound: f64) -> Result<f64> {
        if lower_bound.is_finite() && x < lower_bound - 1e-12 * lower_bound.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "g evaluated at {x}, below admissible bound {lower_bound}"
            )));
        }
        let rx = radial_moments(self.stats1, x)?;
        let target = self.density_scale() * rx.moment0();
        let y = inv_moment0(self.stats2, target)?;
        let ry = radial_moments(self.stats2, y)?;
        Ok(self.k_from(&rx, &ry))
    }

    /// Limit of `g` as `x → −∞`, defined for the fermion–fermion pair.
    pub fn fermion_limit(&self) -> Option<f64> {
        if self.stats1 != Statistics::Fermion || self.stats2 != Statistics::Fermion {
            return None;
        }
        let w1 = self.m1.powf(1.5);
        let w2 = self.m2.powf(1.5);
        let rho = self.density_scale();
        Some(fermion_j_limit() * w1 / (w1 + w2 * rho.powf(5.0 / 3.0)).powf(0.6))
    }

    /// `sup g` over the admissible domain.
    pub fn boundary_value(&self) -> Result<f64> {
        let lb = self.admissible_lower_bound()?;
        if lb.is_finite() {
            self.g_unchecked(lb, lb)
        } else {
            self.fermion_limit()
                .ok_or_else(|| Error::Domain("unbounded admissible domain".into()))
        }
    }

    /// `g'(x)` from the closed-form identity in terms of `D_τ` and `D_τ'`.
    pub fn g_derivative(&self, x: f64) -> Result<f64> {
        let rx = radial_moments(self.stats1, x)?;
        let y = inv_moment0(self.stats2, self.density_scale() * rx.moment0())?;
        let ry = radial_moments(self.stats2, y)?;
        let w1 = self.m1.powf(1.5);
        let w2 = self.m2.powf(1.5);
        let num = w1 * w1 * rx.d() + w1 * w2 * (rx.r0 / ry.r0) * ry.d();
        let den = (w1 * rx.moment2() + w2 * ry.moment2()).powf(1.6);
        Ok(8.0 * PI * PI * num / den)
    }
}

/// `y(x) = h_τ'^{-1}(m1^{3/2} N2 / (m2^{3/2} N1) · h_τ(x))`.
#[allow(clippy::too_many_arguments)]
pub fn y_of_x(
    stats1: Statistics,
    stats2: Statistics,
    m1: f64,
    m2: f64,
    n1: f64,
    n2: f64,
    x: f64,
) -> Result<f64> {
    MixturePair::new(stats1, stats2, m1, m2, n1, n2)?.y(x)
}

#[allow(clippy::too_many_arguments)]
pub fn g_val(
    stats1: Statistics,
    stats2: Statistics,
    m1: f64,
    m2: f64,
    n1: f64,
    n2: f64,
    x: f64,
) -> Result<f64> {
    MixturePair::new(stats1, stats2, m1, m2, n1, n2)?.g(x)
}
