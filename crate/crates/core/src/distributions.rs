//! Cubic momentum lattice, attractor evaluation and discrete moments.
//!
//! Nodes are cell centres `p_k = (k + ½ − n/2)·Δp`, so the lattice is exactly
//! symmetric about the origin. Values are stored x-fastest:
//! `index(i, j, k) = i + n·(j + n·k)`.
//!
//! Reductions run one task per mirrored pair of z-planes and add the partial
//! sums in a fixed order, so results do not depend on the thread count. Odd
//! moments are accumulated as `p·(f(p) − f(−p))`, which is exactly zero for
//! an even field.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{norm, SpeciesMoments, Vec3};
use crate::error::{Error, Result};
use crate::quantum_integrals::{occupancy, Statistics};

/// Largest double below one.
pub const FERMION_CAP: f64 = 1.0 - f64::EPSILON / 2.0;
/// Tolerated overshoot of the fermion bound before `h_functional` rejects a field.
pub const FERMION_OVERSHOOT: f64 = 1e-12;
/// Thermal widths kept inside the box beyond the Fermi radius.
pub const TAIL_WIDTHS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub p_max: f64,
    pub n: usize,
}

impl MomentumGrid {
    pub fn new(p_max: f64, n: usize) -> Result<Self> {
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::Domain(format!("p_max must be positive, got {p_max}")));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Domain(format!("n must be even and at least 4, got {n}")));
        }
        Ok(Self { p_max, n })
    }

    /// Smallest box whose outermost nodes lie beyond every `extent`.
    pub fn covering(n: usize, extents: impl IntoIterator<Item = f64>) -> Result<Self> {
        let reach = extents.into_iter().fold(0.0, f64::max);
        let n_f = n as f64;
        Self::new(reach / (1.0 - 1.0 / n_f), n)
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.dp().powi(3)
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 + 0.5 - self.n as f64 / 2.0) * self.dp()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    pub fn num_nodes(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    pub fn momentum(&self, idx: usize) -> Vec3 {
        let n = self.n;
        [self.node(idx % n), self.node((idx / n) % n), self.node(idx / (n * n))]
    }
}

/// Radius around `m b` that must fit inside the box for the attractor
/// `(m, a, b, c)` to be below 1e-12 on the boundary nodes.
pub fn tail_extent(m: f64, a: f64, b: Vec3, c: f64) -> f64 {
    m * norm(&b) + (m / a).sqrt() * ((-c).max(0.0).sqrt() + TAIL_WIDTHS)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    pub values: Vec<f64>,
    pub stats: Statistics,
    pub m: f64,
}

impl DistributionField {
    pub fn zeros(grid: &MomentumGrid, stats: Statistics, m: f64) -> Self {
        Self { values: vec![0.0; grid.num_nodes()], stats, m }
    }

    pub fn constant(grid: &MomentumGrid, stats: Statistics, m: f64, v: f64) -> Self {
        Self { values: vec![v; grid.num_nodes()], stats, m }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_attractor(a: f64, c: f64, m: f64, stats: Statistics) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a must be positive and finite, got {a}")));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("mass must be positive, got {m}")));
    }
    if !c.is_finite() || (stats.is_boson() && c <= 0.0) {
        return Err(Error::Domain(format!("fugacity parameter {c} outside the {stats:?} domain")));
    }
    Ok(())
}

/// `1 / (e^{(a/m)|p − m b|² + c} + τ)` on every node.
pub fn eval_equilibrium(
    a: f64,
    b: Vec3,
    c: f64,
    m: f64,
    stats: Statistics,
    grid: &MomentumGrid,
) -> Result<DistributionField> {
    check_attractor(a, c, m, stats)?;
    let mut field = DistributionField::zeros(grid, stats, m);
    fill_equilibrium(&mut field.values, a, b, c, m, stats, grid);
    Ok(field)
}

pub(crate) fn fill_equilibrium(
    values: &mut [f64],
    a: f64,
    b: Vec3,
    c: f64,
    m: f64,
    stats: Statistics,
    grid: &MomentumGrid,
) {
    let n = grid.n;
    let nodes = grid.nodes();
    let shifted = |axis: usize| -> Vec<f64> { nodes.iter().map(|p| p - m * b[axis]).collect() };
    let (qx, qy, qz) = (shifted(0), shifted(1), shifted(2));
    let scale = a / m;
    values.par_chunks_mut(n * n).enumerate().for_each(|(k, plane)| {
        let z2 = qz[k] * qz[k];
        for j in 0..n {
            let yz2 = qy[j] * qy[j] + z2;
            for i in 0..n {
                let u = scale * (qx[i] * qx[i] + yz2) + c;
                let f = occupancy(stats, u);
                plane[i + n * j] = match stats {
                    Statistics::Fermion => f.min(FERMION_CAP),
                    Statistics::Boson => f,
                };
            }
        }
    });
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Raw lattice sums `[Σw, Σw p_x, Σw p_y, Σw p_z, Σw |p|²]` of per-node
/// weights `w(f)`; deterministic and parity-exact.
pub(crate) fn lattice_sums<W>(values: &[f64], grid: &MomentumGrid, weight: W) -> [f64; 5]
where
    W: Fn(f64) -> f64 + Sync,
{
    let n = grid.n;
    let half = n / 2;
    let nodes = grid.nodes();
    let sq: Vec<f64> = nodes.iter().map(|p| p * p).collect();
    let plane_len = n * n;
    let plane = |k: usize| &values[k * plane_len..(k + 1) * plane_len];

    let in_plane = |k: usize, acc: &mut [CompensatedSum; 5]| {
        let pl = plane(k);
        let z2 = sq[k];
        for j in 0..n {
            let row = &pl[j * n..(j + 1) * n];
            let yz2 = sq[j] + z2;
            for (i, &f) in row.iter().enumerate() {
                let w = weight(f);
                acc[0].add(w);
                acc[4].add(w * (sq[i] + yz2));
            }
            for i in 0..half {
                acc[1].add(nodes[i] * (weight(row[i]) - weight(row[n - 1 - i])));
            }
        }
        for j in 0..half {
            let (lo, hi) = (&pl[j * n..(j + 1) * n], &pl[(n - 1 - j) * n..(n - j) * n]);
            let mut s = CompensatedSum::default();
            for (x, y) in lo.iter().zip(hi) {
                s.add(weight(*x) - weight(*y));
            }
            acc[2].add(nodes[j] * s.value());
        }
    };

    let partials: Vec<[CompensatedSum; 5]> = (0..half)
        .into_par_iter()
        .map(|k| {
            let mirror = n - 1 - k;
            let mut acc = [CompensatedSum::default(); 5];
            in_plane(k, &mut acc);
            in_plane(mirror, &mut acc);
            let mut s = CompensatedSum::default();
            for (x, y) in plane(k).iter().zip(plane(mirror)) {
                s.add(weight(*x) - weight(*y));
            }
            acc[3].add(nodes[k] * s.value());
            acc
        })
        .collect();

    let mut total = [CompensatedSum::default(); 5];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            t.add(v.sum);
            t.add(v.carry);
        }
    }
    total.map(|t| t.value())
}

/// Midpoint-rule `N = Σf Δp³`, `P = Σf p Δp³`, `E = Σf |p|²/(2m) Δp³`.
pub fn discrete_moments(field: &DistributionField, grid: &MomentumGrid) -> SpeciesMoments {
    let s = lattice_sums(&field.values, grid, |f| f);
    let v = grid.cell_volume();
    SpeciesMoments {
        density: v * s[0],
        momentum: [v * s[1], v * s[2], v * s[3]],
        energy: v * s[4] / (2.0 * field.m),
    }
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Entropy density `s_τ(f)`; the limit value 0 is used at `f ∈ {0, 1}`.
pub fn entropy_density(stats: Statistics, f: f64) -> f64 {
    match stats {
        Statistics::Fermion => {
            let f = f.clamp(0.0, 1.0);
            let g = 1.0 - f;
            xlogx(f) + if g <= 0.0 { 0.0 } else { g * (-f).ln_1p() }
        }
        Statistics::Boson => {
            let f = f.max(0.0);
            xlogx(f) - (1.0 + f) * f.ln_1p()
        }
    }
}

fn check_field(field: &DistributionField) -> Result<()> {
    for &f in &field.values {
        if !(f >= -FERMION_OVERSHOOT) {
            return Err(Error::Domain(format!("negative occupancy {f}")));
        }
        if field.stats == Statistics::Fermion && f > 1.0 + FERMION_OVERSHOOT {
            return Err(Error::Domain(format!("fermion occupancy {f} exceeds 1")));
        }
    }
    Ok(())
}

/// `Δp³ Σ s_τ(f)` for one species.
pub fn entropy(field: &DistributionField, grid: &MomentumGrid) -> Result<f64> {
    check_field(field)?;
    let stats = field.stats;
    let s = lattice_sums(&field.values, grid, |f| entropy_density(stats, f));
    Ok(grid.cell_volume() * s[0])
}

/// Two-species H-functional.
pub fn h_functional(field1: &DistributionField, field2: &DistributionField, grid: &MomentumGrid) -> Result<f64> {
    Ok(entropy(field1, grid)? + entropy(field2, grid)?)
}

/// Velocity-representation moments: `f̄(v) = m³ f(m v)` has the same number
/// and energy densities and mean velocity `P/(mN)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityMoments {
    pub density: f64,
    pub mean_velocity: Vec3,
    pub energy: f64,
}

pub fn p_to_v_moments(mom: &SpeciesMoments, m: f64) -> VelocityMoments {
    let mn = m * mom.density;
    VelocityMoments {
        density: mom.density,
        mean_velocity: [mom.momentum[0] / mn, mom.momentum[1] / mn, mom.momentum[2] / mn],
        energy: mom.energy,
    }
}

pub fn v_to_p_moments(vm: &VelocityMoments, m: f64) -> SpeciesMoments {
    let mn = m * vm.density;
    SpeciesMoments {
        density: vm.density,
        momentum: [mn * vm.mean_velocity[0], mn * vm.mean_velocity[1], mn * vm.mean_velocity[2]],
        energy: vm.energy,
    }
}
