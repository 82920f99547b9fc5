//! Time integration of the two-species relaxation system.
//!
//! Each step recomputes the attractors from start-of-step moments and then
//! solves the frozen-attractor ODE exactly,
//! `f ← e^{−νΔt} f + (1 − e^{−νΔt})·(ν_intra M_ii + ν_inter M_ij)/ν` with
//! `ν = ν_intra + ν_inter`. In slab mode this alternates with first-order
//! upwind transport along x on a periodic domain.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{EquilibriumInit, InitSpec, Mode, SimConfig, Splitting};
use crate::discrete::{solve_inter_discrete, solve_intra_discrete, NewtonOptions, PairSpec};
use crate::distributions::{
    discrete_moments, entropy, eval_equilibrium, tail_extent, DistributionField, MomentumGrid,
};
use crate::equilibrium::{
    inter_feasibility, intra_feasibility, solve_inter, solve_intra, IntraCoeffs, InterCoeffs, MixtureProblem, Species, SpeciesMoments, Vec3,
};
use crate::error::{Error, Result};
use crate::quantum_integrals::Statistics;
use crate::snapshot;

/// Courant numbers up to this much above one are treated as one.
const CFL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub f1: DistributionField,
    pub f2: DistributionField,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub mass1: f64,
    pub mass2: f64,
    pub momentum: Vec3,
    pub energy: f64,
    pub h: f64,
    pub max_f1: f64,
    pub max_f2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub cells: Vec<Cell>,
    pub diagnostics: Vec<DiagnosticRecord>,
}

/// Coefficients of the last step, reused as Newton starting points.
#[derive(Debug, Clone, Copy, Default)]
struct CellCache {
    intra: [Option<IntraCoeffs>; 2],
    inter: Option<InterCoeffs>,
}

/// Attractor coefficients actually used in one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellCoeffs {
    pub intra: [Option<IntraCoeffs>; 2],
    pub inter: Option<InterCoeffs>,
}

pub struct Simulation {
    pub config: SimConfig,
    pub grid: MomentumGrid,
    pub state: SimState,
    cache: Vec<CellCache>,
    newton: NewtonOptions,
}

fn bimodal(init: &EquilibriumInit, c: f64, m: f64, stats: Statistics, grid: &MomentumGrid) -> Result<DistributionField> {
    let b = init.b;
    let s = init.shift;
    if s == [0.0; 3] {
        return eval_equilibrium(init.a, b, c, m, stats, grid);
    }
    let plus = eval_equilibrium(init.a, [b[0] + s[0], b[1] + s[1], b[2] + s[2]], c, m, stats, grid)?;
    let minus = eval_equilibrium(init.a, [b[0] - s[0], b[1] - s[1], b[2] - s[2]], c, m, stats, grid)?;
    let values = plus.values.iter().zip(&minus.values).map(|(x, y)| 0.5 * (x + y)).collect();
    Ok(DistributionField { values, stats, m })
}

fn init_extent(init: &EquilibriumInit, m: f64, c_min: f64) -> f64 {
    let s = init.shift;
    let b = init.b;
    let reach = |sign: f64| tail_extent(m, init.a, [b[0] + sign * s[0], b[1] + sign * s[1], b[2] + sign * s[2]], c_min);
    reach(1.0).max(reach(-1.0))
}

/// Builds the grid and the initial cells described by `config`.
pub fn initial_state(config: &SimConfig) -> Result<(MomentumGrid, Vec<Cell>)> {
    let sp = &config.species;
    let nx = config.nx;
    match &config.init {
        InitSpec::ShiftedEquilibria { species } => {
            let extents = species
                .iter()
                .zip(sp)
                .filter_map(|(init, s)| init.as_ref().map(|i| init_extent(i, s.mass, i.c)));
            let grid = choose_grid(config, extents)?;
            let field = |k: usize| -> Result<DistributionField> {
                match &species[k] {
                    Some(init) => bimodal(init, init.c, sp[k].mass, sp[k].statistics, &grid),
                    None => Ok(DistributionField::zeros(&grid, sp[k].statistics, sp[k].mass)),
                }
            };
            let cell = Cell { f1: field(0)?, f2: field(1)? };
            Ok((grid, vec![cell; nx]))
        }
        InitSpec::CosinePerturbation { species, amplitude, wavenumber } => {
            let eps = *amplitude;
            let extents = species.iter().zip(sp).map(|(i, s)| init_extent(i, s.mass, i.c - eps.abs()));
            let grid = choose_grid(config, extents)?;
            let dx = config.x_length / nx as f64;
            let cells = (0..nx)
                .map(|j| {
                    let x = (j as f64 + 0.5) * dx;
                    let phase = (2.0 * std::f64::consts::PI * *wavenumber as f64 * x / config.x_length).cos();
                    let field = |k: usize| {
                        let init = &species[k];
                        bimodal(init, init.c - eps * phase, sp[k].mass, sp[k].statistics, &grid)
                    };
                    Ok(Cell { f1: field(0)?, f2: field(1)? })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((grid, cells))
        }
        InitSpec::Snapshot { paths } => {
            let (g1, f1) = snapshot::read(&paths[0])?;
            let (g2, f2) = snapshot::read(&paths[1])?;
            if g1 != g2 {
                return Err(Error::Config("species snapshots are on different grids".into()));
            }
            if config.grid.n != g1.n || config.grid.p_max.is_some_and(|p| p != g1.p_max) {
                return Err(Error::Config(format!(
                    "snapshot grid (n = {}, p_max = {}) does not match config grid",
                    g1.n, g1.p_max
                )));
            }
            for (k, f) in [&f1, &f2].iter().enumerate() {
                if f.stats != sp[k].statistics || f.m != sp[k].mass {
                    return Err(Error::Config(format!("snapshot {k} species does not match config")));
                }
            }
            Ok((g1, vec![Cell { f1, f2 }; nx]))
        }
    }
}

fn choose_grid(config: &SimConfig, extents: impl IntoIterator<Item = f64>) -> Result<MomentumGrid> {
    match config.grid.p_max {
        Some(p) => MomentumGrid::new(p, config.grid.n),
        None => MomentumGrid::covering(config.grid.n, extents),
    }
}

/// Largest `|p_x|/m · dt/dx` over nodes and species.
pub fn courant_number(grid: &MomentumGrid, species: &[Species; 2], dt: f64, dx: f64) -> f64 {
    let v_node = grid.node(grid.n - 1);
    let m_min = species[0].mass.min(species[1].mass);
    v_node / m_min * dt / dx
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let (grid, cells) = initial_state(&config)?;
        if config.mode == Mode::Slab1d {
            let courant = courant_number(&grid, &config.species, config.dt, config.dx());
            if courant > 1.0 + CFL_SLACK {
                return Err(Error::Cfl { courant });
            }
        }
        let mut sim = Self {
            cache: vec![CellCache::default(); cells.len()],
            grid,
            state: SimState { t: 0.0, step: 0, cells, diagnostics: Vec::new() },
            config,
            newton: NewtonOptions::default(),
        };
        let rec = sim.diagnostics()?;
        sim.state.diagnostics.push(rec);
        Ok(sim)
    }

    /// Aggregate invariants and entropy of the current state.
    pub fn diagnostics(&self) -> Result<DiagnosticRecord> {
        let dx = self.config.dx();
        let per_cell: Vec<(SpeciesMoments, SpeciesMoments, f64, f64, f64)> = self
            .state
            .cells
            .par_iter()
            .map(|cell| {
                let h = entropy(&cell.f1, &self.grid)? + entropy(&cell.f2, &self.grid)?;
                Ok((
                    discrete_moments(&cell.f1, &self.grid),
                    discrete_moments(&cell.f2, &self.grid),
                    h,
                    cell.f1.max_value(),
                    cell.f2.max_value(),
                ))
            })
            .collect::<Result<_>>()?;
        let mut rec = DiagnosticRecord {
            t: self.state.t,
            mass1: 0.0,
            mass2: 0.0,
            momentum: [0.0; 3],
            energy: 0.0,
            h: 0.0,
            max_f1: f64::NEG_INFINITY,
            max_f2: f64::NEG_INFINITY,
        };
        for (m1, m2, h, x1, x2) in per_cell {
            rec.mass1 += dx * m1.density;
            rec.mass2 += dx * m2.density;
            for k in 0..3 {
                rec.momentum[k] += dx * (m1.momentum[k] + m2.momentum[k]);
            }
            rec.energy += dx * (m1.energy + m2.energy);
            rec.h += dx * h;
            rec.max_f1 = rec.max_f1.max(x1);
            rec.max_f2 = rec.max_f2.max(x2);
        }
        Ok(rec)
    }

    /// Attractor coefficients for every cell at the current state, without
    /// advancing it.
    pub fn attractors(&mut self) -> Result<Vec<CellCoeffs>> {
        let grid = self.grid;
        let species = self.config.species;
        let discrete = self.config.discrete_consistent;
        let newton = self.newton;
        self.state
            .cells
            .par_iter()
            .zip(self.cache.par_iter_mut())
            .enumerate()
            .map(|(i, (cell, cache))| {
                let mut bufs = AttractorBuffers::new(&grid);
                cell_attractors(cell, cache, &species, &grid, discrete, &newton, &mut bufs)
                    .map(|(c, _)| c)
                    .map_err(|e| Error::Cell { cell: i, source: Box::new(e) })
            })
            .collect()
    }

    /// Inter-species attractor fields of every cell.
    pub fn inter_attractor_fields(&mut self) -> Result<Vec<Option<(DistributionField, DistributionField)>>> {
        let coeffs = self.attractors()?;
        let sp = self.config.species;
        coeffs
            .iter()
            .map(|c| {
                c.inter
                    .map(|ic| {
                        Ok((
                            eval_equilibrium(ic.a, ic.b, ic.c12, sp[0].mass, sp[0].statistics, &self.grid)?,
                            eval_equilibrium(ic.a, ic.b, ic.c21, sp[1].mass, sp[1].statistics, &self.grid)?,
                        ))
                    })
                    .transpose()
            })
            .collect()
    }

    pub fn relax_step(&mut self, dt: f64) -> Result<()> {
        let grid = self.grid;
        let species = self.config.species;
        let discrete = self.config.discrete_consistent;
        let newton = self.newton;
        let nu = self.config.collision;
        self.state
            .cells
            .par_iter_mut()
            .zip(self.cache.par_iter_mut())
            .enumerate()
            .try_for_each(|(i, (cell, cache))| {
                relax_cell(cell, cache, &species, &grid, discrete, &newton, nu.nu_intra, nu.nu_inter, dt)
                    .map_err(|e| Error::Cell { cell: i, source: Box::new(e) })
            })
    }

    pub fn transport_step(&mut self, dt: f64) -> Result<()> {
        if self.config.mode != Mode::Slab1d {
            return Err(Error::Config("transport requires slab1d mode".into()));
        }
        let dx = self.config.dx();
        let courant = courant_number(&self.grid, &self.config.species, dt, dx);
        if courant > 1.0 + CFL_SLACK {
            return Err(Error::Cfl { courant });
        }
        let n = self.grid.n;
        let nodes = self.grid.nodes();
        let nx = self.state.cells.len();
        let old = self.state.cells.clone();
        let species = self.config.species;
        self.state.cells.par_iter_mut().enumerate().for_each(|(c, cell)| {
            let left = &old[(c + nx - 1) % nx];
            let right = &old[(c + 1) % nx];
            for (k, (field, m)) in [(&mut cell.f1, species[0].mass), (&mut cell.f2, species[1].mass)]
                .into_iter()
                .enumerate()
            {
                fn pick(cell: &Cell, k: usize) -> &[f64] {
                    if k == 0 {
                        &cell.f1.values
                    } else {
                        &cell.f2.values
                    }
                }
                let (lv, rv) = (pick(left, k), pick(right, k));
                let here = pick(&old[c], k);
                for (idx, f) in field.values.iter_mut().enumerate() {
                    let v = nodes[idx % n] / m;
                    let nu = (v * dt / dx).abs();
                    let up = if v > 0.0 { lv[idx] } else { rv[idx] };
                    // convex combination of the cell and its upwind neighbour
                    *f = if nu >= 1.0 { up } else { here[idx] + nu * (up - here[idx]) };
                }
            }
        });
        Ok(())
    }

    fn advance(&mut self, dt: f64) -> Result<()> {
        match (self.config.mode, self.config.splitting) {
            (Mode::Homogeneous, _) => self.relax_step(dt),
            (Mode::Slab1d, Splitting::Lie) => {
                self.transport_step(dt)?;
                self.relax_step(dt)
            }
            (Mode::Slab1d, Splitting::Strang) => {
                self.transport_step(0.5 * dt)?;
                self.relax_step(dt)?;
                self.transport_step(0.5 * dt)
            }
        }
    }

    pub fn total_steps(&self) -> usize {
        let ratio = self.config.t_end / self.config.dt;
        (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0) as usize
    }

    /// One full step; returns the step size used.
    pub fn step(&mut self) -> Result<f64> {
        let total = self.total_steps();
        let k = self.state.step;
        let dt = if k + 1 == total {
            self.config.t_end - k as f64 * self.config.dt
        } else {
            self.config.dt
        };
        let t = self.state.t;
        self.advance(dt).map_err(|e| Error::Step { step: k + 1, t, source: Box::new(e) })?;
        self.state.step = k + 1;
        self.state.t = if k + 1 == total {
            self.config.t_end
        } else {
            (k + 1) as f64 * self.config.dt
        };
        Ok(dt)
    }

    pub fn run(&mut self) -> Result<&SimState> {
        let total = self.total_steps();
        while self.state.step < total {
            self.step()?;
            let s = self.state.step;
            if s.is_multiple_of(self.config.diag_every) || s == total {
                let rec = self
                    .diagnostics()
                    .map_err(|e| Error::Step { step: s, t: self.state.t, source: Box::new(e) })?;
                self.state.diagnostics.push(rec);
            }
        }
        Ok(&self.state)
    }
}

/// Builds and runs a simulation to `t_end`.
pub fn run(config: SimConfig) -> Result<Simulation> {
    let mut sim = Simulation::new(config)?;
    sim.run()?;
    Ok(sim)
}

struct AttractorBuffers {
    intra: [Vec<f64>; 2],
    inter: [Vec<f64>; 2],
}

impl AttractorBuffers {
    fn new(grid: &MomentumGrid) -> Self {
        let z = || vec![0.0; grid.num_nodes()];
        Self { intra: [z(), z()], inter: [z(), z()] }
    }
}

fn fill(buf: &mut [f64], a: f64, b: Vec3, c: f64, sp: &Species, grid: &MomentumGrid) -> Result<()> {
    let f = eval_equilibrium(a, b, c, sp.mass, sp.statistics, grid)?;
    buf.copy_from_slice(&f.values);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn intra_attractor(
    target: &SpeciesMoments,
    sp: &Species,
    index: usize,
    grid: &MomentumGrid,
    discrete: bool,
    newton: &NewtonOptions,
    warm: Option<IntraCoeffs>,
    buf: &mut [f64],
) -> Result<IntraCoeffs> {
    let relabel = |e: Error| match e {
        Error::Infeasible(r) => Error::Infeasible(r.for_species(index)),
        other => other,
    };
    if discrete {
        if let Some(w) = warm {
            intra_feasibility(sp.mass, sp.statistics, target).map_err(|r| Error::Infeasible(r.for_species(index)))?;
            if let Ok(s) = solve_intra_discrete(target, sp.mass, sp.statistics, grid, &w, newton, buf) {
                return Ok(s.coeffs);
            }
        }
    }
    let continuum = solve_intra(sp.mass, sp.statistics, target).map_err(relabel)?.coeffs;
    if !discrete {
        fill(buf, continuum.a, continuum.b, continuum.c, sp, grid)?;
        return Ok(continuum);
    }
    Ok(solve_intra_discrete(target, sp.mass, sp.statistics, grid, &continuum, newton, buf)?.coeffs)
}

#[allow(clippy::too_many_arguments)]
fn inter_attractor(
    t1: &SpeciesMoments,
    t2: &SpeciesMoments,
    species: &[Species; 2],
    grid: &MomentumGrid,
    discrete: bool,
    newton: &NewtonOptions,
    warm: Option<InterCoeffs>,
    bufs: &mut [Vec<f64>; 2],
) -> Result<InterCoeffs> {
    let prob = MixtureProblem::new(species[0], species[1], *t1, *t2);
    let [b1, b2] = bufs;
    let pair = PairSpec {
        m1: species[0].mass,
        m2: species[1].mass,
        stats1: species[0].statistics,
        stats2: species[1].statistics,
    };
    if discrete {
        if let Some(w) = warm {
            inter_feasibility(&prob)?;
            if let Ok(s) = solve_inter_discrete(t1, t2, &pair, grid, &w, newton, b1, b2) {
                return Ok(s.coeffs);
            }
        }
    }
    let continuum = solve_inter(&prob)?.coeffs;
    if !discrete {
        fill(b1, continuum.a, continuum.b, continuum.c12, &species[0], grid)?;
        fill(b2, continuum.a, continuum.b, continuum.c21, &species[1], grid)?;
        return Ok(continuum);
    }
    Ok(solve_inter_discrete(t1, t2, &pair, grid, &continuum, newton, b1, b2)?.coeffs)
}

/// Computes the attractors of one cell into `bufs`; returns the coefficients
/// and which species are populated.
fn cell_attractors(
    cell: &Cell,
    cache: &mut CellCache,
    species: &[Species; 2],
    grid: &MomentumGrid,
    discrete: bool,
    newton: &NewtonOptions,
    bufs: &mut AttractorBuffers,
) -> Result<(CellCoeffs, [bool; 2])> {
    let moms = [discrete_moments(&cell.f1, grid), discrete_moments(&cell.f2, grid)];
    // an identically empty species takes no part in the collisions
    let active = [moms[0].density != 0.0, moms[1].density != 0.0];
    let mut out = CellCoeffs { intra: [None, None], inter: None };
    for k in 0..2 {
        if active[k] {
            let c = intra_attractor(&moms[k], &species[k], k + 1, grid, discrete, newton, cache.intra[k], &mut bufs.intra[k])?;
            cache.intra[k] = Some(c);
            out.intra[k] = Some(c);
        }
    }
    if active[0] && active[1] {
        let c = inter_attractor(&moms[0], &moms[1], species, grid, discrete, newton, cache.inter, &mut bufs.inter)?;
        cache.inter = Some(c);
        out.inter = Some(c);
    }
    Ok((out, active))
}

#[allow(clippy::too_many_arguments)]
fn relax_cell(
    cell: &mut Cell,
    cache: &mut CellCache,
    species: &[Species; 2],
    grid: &MomentumGrid,
    discrete: bool,
    newton: &NewtonOptions,
    nu_intra: f64,
    nu_inter: f64,
    dt: f64,
) -> Result<()> {
    let mut bufs = AttractorBuffers::new(grid);
    let (_, active) = cell_attractors(cell, cache, species, grid, discrete, newton, &mut bufs)?;
    let both = active[0] && active[1];
    let (wi, we) = if both { (nu_intra, nu_inter) } else { (nu_intra, 0.0) };
    let rate = wi + we;
    if rate == 0.0 {
        return Ok(());
    }
    let decay = (-rate * dt).exp();
    for (k, field) in [&mut cell.f1, &mut cell.f2].into_iter().enumerate() {
        if !active[k] {
            continue;
        }
        let (mii, mij) = (&bufs.intra[k], &bufs.inter[k]);
        let fermion = field.stats == Statistics::Fermion;
        for (idx, f) in field.values.iter_mut().enumerate() {
            let target = if both { (wi * mii[idx] + we * mij[idx]) / rate } else { mii[idx] };
            // stays between f and target, so the fermion cap carries over
            let next = target + decay * (*f - target);
            if fermion && next >= 1.0 {
                return Err(Error::BoundViolation { value: next });
            }
            *f = next;
        }
    }
    Ok(())
}

/// CSV with header `t,mass1,mass2,px,py,pz,energy,H,maxf1,maxf2`.
pub fn diagnostics_csv(records: &[DiagnosticRecord]) -> String {
    let mut out = String::from("t,mass1,mass2,px,py,pz,energy,H,maxf1,maxf2\n");
    for r in records {
        let cols = [
            r.t, r.mass1, r.mass2, r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.h, r.max_f1, r.max_f2,
        ];
        let line: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticRecord]) -> Result<()> {
    snapshot::write_atomic(path, diagnostics_csv(records).as_bytes())
}

/// Largest relative change of each conserved quantity over the series:
/// `[mass1, mass2, |momentum|, energy]`. Momentum is scaled by
/// `sqrt(total mass · 2 · energy)` so that a zero total is well defined.
pub fn max_drifts(records: &[DiagnosticRecord], masses: [f64; 2]) -> [f64; 4] {
    let Some(first) = records.first() else {
        return [0.0; 4];
    };
    let rel = |x: f64, x0: f64| if x0 == 0.0 { x.abs() } else { ((x - x0) / x0).abs() };
    let p_scale = ((masses[0] * first.mass1 + masses[1] * first.mass2) * 2.0 * first.energy).sqrt();
    let mut d = [0.0f64; 4];
    for r in records {
        d[0] = d[0].max(rel(r.mass1, first.mass1));
        d[1] = d[1].max(rel(r.mass2, first.mass2));
        let dp = [
            r.momentum[0] - first.momentum[0],
            r.momentum[1] - first.momentum[1],
            r.momentum[2] - first.momentum[2],
        ];
        d[2] = d[2].max((dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2]).sqrt() / p_scale);
        d[3] = d[3].max(rel(r.energy, first.energy));
    }
    d
}
