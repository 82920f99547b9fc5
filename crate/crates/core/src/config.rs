//! JSON configuration for the `solve-coeffs` and `simulate` commands.
//!
//! All quantities are dimensionless. Statistics are written `"fermion"` or
//! `"boson"`; species may be listed in either order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibrium::{Species, SpeciesMoments, Vec3, DEFAULT_RESIDUAL_TOL};
use crate::error::{Error, Result};

fn default_residual_tol() -> f64 {
    DEFAULT_RESIDUAL_TOL
}

/// Input of `solve-coeffs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub species: [Species; 2],
    pub moments: [SpeciesMoments; 2],
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Homogeneous,
    Slab1d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    #[default]
    Lie,
    Strang,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: usize,
    /// Box half-width; sized from the initial attractors when omitted.
    #[serde(default)]
    pub p_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Collision {
    #[serde(default = "one")]
    pub nu_intra: f64,
    #[serde(default = "one")]
    pub nu_inter: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Collision {
    fn default() -> Self {
        Self { nu_intra: 1.0, nu_inter: 1.0 }
    }
}

/// Attractor parameters `(a, b, c)`, with an optional symmetric velocity
/// split: the field is the average of the attractors drifting at `b ± shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumInit {
    pub a: f64,
    #[serde(default)]
    pub b: Vec3,
    pub c: f64,
    #[serde(default)]
    pub shift: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// Same field in every cell; `null` leaves a species empty.
    ShiftedEquilibria { species: [Option<EquilibriumInit>; 2] },
    /// `c(x) = c − amplitude·cos(2π·wavenumber·x/L)` at cell centres.
    CosinePerturbation {
        species: [EquilibriumInit; 2],
        amplitude: f64,
        #[serde(default = "one_usize")]
        wavenumber: usize,
    },
    /// One snapshot per species, replicated to every cell.
    Snapshot { paths: [PathBuf; 2] },
}

fn one_usize() -> usize {
    1
}

fn default_diag_every() -> usize {
    1
}

fn default_nx() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mode: Mode,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "one")]
    pub x_length: f64,
    pub grid: GridSpec,
    pub species: [Species; 2],
    pub init: InitSpec,
    #[serde(default = "default_diag_every")]
    pub diag_every: usize,
    #[serde(default)]
    pub collision: Collision,
    #[serde(default)]
    pub splitting: Splitting,
    #[serde(default = "default_true")]
    pub discrete_consistent: bool,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_species(species: &[Species; 2]) -> Result<()> {
    for (i, s) in species.iter().enumerate() {
        positive(&format!("species[{i}].mass"), s.mass)?;
    }
    Ok(())
}

impl CoeffConfig {
    pub fn validate(&self) -> Result<()> {
        check_species(&self.species)?;
        positive("residual_tol", self.residual_tol)?;
        for (i, m) in self.moments.iter().enumerate() {
            let all = [m.density, m.energy, m.momentum[0], m.momentum[1], m.momentum[2]];
            if all.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("moments[{i}] must be finite")));
            }
        }
        Ok(())
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        check_species(&self.species)?;
        positive("dt", self.dt)?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be nonnegative, got {}", self.t_end)));
        }
        if self.nx == 0 {
            return Err(Error::Config("nx must be at least 1".into()));
        }
        if self.mode == Mode::Homogeneous && self.nx != 1 {
            return Err(Error::Config("homogeneous mode uses a single cell (nx = 1)".into()));
        }
        positive("x_length", self.x_length)?;
        if self.diag_every == 0 {
            return Err(Error::Config("diag_every must be at least 1".into()));
        }
        let Collision { nu_intra, nu_inter } = self.collision;
        if !(nu_intra >= 0.0 && nu_inter >= 0.0 && nu_intra + nu_inter > 0.0) || !(nu_intra + nu_inter).is_finite() {
            return Err(Error::Config("collision frequencies must be nonnegative with a positive sum".into()));
        }
        if let Some(p) = self.grid.p_max {
            positive("grid.p_max", p)?;
        }
        if self.grid.n < 4 || !self.grid.n.is_multiple_of(2) {
            return Err(Error::Config(format!("grid.n must be even and at least 4, got {}", self.grid.n)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        match self.mode {
            Mode::Homogeneous => 1.0,
            Mode::Slab1d => self.x_length / self.nx as f64,
        }
    }

    /// Makes snapshot paths relative to the directory holding the config.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let InitSpec::Snapshot { paths } = &mut self.init {
            for p in paths.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let value = serde_json::from_slice(&bytes).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok((value, bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum_integrals::Statistics;

    #[test]
    fn parses_a_minimal_simulation() {
        let text = r#"{
            "mode": "homogeneous", "dt": 0.01, "t_end": 1.0,
            "grid": {"n": 16},
            "species": [{"mass": 1.0, "statistics": "fermion"}, {"mass": 2.0, "statistics": "boson"}],
            "init": {"kind": "shifted_equilibria", "species": [{"a": 1.0, "c": 0.0}, null]}
        }"#;
        let cfg: SimConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.species[1].statistics, Statistics::Boson);
        assert!(cfg.discrete_consistent);
        assert_eq!(cfg.splitting, Splitting::Lie);
        assert_eq!(cfg.collision, Collision::default());
    }

    #[test]
    fn rejects_bad_values() {
        let text = r#"{
            "mode": "slab1d", "dt": -1, "t_end": 1.0, "nx": 4,
            "grid": {"n": 16},
            "species": [{"mass": 1.0, "statistics": "fermion"}, {"mass": 1.0, "statistics": "fermion"}],
            "init": {"kind": "snapshot", "paths": ["a.bin", "b.bin"]}
        }"#;
        let cfg: SimConfig = serde_json::from_str(text).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(serde_json::from_str::<SimConfig>(&text.replace("\"dt\"", "\"dtt\"")).is_err());
    }
}
