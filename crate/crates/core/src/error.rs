use thiserror::Error;

/// Why a set of moments admits no quantum equilibrium.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    #[error("nonpositive internal energy for species {species}")]
    NonpositiveInternalEnergy { species: usize },
    #[error("nonpositive mixture internal energy")]
    NonpositiveMixtureEnergy,
    #[error("degenerate density for species {species}")]
    DegenerateDensity { species: usize },
    #[error("species {species} moment ratio {ratio} exceeds bound {bound}")]
    IntraRatioAboveBound { species: usize, ratio: f64, bound: f64 },
    #[error("mixture moment ratio {ratio} exceeds bound {bound}")]
    MixtureRatioAboveBound { ratio: f64, bound: f64 },
    #[error("boson fugacity on the condensation edge")]
    CondensationEdge,
}

impl Infeasibility {
    /// Same reason attributed to `species`.
    pub fn for_species(self, species: usize) -> Self {
        match self {
            Self::NonpositiveInternalEnergy { .. } => Self::NonpositiveInternalEnergy { species },
            Self::DegenerateDensity { .. } => Self::DegenerateDensity { species },
            Self::IntraRatioAboveBound { ratio, bound, .. } => Self::IntraRatioAboveBound { species, ratio, bound },
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("target {target} outside achievable range (max {max})")]
    Range { target: f64, max: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    Accuracy { estimate: f64, tol: f64 },

    #[error("bracket failure: {0}")]
    Bracket(String),

    #[error("infeasible: {0}")]
    Infeasible(#[from] Infeasibility),

    #[error("cell {cell}: {source}")]
    Cell {
        cell: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("step {step} (t = {t}): {source}")]
    Step {
        step: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("CFL violation: Courant number {courant} > 1")]
    Cfl { courant: f64 },

    #[error("fermion occupancy bound violated: {value}")]
    BoundViolation { value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Innermost infeasibility reason, looking through cell and step context.
    pub fn infeasibility(&self) -> Option<&Infeasibility> {
        match self {
            Error::Infeasible(reason) => Some(reason),
            Error::Cell { source, .. } | Error::Step { source, .. } => source.infeasibility(),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
