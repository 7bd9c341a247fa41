use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability or count outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The observed lod is too close to zero (or of the wrong sign) to divide by.
    #[error("unstable information ratio for {}: observed lod {lod_ob:e} below threshold {eps:e}", ids.join(", "))]
    Instability {
        ids: Vec<String>,
        lod_ob: f64,
        eps: f64,
    },

    /// The observed MLE sits on the boundary of the parameter space.
    #[error("boundary MLE: x0={x0} of n0={n0}; enable the continuity correction to clamp it")]
    BoundaryMle { x0: u64, n0: u64 },

    /// The lod weights of a combination sum to (almost) nothing.
    #[error("sum of observed lod weights {total:e} is below {eps:e}")]
    EmptyWeight { total: f64, eps: f64 },

    /// An enumeration would exceed its size bound.
    #[error("enumeration of {size} points exceeds the limit of {limit}")]
    Size { size: u128, limit: u128 },

    /// No simulated pair passed the ratio floor.
    #[error("all {total} pairs fall below the ratio floor {floor:e}")]
    AllExcluded { total: usize, floor: f64 },

    /// Malformed or inconsistent input (study tables, allocations, flags).
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Short machine-readable tag, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Instability { .. } => "instability",
            Error::BoundaryMle { .. } => "boundary_mle",
            Error::EmptyWeight { .. } => "empty_weight",
            Error::Size { .. } => "size",
            Error::AllExcluded { .. } => "all_excluded",
            Error::Invalid(_) => "invalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {p} is not in (0, 1)")))
    }
}
