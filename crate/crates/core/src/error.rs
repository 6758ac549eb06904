use thiserror::Error;

pub type Result<T> = std::result::Result<T, FasError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FasError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A profile contains a port with |mu| = 1 where the density is singular.
    #[error("singular correlation profile: port {port} has |mu| = {mu}")]
    SingularProfile { port: usize, mu: f64 },

    /// Adaptive quadrature hit its subdivision limit before reaching tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e} after {subdivisions} subdivisions")]
    Quadrature {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    /// A bound constant fell outside its admissible range.
    #[error("bound constants out of range: {0}")]
    Constants(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(FasError::Domain(format!("{name} must be finite, got {x}")))
    }
}
