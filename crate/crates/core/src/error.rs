use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid family parameter or configuration value.
    #[error("{0}")]
    Parameter(String),

    #[error("{operation} is only defined for dimension 2, got dimension {dim}")]
    UnsupportedDimension { operation: &'static str, dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Margin composition `G(F⁻¹(·))` cannot be formed.
    #[error("composition error: {0}")]
    Composition(String),

    /// Integrand produced a non-finite value.
    #[error("non-finite integrand value {value} at {point:?}")]
    Singularity { point: Vec<f64>, value: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),
}

impl Error {
    /// True for failures raised while evaluating numbers rather than while
    /// validating inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Singularity { .. } | Error::Divergent(_))
    }
}
