use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("basis would hold {count} modes, above the configured cap of {cap}")]
    ModeCapExceeded { count: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("incompatible operands: {0}")]
    Mismatch(String),

    #[error("quadrature exactness degree {available} is below the required {required}")]
    InsufficientExactness { required: usize, available: usize },

    #[error("grid of {required} nodes exceeds the budget of {budget}")]
    GridBudgetExceeded { required: usize, budget: usize },

    #[error("time quadrature needs at least {required} nodes, got {given}")]
    InsufficientTimeResolution { required: usize, given: usize },

    #[error("integration unstable at t = {time}: mass went from {mass_before} to {mass_after}")]
    Unstable {
        time: f64,
        mass_before: f64,
        mass_after: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("field not localized to the symbol block: {0}")]
    BlockMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for refusals caused by a numerical budget (grid size, time nodes,
    /// mode caps, stability) rather than by malformed input.
    pub fn is_numerical_refusal(&self) -> bool {
        matches!(
            self,
            Error::ModeCapExceeded { .. }
                | Error::InsufficientExactness { .. }
                | Error::GridBudgetExceeded { .. }
                | Error::InsufficientTimeResolution { .. }
                | Error::Unstable { .. }
        )
    }
}
