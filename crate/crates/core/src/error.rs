use alloc::string::String;

/// Errors raised by the fitting, expansion and diagnostic routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error(
        "polynomial matrix would need {cells} cells (budget {budget}); \
         reduce the input with PCA or drop random columns"
    )]
    MemoryBudget { cells: u128, budget: u128 },

    #[error("zero-variance input: {0}")]
    ZeroVariance(String),

    #[error("training diverged at epoch {epoch}: loss became non-finite")]
    Diverged { epoch: usize },

    #[error("layer {layer} uses a non-polynomial activation ({activation})")]
    NonPolynomial { layer: usize, activation: &'static str },

    #[error("coefficient budget exceeded: {entries} entries (budget {budget})")]
    CoefficientBudget { entries: usize, budget: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
