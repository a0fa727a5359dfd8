use alloc::string::String;

/// Errors raised by the embedding, audit and certification routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error(
        "enumeration budget exceeded: {required} evaluations required, budget is {budget}; {hint}"
    )]
    BudgetExceeded {
        required: u128,
        budget: u128,
        hint: &'static str,
    },

    #[error("construction impossible: {0}")]
    ConstructionImpossible(String),

    #[error("bound inapplicable: {0}")]
    Inapplicable(String),

    #[error("unsupported form: {0}")]
    UnsupportedForm(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn check_dim(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            actual,
        })
    }
}
