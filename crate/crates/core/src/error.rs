use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A conditional quantity was requested for an event of zero probability.
    #[error("{0} is undefined: conditioning event has zero probability")]
    UndefinedConditional(&'static str),

    /// Inconsistent or unusable configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The linear feasibility problem has no solution.
    #[error("observations are infeasible: constraint `{constraint}` cannot be satisfied")]
    Infeasible { constraint: String },

    /// A bracketing root search found no sign change.
    #[error("no root of {0} in the search interval")]
    RootNotFound(&'static str),

    /// No intensity yields a positive key for the given error rate.
    #[error("no positive key rate is possible at e_d = {0}")]
    NoPositiveRate(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, 1]",
        })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "[0, inf)",
        })
    }
}
