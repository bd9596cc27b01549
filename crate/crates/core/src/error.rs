use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("measure index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("payoff has {got} entries, space has {expected} atoms")]
    Misaligned { expected: usize, got: usize },

    #[error("group of order {order} exceeds enumeration cap {cap}")]
    GroupTooLarge { order: u128, cap: u64 },

    #[error("E[x] = {mean} under the base measure, expected 1")]
    MeanViolation { mean: f64 },

    #[error("casino required: rn-vector ties present with n = {n} measures")]
    CasinoRequired { n: usize },

    #[error("ill-conditioned covariance (eigenvalue ratio {ratio:e})")]
    IllConditioned { ratio: f64 },

    #[error("singular constraint system with inconsistent targets")]
    InconsistentTargets,

    #[error("singular volatility at path {path}, step {step}")]
    SingularVolatility { path: usize, step: usize },

    #[error("density process overflow at path {path}, step {step}")]
    Overflow { path: usize, step: usize },

    #[error("AMPR {value} below floor {floor} at t = {t}")]
    AmprBelowFloor { value: f64, floor: f64, t: f64 },

    #[error("AMPR is not deterministic: cross-path variation {variation:.3} at t = {t}")]
    NonDeterministicAmpr { variation: f64, t: f64 },

    #[error("non-finite payoff value in claim {0}")]
    NonFinitePayoff(String),

    #[error("empty sample")]
    EmptySample,

    #[error("insufficient data: need at least {needed}, got {got}")]
    Insufficient { needed: usize, got: usize },
}

impl Error {
    /// Numerical failures (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditioned { .. }
                | Error::InconsistentTargets
                | Error::SingularVolatility { .. }
                | Error::Overflow { .. }
                | Error::AmprBelowFloor { .. }
                | Error::NonDeterministicAmpr { .. }
                | Error::NonFinitePayoff(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
