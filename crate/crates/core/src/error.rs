use num_bigint::BigInt;
use thiserror::Error;

use crate::Rational;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library.
///
/// Variants fall into three families that the command-line front end maps
/// onto distinct exit codes: malformed arguments, violated mathematical
/// hypotheses, and exhausted resource budgets.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    // argument errors
    #[error("{0} is not prime")]
    NotPrime(BigInt),
    #[error("{0} is not a prime power >= 2")]
    NotPrimePower(u64),
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("prime {prime} divides the leading coefficient")]
    PrimeDividesLeading { prime: u64 },
    #[error("degree {degree} exceeds the budget {budget}")]
    DegreeBudget { degree: u64, budget: u64 },
    #[error("operation requires q = 2, got q = {0}")]
    RequiresQuadratic(u64),
    #[error("level mismatch: ({q1}, {n1}) vs ({q2}, {n2})")]
    LevelMismatch { q1: u64, n1: u32, q2: u64, n2: u32 },
    #[error("levels are not contiguous: expected {expected}, found {found}")]
    NonContiguousLevels { expected: u32, found: u32 },

    // hypothesis violations
    #[error("beta = {0} is periodic")]
    PeriodicPoint(Rational),
    #[error("point {0} is not preperiodic (wandering)")]
    WanderingPoint(Rational),
    #[error("beta = {beta} is post-critical: f^{m}(0) = beta")]
    PostCritical { beta: Rational, m: u32 },
    #[error("orbit collision f^{steps}({from}) = {to}")]
    OrbitCollision {
        from: Rational,
        to: Rational,
        steps: u32,
    },
    #[error("points are not pairwise distinct: {0} repeats")]
    RepeatedPoint(Rational),
    #[error("map is PCF (0 is preperiodic)")]
    MapIsPcf,
    #[error("degenerate input: {0}")]
    Degenerate(String),

    // budgets
    #[error("height budget exceeded: {bits} bits > {budget}")]
    HeightBudget { bits: u64, budget: u64 },
    #[error("could not completely factor {0}")]
    IncompleteFactorization(BigInt),
}

impl Error {
    /// True for errors that report a violated mathematical hypothesis rather
    /// than a malformed request.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::PeriodicPoint(_)
                | Error::WanderingPoint(_)
                | Error::PostCritical { .. }
                | Error::OrbitCollision { .. }
                | Error::RepeatedPoint(_)
                | Error::MapIsPcf
                | Error::Degenerate(_)
        )
    }
}
