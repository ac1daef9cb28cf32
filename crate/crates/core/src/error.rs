use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mixed radicands: sqrt({0}) and sqrt({1}) live in different quadratic fields")]
    MixedRadicands(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("cannot parse number {text:?}: {reason}")]
    Parse { text: String, reason: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        limit: u128,
    },

    #[error("map is not a bijection between the two value sets: {0}")]
    NotABijection(String),

    #[error("matrix pole: c*alpha + d = 0")]
    PoleAtAlpha,

    #[error("singular matrix (ad - bc = 0)")]
    SingularMatrix,

    #[error("overlap is not isometric: d_B({b0},{b1}) != d_C({c0},{c1})")]
    OverlapNotIsometric {
        b0: String,
        b1: String,
        c0: String,
        c1: String,
    },

    #[error("free amalgam over an empty overlap of two zero-diameter spaces has cross distance 0")]
    DegenerateAmalgam,

    #[error("order constraints are cyclic: {}", .0.join(" < "))]
    CyclicConstraints(Vec<String>),

    #[error("no distance value below {0}")]
    NoSmallEnoughDelta(String),

    #[error("perturbation distance {sum} is not in the distance set")]
    ZNotInDelta { sum: String },

    #[error("distance {0} produced by the construction lies outside the distance set fragment")]
    OutsideFragment(String),

    #[error("distance set is not closed under truncated sums ({0} + {1})")]
    NotClosed(String, String),

    #[error("{0} does not embed")]
    NotEmbeddable(&'static str),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("ordered and unordered spaces cannot be mixed here")]
    OrderMismatch,

    #[error("invalid partial isometry: {0}")]
    InvalidIsometry(String),

    #[error("prefix lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
