use thiserror::Error;

use crate::monoid::Joint;

/// A chain-rule failure at one `(Y, Z)` pair: `K_1(YZ)` against `K_1(Y) + K_1(Z | Y)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChainRuleViolation {
    pub first: Joint,
    pub second: Joint,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator count {n} is outside 1..={cap}")]
    GeneratorCount { n: usize, cap: usize },

    #[error("interaction terms need at least one argument (q >= 1)")]
    EmptyInteraction,

    #[error("{what}: expected {expected} sample points, found {found}")]
    SampleSpaceMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("distribution is invalid: {0}")]
    InvalidDistribution(String),

    #[error("P is not absolutely continuous w.r.t. Q at sample point {point} (p = {p}, q = 0)")]
    AbsoluteContinuity { point: usize, p: f64 },

    #[error("alpha = 1 is the pole of the alpha-logarithm; use the Shannon/KL variant instead")]
    AlphaIsOne,

    #[error("alpha = {alpha} <= 0 requires strictly positive masses, but sample point {point} has mass {mass:e}")]
    NonPositiveMass { alpha: f64, point: usize, mass: f64 },

    #[error("row {row}: {message}")]
    Ingestion { row: usize, message: String },

    #[error("{count} distinct sample points exceed the cap of {cap}")]
    TooManySamplePoints { count: usize, cap: usize },

    #[error("set function over {n} generators needs {expected} values, got {found}")]
    SetFunctionSize { n: usize, expected: usize, found: usize },

    #[error("chain rule fails at {} pair(s); worst (Y={}, Z={}) off by {:e}",
        .0.len(), .0[0].first, .0[0].second, .0[0].gap)]
    ChainRule(Vec<ChainRuleViolation>),

    #[error("inclusion-exclusion system has residual {residual:e}; the solve is unreliable")]
    SingularSystem { residual: f64 },

    #[error("compressor failed on subset {subset}: {message}")]
    Compressor { subset: Joint, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
