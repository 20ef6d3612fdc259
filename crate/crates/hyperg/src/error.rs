use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("rank must lie in 1..=8, got {0}")]
    InvalidRank(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("row index {row} out of range 1..={rank}")]
    RowOutOfRange { row: usize, rank: usize },

    #[error("weight is not homogeneous: coordinate sum {sum:.3e} exceeds {tol:.1e}")]
    NotHomogeneous { sum: f64, tol: f64 },

    #[error("gamma pole: argument within 1e-8 of nonpositive integer {0}")]
    GammaPole(i64),

    #[error("degenerate parameter: {0}")]
    Degenerate(String),

    #[error("resonant parameter: |(mu, mu + 2 lambda)| = {denominator:.3e} at mu = {index}")]
    Resonance { index: String, denominator: f64 },

    #[error("point outside convergence chamber: |z_{i}| >= |z_{j}| for i < j")]
    OutsideChamber { i: usize, j: usize },

    #[error("empty integration domain: {0}")]
    EmptyDomain(String),

    #[error("non-integrable exponent {exponent} on face {face}")]
    NonIntegrableExponent { face: String, exponent: f64 },

    #[error("arguments must be strictly increasing and positive")]
    UnsortedArguments,

    #[error(
        "requested accuracy not reached: estimate {estimate:.3e} > tolerance {tolerance:.3e} \
         (best value {value_re:.12e} + {value_im:.12e}i)"
    )]
    AccuracyFailure {
        value_re: f64,
        value_im: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error(
        "sequence acceleration did not converge: estimate {estimate:.3e} > tolerance \
         {tolerance:.3e} (best value {value_re:.12e} + {value_im:.12e}i)"
    )]
    ConvergenceFailure {
        value_re: f64,
        value_im: f64,
        estimate: f64,
        tolerance: f64,
    },

    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
