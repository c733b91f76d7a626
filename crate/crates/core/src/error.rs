//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by polynomial arithmetic, quadrature, recursions, series
/// evaluation, and the verification drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands (or an operand and an expected shape) disagree in size.
    #[error("matrix size mismatch: expected {expected}x{expected}, got {got}x{got}")]
    SizeMismatch { expected: usize, got: usize },

    /// A matrix that must be square is not.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// A coefficient or evaluation contains NaN or infinity.
    #[error("non-finite matrix entry in {context}")]
    NonFinite { context: String },

    /// A polynomial was constructed from an empty coefficient list.
    #[error("polynomial needs at least one coefficient")]
    EmptyCoefficients,

    /// The zero polynomial has no leading coefficient.
    #[error("zero polynomial has no leading coefficient")]
    ZeroPolynomial,

    /// A matrix that must be invertible is singular (or numerically so).
    #[error("singular matrix in {context}")]
    SingularMatrix { context: String },

    /// The recursion coefficient `C_n` is singular, so the next `Q_{n+1}`
    /// cannot be solved for.
    #[error("recursion coefficient C_{index} is singular")]
    SingularRecursionCoefficient { index: usize },

    /// A generated polynomial does not have the degree the recursion
    /// guarantees, which signals corrupted coefficient input.
    #[error("degree law violated at index {index}: expected degree {expected}, got {got}")]
    DegreeLaw {
        index: usize,
        expected: usize,
        got: usize,
    },

    /// A quadrature rule was requested with zero nodes.
    #[error("quadrature rule needs at least one node")]
    EmptyRule,

    /// The integration interval is degenerate or reversed.
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    /// A sampled computation received fewer abscissas than it needs.
    #[error("{context} needs at least {required} sample points, got {got}")]
    TooFewSamples {
        context: String,
        required: usize,
        got: usize,
    },

    /// A Gram diagonal block fails positive definiteness.
    #[error(
        "Gram diagonal block {index} is not positive definite \
         (smallest eigenvalue {min_eigenvalue:e})"
    )]
    NotPositiveDefinite { index: usize, min_eigenvalue: f64 },

    /// The squared-norm matrix `(P_n, P_n)` of a monic recursion step is
    /// numerically singular, so the moment recursion cannot continue.
    #[error("squared-norm matrix (P_{index}, P_{index}) is numerically singular")]
    DegenerateNorm { index: usize },

    /// Sampled data that should be affine in `x` is not.
    #[error("{context}: data is not affine in x (residual {residual:e} > {tol:e})")]
    NotAffine {
        context: String,
        residual: f64,
        tol: f64,
    },

    /// Sampled data that should be constant in `x` is not.
    #[error("{context}: data is not constant in x (residual {residual:e} > {tol:e})")]
    NotConstant {
        context: String,
        residual: f64,
        tol: f64,
    },

    /// A second-order coefficient that must be scalar (a multiple of the
    /// identity) is not, so conjugation leaves the hypergeometric class.
    #[error("second-order coefficient at x = {x} is not a scalar multiple of the identity")]
    NotScalar { x: f64 },

    /// A Pochhammer denominator `(b)_k` hits zero before the series
    /// terminates.
    #[error("hypergeometric denominator parameter reaches zero at term {term}")]
    PochhammerZero { term: usize },

    /// A non-terminating series failed to meet its tolerance within the
    /// truncation budget.
    #[error("series did not converge within {terms} terms (last term {last:e})")]
    SeriesNotConverged { terms: usize, last: f64 },

    /// The shift matrix `C^t + iI` of the matrix hypergeometric recursion is
    /// singular, so coefficient `i+1` cannot be formed.
    #[error("matrix series step {index}: C^t + {index} I is singular")]
    SingularSeriesStep { index: usize },

    /// Model parameters outside the supported range.
    #[error("invalid parameter: {context}")]
    InvalidParameter { context: String },
}
