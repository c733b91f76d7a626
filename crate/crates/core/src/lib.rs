//! Numerical toolkit for matrix orthogonal polynomials.
//!
//! The central object is a *pre-sequence*: a family of matrix polynomials
//! `F_n` satisfying a three-term recursion `x F_n = A_n F_{n-1} + B_n F_n +
//! C_n F_{n+1}` whose members need not be orthogonal and need not have
//! degree `n`.  Whenever `det F_0` vanishes only on a null set and every
//! `C_n` is nonsingular, the normalized family `Q_n = F_n F_0^{-1}` is a
//! bona fide sequence of matrix orthogonal polynomials with respect to the
//! conjugated weight `W' = F_0 W F_0^*`.  This crate builds the `Q_n`,
//! verifies orthogonality by Gauss-Legendre quadrature, transports
//! right-acting differential operators through the normalization, and
//! decides irreducibility of the resulting weight by computing its real
//! commuting space.
//!
//! The `cp2` module ships a fully worked model: the 2x2 family attached to
//! spherical functions of the complex projective plane, with closed-form
//! recursion coefficients, weights, eigenvalues, and hypergeometric-series
//! representations that the rest of the crate cross-checks.

pub mod checks;
pub mod commutant;
pub mod cp2;
pub mod diffop;
pub mod error;
pub mod hyper;
pub mod matpoly;
pub mod presequence;
pub mod quadrature;
pub mod report;
pub mod weights;

pub use error::Error;
pub use matpoly::{CMatrix, MatrixPolynomial};

/// Convenient alias used throughout: every fallible operation reports
/// through [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
