//! Right-acting differential operators.
//!
//! Operators act on matrix polynomials from the right,
//!
//! ```text
//! Q D = sum_i  d^i(Q)/dx^i  *  F_i(x),
//! ```
//!
//! with the coefficient matrices multiplying from the right; this is the
//! convention under which matrix orthogonal polynomials are joint
//! eigenfunctions with matrix eigenvalues acting from the left,
//! `Q_n D = Lambda_n Q_n`.  The hypergeometric class consists of operators
//! `D = d^2 x(1-x) + d^1 (C - x U) - V` with constant matrices `C, U, V`.
//! Conjugating an operator by the seed of a pre-sequence,
//! `Dtilde = F_0 D F_0^{-1}`, transports eigenfunctions of the raw family
//! to eigenfunctions of the normalized one; the module recovers the
//! constants of the conjugated operator numerically from sampled data.

use crate::error::Error;
use crate::matpoly::{cplx, invert, is_finite, real_matrix, CMatrix, MatrixPolynomial};
use crate::weights::MatrixFn;
use crate::Result;

/// A right-acting differential operator with matrix polynomial
/// coefficients, stored ascending in the derivative order:
/// `coeffs[i]` multiplies the `i`-th derivative.
#[derive(Debug, Clone)]
pub struct RightDiffOperator {
    size: usize,
    coeffs: Vec<MatrixPolynomial>,
}

impl RightDiffOperator {
    /// Builds an operator from ascending derivative coefficients.
    pub fn new(coeffs: Vec<MatrixPolynomial>) -> Result<Self> {
        let first = coeffs.first().ok_or(Error::EmptyCoefficients)?;
        let size = first.size();
        for c in &coeffs {
            if c.size() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    got: c.size(),
                });
            }
        }
        Ok(RightDiffOperator { size, coeffs })
    }

    /// Matrix size of the coefficients.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Order of the operator (index of the highest derivative).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of the `i`-th derivative.
    pub fn coefficient(&self, i: usize) -> &MatrixPolynomial {
        &self.coeffs[i]
    }

    /// Applies the operator: `Q D = sum_i d^i(Q) F_i`.
    pub fn apply(&self, q: &MatrixPolynomial) -> Result<MatrixPolynomial> {
        if q.size() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: q.size(),
            });
        }
        let mut acc = MatrixPolynomial::zero(self.size);
        for (i, f) in self.coeffs.iter().enumerate() {
            acc = acc.add(&q.derivative(i).mul(f)?)?;
        }
        Ok(acc)
    }

    /// True when the operator preserves degree: `deg coeffs[i] <= i` for
    /// every order (the zero polynomial counts as degree-compatible).
    pub fn is_degree_preserving(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| c.is_zero() || c.degree() <= i)
    }
}

/// The constant matrices of a hypergeometric-type operator
/// `D = d^2 x(1-x) + d^1 (C - x U) - V`.
#[derive(Debug, Clone)]
pub struct HypergeometricConstants {
    /// Constant part of the first-order coefficient.
    pub c: CMatrix,
    /// Slope of the first-order coefficient (with a minus sign: `C - x U`).
    pub u: CMatrix,
    /// Zeroth-order coefficient (with a minus sign: `- V`).
    pub v: CMatrix,
}

impl HypergeometricConstants {
    /// Checks the three matrices share a square size and returns it.
    pub fn size(&self) -> Result<usize> {
        let n = self.c.nrows();
        for m in [&self.c, &self.u, &self.v] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: m.nrows(),
                });
            }
        }
        Ok(n)
    }

    /// Materializes the operator `d^2 x(1-x) I + d^1 (C - x U) - V`.
    pub fn operator(&self) -> Result<RightDiffOperator> {
        let n = self.size()?;
        let zero = CMatrix::zeros(n, n);
        let order0 = MatrixPolynomial::from_coeffs(vec![&zero - &self.v])?;
        let order1 = MatrixPolynomial::from_coeffs(vec![self.c.clone(), &zero - &self.u])?;
        let order2 = MatrixPolynomial::from_coeffs(vec![
            zero.clone(),
            CMatrix::identity(n, n),
            &zero - CMatrix::identity(n, n),
        ])?;
        RightDiffOperator::new(vec![order0, order1, order2])
    }
}

/// A right-acting operator whose coefficients are arbitrary matrix
/// functions (possibly rational, with poles), usable only pointwise.
#[derive(Clone)]
pub struct SampledDiffOperator {
    size: usize,
    coeffs: Vec<MatrixFn>,
}

impl SampledDiffOperator {
    /// Builds an operator from ascending derivative coefficient functions.
    pub fn new(size: usize, coeffs: Vec<MatrixFn>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        Ok(SampledDiffOperator { size, coeffs })
    }

    /// Matrix size of the coefficients.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Order of the operator.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient function of the `i`-th derivative.
    pub fn coefficient(&self, i: usize) -> &MatrixFn {
        &self.coeffs[i]
    }

    /// Evaluates `(Q D)(x) = sum_i d^i(Q)(x) coeffs[i](x)` for a
    /// polynomial `Q`.  The coefficient functions must be finite at `x`.
    pub fn apply_poly_at(&self, q: &MatrixPolynomial, x: f64) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(self.size, self.size);
        for (i, f) in self.coeffs.iter().enumerate() {
            let c = f(x);
            if !is_finite(&c) {
                return Err(Error::NonFinite {
                    context: format!("operator coefficient {i} at x = {x}"),
                });
            }
            acc += q.derivative(i).eval(x) * c;
        }
        Ok(acc)
    }
}

impl std::fmt::Debug for SampledDiffOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledDiffOperator")
            .field("size", &self.size)
            .field("order", &self.order())
            .finish()
    }
}

/// Outcome of an eigenfunction check `P_n D = Lambda_n P_n` over a grid.
#[derive(Debug, Clone)]
pub struct EigenReport {
    /// Largest residual per index `n`, relative to `|Lambda_n P_n(x)|`
    /// (absolute where that reference vanishes).
    pub residuals: Vec<f64>,
    /// Largest residual overall.
    pub max_residual: f64,
    /// Tolerance checked against.
    pub tol: f64,
    /// True when `max_residual <= tol`.
    pub pass: bool,
}

fn eigen_residual(applied: &CMatrix, lambda: &CMatrix, value: &CMatrix) -> f64 {
    let reference = lambda * value;
    let diff = (applied - &reference).norm();
    let scale = reference.norm();
    if scale > 1e-14 {
        diff / scale
    } else {
        diff
    }
}

/// Checks `P_n D = Lambda_n P_n` for a polynomial-coefficient operator.
/// The identity is polynomial, so it is verified exactly as polynomials
/// would be: by evaluation on the sample grid.
pub fn check_eigenfunction(
    d: &RightDiffOperator,
    polys: &[MatrixPolynomial],
    lambdas: &[CMatrix],
    samples: &[f64],
    tol: f64,
) -> Result<EigenReport> {
    if polys.len() != lambdas.len() {
        return Err(Error::SizeMismatch {
            expected: polys.len(),
            got: lambdas.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            context: "eigenfunction check".to_string(),
            required: 1,
            got: 0,
        });
    }
    let mut residuals = Vec::with_capacity(polys.len());
    for (p, lambda) in polys.iter().zip(lambdas) {
        let applied = d.apply(p)?;
        let mut worst = 0.0_f64;
        for &x in samples {
            worst = worst.max(eigen_residual(&applied.eval(x), lambda, &p.eval(x)));
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(EigenReport {
        residuals,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Checks `P_n D = Lambda_n P_n` for a sampled-coefficient operator, point
/// by point.  Sample points must avoid the coefficient poles.
pub fn check_eigenfunction_sampled(
    d: &SampledDiffOperator,
    polys: &[MatrixPolynomial],
    lambdas: &[CMatrix],
    samples: &[f64],
    tol: f64,
) -> Result<EigenReport> {
    if polys.len() != lambdas.len() {
        return Err(Error::SizeMismatch {
            expected: polys.len(),
            got: lambdas.len(),
        });
    }
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            context: "eigenfunction check".to_string(),
            required: 1,
            got: 0,
        });
    }
    let mut residuals = Vec::with_capacity(polys.len());
    for (p, lambda) in polys.iter().zip(lambdas) {
        let mut worst = 0.0_f64;
        for &x in samples {
            let applied = d.apply_poly_at(p, x)?;
            worst = worst.max(eigen_residual(&applied, lambda, &p.eval(x)));
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(EigenReport {
        residuals,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Constants recovered by [`extract_hyper_constants`], together with the
/// worst structural residuals observed while validating them.
#[derive(Debug, Clone)]
pub struct ExtractedConstants {
    pub constants: HypergeometricConstants,
    /// Worst relative deviation of the first-order data from the affine
    /// fit `C - x U`, over all samples.
    pub affine_residual: f64,
    /// Worst relative deviation of the zeroth-order data from constancy,
    /// over all samples.
    pub constant_residual: f64,
}

/// Recovers the constants of a conjugated hypergeometric operator from
/// sampled data.
///
/// Given an invertible matrix function `Psi` (available as a polynomial so
/// its derivatives are exact) and the sampled first- and zeroth-order
/// coefficients `A1, A0` of an operator `D = d^2 x(1-x) + d^1 A1 + A0`, the
/// conjugated operator `Psi D Psi^{-1}` has first-order coefficient
/// `G(x) = (2 x(1-x) Psi' + Psi A1) Psi^{-1}` and zeroth-order coefficient
/// `-V(x) = (x(1-x) Psi'' + Psi' A1 + Psi A0) Psi^{-1}`.  When the
/// conjugated operator is hypergeometric, `G` is affine, `G = C - x U`, and
/// `V` is constant.  The two samples nearest the midpoint of the sampled
/// range determine `C` and `U`; all remaining samples must confirm
/// affinity of `G` and constancy of `V` to within `tol` (relative to the
/// recovered matrix norms), otherwise the data is rejected.  The worst
/// residuals of both confirmations are returned so callers can hold them
/// to their own, possibly tighter, thresholds.
pub fn extract_hyper_constants(
    psi: &MatrixPolynomial,
    a1: &MatrixFn,
    a0: &MatrixFn,
    samples: &[f64],
    tol: f64,
) -> Result<ExtractedConstants> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            context: "hypergeometric constant extraction".to_string(),
            required: 3,
            got: samples.len(),
        });
    }
    let psi_d1 = psi.derivative(1);
    let psi_d2 = psi.derivative(2);

    let g_at = |x: f64| -> Result<CMatrix> {
        let psi_x = psi.eval(x);
        if psi_x.determinant().norm() <= 1e-10 {
            return Err(Error::SingularMatrix {
                context: format!("Psi({x})"),
            });
        }
        let psi_inv = invert(&psi_x, "Psi sample")?;
        let g = (psi_d1.eval(x) * cplx(2.0 * x * (1.0 - x), 0.0) + &psi_x * a1(x)) * psi_inv;
        Ok(g)
    };
    let v_at = |x: f64| -> Result<CMatrix> {
        let psi_x = psi.eval(x);
        let psi_inv = invert(&psi_x, "Psi sample")?;
        let inner =
            psi_d2.eval(x) * cplx(x * (1.0 - x), 0.0) + psi_d1.eval(x) * a1(x) + &psi_x * a0(x);
        Ok(-(inner * psi_inv))
    };

    // Order the samples by distance from the midpoint of the sampled range;
    // the two nearest (distinct) points fix the affine fit.
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let mut order: Vec<f64> = samples.to_vec();
    order.sort_by(|a, b| {
        (a - mid)
            .abs()
            .partial_cmp(&(b - mid).abs())
            .expect("finite")
    });
    let x1 = order[0];
    let x2 = *order[1..]
        .iter()
        .find(|&&x| x != x1)
        .ok_or(Error::TooFewSamples {
            context: "hypergeometric constant extraction (distinct points)".to_string(),
            required: 2,
            got: 1,
        })?;

    let g1 = g_at(x1)?;
    let g2 = g_at(x2)?;
    // G = C - x U  =>  U = (G(x1) - G(x2)) / (x2 - x1),  C = G(x1) + x1 U.
    let u = (&g1 - &g2) * cplx(1.0 / (x2 - x1), 0.0);
    let c = &g1 + &u * cplx(x1, 0.0);
    let v = v_at(x1)?;

    let g_scale = 1.0 + c.norm() + u.norm();
    let v_scale = 1.0 + v.norm();
    let mut affine_residual = 0.0_f64;
    let mut constant_residual = 0.0_f64;
    for &x in samples {
        let g = g_at(x)?;
        let predicted = &c - &u * cplx(x, 0.0);
        affine_residual = affine_residual.max((g - predicted).norm() / g_scale);
        let vx = v_at(x)?;
        constant_residual = constant_residual.max((vx - &v).norm() / v_scale);
    }
    if affine_residual > tol {
        return Err(Error::NotAffine {
            context: "first-order coefficient of the conjugated operator".to_string(),
            residual: affine_residual,
            tol,
        });
    }
    if constant_residual > tol {
        return Err(Error::NotConstant {
            context: "zeroth-order coefficient of the conjugated operator".to_string(),
            residual: constant_residual,
            tol,
        });
    }
    Ok(ExtractedConstants {
        constants: HypergeometricConstants { c, u, v },
        affine_residual,
        constant_residual,
    })
}

/// Conjugates a second-order sampled operator by a polynomial `Psi` at one
/// point: returns the ascending coefficient values
/// `[(Psi'' a2 + Psi' a1 + Psi a0) Psi^{-1}, (2 Psi' a2 + Psi a1) Psi^{-1}, a2]`
/// of `Psi D Psi^{-1}` at `x`.  The second-order coefficient `a2(x)` must
/// be a scalar multiple of the identity (it commutes through `Psi`), and
/// `Psi(x)` must be invertible.
pub fn conjugate_operator_numeric(
    d: &SampledDiffOperator,
    psi: &MatrixPolynomial,
    x: f64,
) -> Result<[CMatrix; 3]> {
    if d.order() != 2 {
        return Err(Error::InvalidParameter {
            context: format!(
                "conjugation requires a second-order operator, got order {}",
                d.order()
            ),
        });
    }
    let a0 = d.coefficient(0)(x);
    let a1 = d.coefficient(1)(x);
    let a2 = d.coefficient(2)(x);
    let n = d.size();
    let scalar = a2[(0, 0)];
    let deviation = (&a2 - CMatrix::identity(n, n) * scalar).norm();
    if deviation > 1e-10 * (1.0 + a2.norm()) {
        return Err(Error::NotScalar { x });
    }
    let psi_x = psi.eval(x);
    let psi_inv = invert(&psi_x, "Psi at conjugation point")?;
    let psi1 = psi.derivative(1).eval(x);
    let psi2 = psi.derivative(2).eval(x);
    let c0 = (psi2 * &a2 + &psi1 * &a1 + &psi_x * &a0) * &psi_inv;
    let c1 = (psi1 * cplx(2.0, 0.0) * &a2 + &psi_x * &a1) * &psi_inv;
    Ok([c0, c1, a2])
}

/// Convenience constructor for the scalar hypergeometric operator
/// `d^2 x(1-x) + d^1 (c - x u) - v` embedded at matrix size 1, used by
/// tests and examples.
pub fn scalar_hypergeometric(c: f64, u: f64, v: f64) -> Result<RightDiffOperator> {
    HypergeometricConstants {
        c: real_matrix(1, &[c]),
        u: real_matrix(1, &[u]),
        v: real_matrix(1, &[v]),
    }
    .operator()
}
