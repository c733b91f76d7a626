//! Scalar and matrix hypergeometric series.
//!
//! The scalar side evaluates generalized hypergeometric sums
//! `pFq(a; b; x) = sum_k (a_1)_k ... (a_p)_k / ((b_1)_k ... (b_q)_k k!) x^k`;
//! a nonpositive-integer numerator parameter makes the sum a polynomial,
//! which is the case used throughout the built-in model.  The matrix side
//! solves the hypergeometric-type system
//! `x(1-x) y'' + (C^t - x U^t) y' - (V^t + lambda) y = 0` by the power
//! series `y = sum_i x^i c_i` whose vector coefficients satisfy
//! `c_{i+1} = (C^t + i I)^{-1} (i(i-1) I + i U^t + V^t + lambda) c_i / (i+1)`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::Error;
use crate::matpoly::{cplx, is_nonsingular, CMatrix};
use crate::Result;

/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

/// Default truncation budget for non-terminating scalar series.
pub const DEFAULT_TRUNCATION: usize = 64;
/// Default relative tail tolerance for non-terminating scalar series.
pub const DEFAULT_TOLERANCE: f64 = 1e-14;

/// Parameters of a generalized hypergeometric series `pFq(a; b; x)`.
#[derive(Debug, Clone)]
pub struct HyperSeriesParams {
    /// Numerator parameters `a_1, ..., a_p`.
    pub numerator: Vec<f64>,
    /// Denominator parameters `b_1, ..., b_q`.
    pub denominator: Vec<f64>,
    /// Maximal number of terms for non-terminating series.
    pub truncation: usize,
    /// Relative size at which the tail of a non-terminating series is
    /// considered negligible.
    pub tolerance: f64,
}

impl HyperSeriesParams {
    /// Series with the default truncation budget and tolerance.
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Self {
        HyperSeriesParams {
            numerator,
            denominator,
            truncation: DEFAULT_TRUNCATION,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// When some numerator parameter is a nonpositive integer `-w`, the
    /// series terminates after `w + 1` terms (degree `w`); returns that
    /// term count, or `None` for a non-terminating series.
    pub fn terminating_length(&self) -> Option<usize> {
        self.numerator
            .iter()
            .filter(|&&a| a <= 0.0 && a.fract() == 0.0)
            .map(|&a| (-a) as usize + 1)
            .min()
    }
}

/// All coefficients `c_k` of the series, so that
/// `pFq(a; b; x) = sum_k c_k x^k`.  For a terminating series the full
/// (finite) list is returned; otherwise coefficients are produced until the
/// truncation budget is reached.  Fails when a denominator Pochhammer factor
/// hits zero before the series terminates.
pub fn pfq_coefficients(params: &HyperSeriesParams) -> Result<Vec<f64>> {
    let len = params
        .terminating_length()
        .unwrap_or(params.truncation)
        .max(1);
    let mut coeffs = Vec::with_capacity(len);
    let mut term = 1.0_f64;
    coeffs.push(term);
    for k in 0..len - 1 {
        let kf = k as f64;
        let mut num = 1.0;
        for &a in &params.numerator {
            num *= a + kf;
        }
        let mut den = kf + 1.0;
        for &b in &params.denominator {
            let factor = b + kf;
            if factor.abs() < 1e-12 {
                return Err(Error::PochhammerZero { term: k + 1 });
            }
            den *= factor;
        }
        term *= num / den;
        coeffs.push(term);
    }
    Ok(coeffs)
}

/// Evaluates `pFq(a; b; x)`.  Terminating series are summed to completion
/// (any `x` is allowed); non-terminating series require `|x| < 1` and stop
/// once the next term falls below `tolerance` relative to the partial sum,
/// failing if the truncation budget is exhausted first.
pub fn pfq(params: &HyperSeriesParams, x: f64) -> Result<f64> {
    if let Some(len) = params.terminating_length() {
        let coeffs = pfq_coefficients(params)?;
        // Ascending-order summation of the finitely many terms.
        let mut sum = 0.0;
        let mut power = 1.0;
        for c in coeffs.iter().take(len) {
            sum += c * power;
            power *= x;
        }
        return Ok(sum);
    }
    if x.abs() >= 1.0 {
        return Err(Error::InvalidParameter {
            context: format!("non-terminating series needs |x| < 1, got x = {x}"),
        });
    }
    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    for k in 0..params.truncation {
        let kf = k as f64;
        let mut num = 1.0;
        for &a in &params.numerator {
            num *= a + kf;
        }
        let mut den = kf + 1.0;
        for &b in &params.denominator {
            let factor = b + kf;
            if factor.abs() < 1e-12 {
                return Err(Error::PochhammerZero { term: k + 1 });
            }
            den *= factor;
        }
        term *= x * num / den;
        sum += term;
        if term.abs() <= params.tolerance * sum.abs().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::SeriesNotConverged {
        terms: params.truncation,
        last: term,
    })
}

/// Vector coefficients `c_0, ..., c_{terms-1}` of the matrix series solving
/// `x(1-x) y'' + (ct - x ut) y' - vshift y = 0` with `y(0) = v0`, where
/// `vshift = V^t + lambda I` has the eigenvalue already folded in.  Fails
/// when some `ct + i I` is singular (i.e. `-i` is an eigenvalue of `ct`).
pub fn matrix_2h1_coefficients(
    ut: &CMatrix,
    vshift: &CMatrix,
    ct: &CMatrix,
    v0: &CVector,
    terms: usize,
) -> Result<Vec<CVector>> {
    let n = ct.nrows();
    if ut.nrows() != n || ut.ncols() != n || vshift.nrows() != n || vshift.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: ut.nrows(),
        });
    }
    if v0.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: v0.len(),
        });
    }
    let identity = CMatrix::identity(n, n);
    let mut coeffs = Vec::with_capacity(terms.max(1));
    coeffs.push(v0.clone());
    for i in 0..terms.saturating_sub(1) {
        let fi = i as f64;
        let shift = ct + &identity * cplx(fi, 0.0);
        if !is_nonsingular(&shift) {
            return Err(Error::SingularSeriesStep { index: i });
        }
        let shift_inv = shift
            .try_inverse()
            .ok_or(Error::SingularSeriesStep { index: i })?;
        let numer = &identity * cplx(fi * (fi - 1.0), 0.0) + ut * cplx(fi, 0.0) + vshift;
        let prev: &CVector = coeffs.last().expect("nonempty");
        let next = (shift_inv * (numer * prev)) * cplx(1.0 / (fi + 1.0), 0.0);
        coeffs.push(next);
    }
    Ok(coeffs)
}

/// Evaluates the matrix series `sum_i x^i c_i` built by
/// [`matrix_2h1_coefficients`], summed in ascending order.
pub fn matrix_2h1(
    ut: &CMatrix,
    vshift: &CMatrix,
    ct: &CMatrix,
    x: f64,
    v0: &CVector,
    terms: usize,
) -> Result<CVector> {
    let coeffs = matrix_2h1_coefficients(ut, vshift, ct, v0, terms)?;
    let mut sum = CVector::zeros(v0.len());
    let mut power = cplx(1.0, 0.0);
    for c in &coeffs {
        sum += c * power;
        power *= cplx(x, 0.0);
    }
    Ok(sum)
}
