//! Matrix weights: Hermitian positive-semidefinite matrix densities on an
//! interval.
//!
//! A [`MatrixWeight`] wraps an arbitrary evaluator `x -> W(x)` together with
//! its support interval and, when the entries are polynomials, their maximal
//! degree (used to size quadrature rules exactly).  The module also provides
//! the two transformations the normalization machinery relies on:
//! conjugation `W -> F_0 W F_0^*` by a matrix function and the constant
//! equivalence `W -> M W M^*`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;

use crate::error::Error;
use crate::matpoly::{hermitian_part, CMatrix, MatrixPolynomial};
use crate::quadrature::{integrate_matrix, QuadratureRule};
use crate::Result;

/// A matrix-valued function of one real variable.
pub type MatrixFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// Relative eigenvalue threshold for the positive-semidefiniteness check:
/// an eigenvalue below `-PSD_TOL` times the spectral norm flags the sample.
pub const PSD_TOL: f64 = 1e-10;

/// A matrix weight `W` supported on a finite interval.
#[derive(Clone)]
pub struct MatrixWeight {
    size: usize,
    support: (f64, f64),
    eval: MatrixFn,
    polynomial_degree: Option<usize>,
}

impl std::fmt::Debug for MatrixWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixWeight")
            .field("size", &self.size)
            .field("support", &self.support)
            .field("polynomial_degree", &self.polynomial_degree)
            .finish()
    }
}

impl MatrixWeight {
    /// Wraps an evaluator of unknown (possibly non-polynomial) entries.
    pub fn new(size: usize, support: (f64, f64), eval: MatrixFn) -> Self {
        MatrixWeight {
            size,
            support,
            eval,
            polynomial_degree: None,
        }
    }

    /// Wraps an evaluator whose entries are polynomials of degree at most
    /// `degree`; quadrature against such a weight can be made exact.
    pub fn polynomial(size: usize, support: (f64, f64), eval: MatrixFn, degree: usize) -> Self {
        MatrixWeight {
            size,
            support,
            eval,
            polynomial_degree: Some(degree),
        }
    }

    /// Builds a weight directly from a matrix polynomial.
    pub fn from_matrix_polynomial(p: &MatrixPolynomial, support: (f64, f64)) -> Self {
        let poly = p.clone();
        let degree = p.degree();
        MatrixWeight {
            size: p.size(),
            support,
            eval: Arc::new(move |x| poly.eval(x)),
            polynomial_degree: Some(degree),
        }
    }

    /// Matrix size `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// The support interval `(a, b)`.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Maximal entry degree when the weight is known to be polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        self.polynomial_degree
    }

    /// Evaluates `W(x)`.
    pub fn evaluate(&self, x: f64) -> CMatrix {
        (self.eval)(x)
    }

    /// `k`-th moment `integral of x^k W(x) dx` over the support, computed
    /// with the supplied rule.  For a polynomial weight the rule is exact as
    /// soon as `2 * len - 1 >= k + degree`.
    pub fn moment(&self, k: usize, rule: &QuadratureRule) -> Result<CMatrix> {
        integrate_matrix(
            |x| self.evaluate(x) * crate::matpoly::cplx(x.powi(k as i32), 0.0),
            rule,
        )
    }

    /// Conjugates by a matrix function: returns the weight
    /// `x -> F0(x) W(x) F0(x)^*` on the same support.  When both the weight
    /// and `F0` are polynomial of known degree, pass `f0_degree` so the
    /// result keeps an exact degree bound (`2 deg F0 + deg W`).
    pub fn conjugate(&self, f0: MatrixFn, f0_degree: Option<usize>) -> Self {
        let inner = self.eval.clone();
        let eval: MatrixFn = Arc::new(move |x| {
            let f = f0(x);
            let fw = &f * inner(x);
            fw * f.adjoint()
        });
        let polynomial_degree = match (self.polynomial_degree, f0_degree) {
            (Some(dw), Some(df)) => Some(dw + 2 * df),
            _ => None,
        };
        MatrixWeight {
            size: self.size,
            support: self.support,
            eval,
            polynomial_degree,
        }
    }

    /// Equivalence transformation by a constant nonsingular matrix:
    /// `x -> M W(x) M^*`.  Weights related this way share the same
    /// orthogonal polynomials up to the corresponding conjugation.
    pub fn equivalence_transform(&self, m: &CMatrix) -> Result<Self> {
        if m.nrows() != self.size || m.ncols() != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: m.nrows(),
            });
        }
        if !crate::matpoly::is_nonsingular(m) {
            return Err(Error::SingularMatrix {
                context: "equivalence transformation".to_string(),
            });
        }
        let inner = self.eval.clone();
        let m_owned = m.clone();
        let m_adj = m.adjoint();
        let eval: MatrixFn = Arc::new(move |x| &m_owned * inner(x) * &m_adj);
        Ok(MatrixWeight {
            size: self.size,
            support: self.support,
            eval,
            polynomial_degree: self.polynomial_degree,
        })
    }

    /// Samples positive semidefiniteness at the given abscissas.
    pub fn psd_report(&self, xs: &[f64]) -> PsdReport {
        let samples = xs
            .iter()
            .map(|&x| {
                let w = self.evaluate(x);
                // Eigenvalues of the Hermitian part; for an exactly
                // Hermitian sample this is the sample itself.
                let herm = hermitian_part(&w);
                let asymmetry = (&w - &herm).norm();
                let eigen = SymmetricEigen::new(herm);
                let min_eigenvalue = eigen.eigenvalues.min();
                let spectral_norm = eigen
                    .eigenvalues
                    .iter()
                    .map(|e| e.abs())
                    .fold(0.0, f64::max);
                let degenerate = spectral_norm < f64::MIN_POSITIVE;
                let flagged = degenerate
                    || min_eigenvalue < -PSD_TOL * spectral_norm
                    || asymmetry > PSD_TOL * spectral_norm.max(1.0);
                PsdSample {
                    x,
                    min_eigenvalue,
                    spectral_norm,
                    degenerate,
                    flagged,
                }
            })
            .collect::<Vec<_>>();
        let all_ok = samples.iter().all(|s| !s.flagged);
        PsdReport { samples, all_ok }
    }
}

/// Positive-semidefiniteness diagnostics for one sample point.
#[derive(Debug, Clone)]
pub struct PsdSample {
    /// The abscissa.
    pub x: f64,
    /// Smallest eigenvalue of the Hermitian part of `W(x)`.
    pub min_eigenvalue: f64,
    /// Largest absolute eigenvalue.
    pub spectral_norm: f64,
    /// True when `W(x)` vanishes identically (spectral norm zero), which
    /// makes the weight unusable even though no eigenvalue is negative.
    pub degenerate: bool,
    /// True when the sample violates positive semidefiniteness (relative to
    /// the spectral norm), is degenerate, or is measurably non-Hermitian.
    pub flagged: bool,
}

/// Result of sampling a weight for positive semidefiniteness.
#[derive(Debug, Clone)]
pub struct PsdReport {
    /// Per-point diagnostics in the order the abscissas were given.
    pub samples: Vec<PsdSample>,
    /// True when no sample is flagged.
    pub all_ok: bool,
}

impl PsdReport {
    /// Number of flagged samples.
    pub fn flagged_count(&self) -> usize {
        self.samples.iter().filter(|s| s.flagged).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matpoly::{cplx, real_matrix};
    use crate::quadrature::QuadratureRule;

    fn grid(count: usize) -> Vec<f64> {
        (1..=count)
            .map(|k| k as f64 / (count as f64 + 1.0))
            .collect()
    }

    #[test]
    fn moments_of_diagonal_weight() {
        // W = diag(x(1-x)^2, x(1-x)) on [0, 1] (the n = 1 model weight):
        // moment 0 is diag(1/12, 1/6).
        let w = MatrixWeight::polynomial(
            2,
            (0.0, 1.0),
            Arc::new(|x: f64| {
                real_matrix(2, &[x * (1.0 - x) * (1.0 - x), 0.0, 0.0, x * (1.0 - x)])
            }),
            3,
        );
        let rule = QuadratureRule::gauss_legendre(6, 0.0, 1.0).unwrap();
        let m0 = w.moment(0, &rule).unwrap();
        let want = real_matrix(2, &[1.0 / 12.0, 0.0, 0.0, 1.0 / 6.0]);
        assert!((m0 - want).norm() < 1e-15);
        // First moment of the (2,2) entry: integral of x^2(1-x) = 1/12.
        let m1 = w.moment(1, &rule).unwrap();
        assert!((m1[(1, 1)].re - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn conjugation_matches_pointwise_product() {
        let w = MatrixWeight::polynomial(
            2,
            (0.0, 1.0),
            Arc::new(|x: f64| real_matrix(2, &[x, 0.0, 0.0, 1.0 - x])),
            1,
        );
        let f0 = |x: f64| real_matrix(2, &[1.0, 1.0, 1.0, 1.0 - 3.0 * x]);
        let conj = w.conjugate(Arc::new(f0), Some(1));
        assert_eq!(conj.polynomial_degree(), Some(3));
        for &x in &[0.1, 0.5, 0.9] {
            let f = f0(x);
            let want = &f * w.evaluate(x) * f.adjoint();
            assert!((conj.evaluate(x) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn double_conjugation_round_trips() {
        // Conjugating by F0 and then by F0^{-1} recovers the original
        // weight wherever F0 is invertible.
        let w = MatrixWeight::new(
            2,
            (0.0, 1.0),
            Arc::new(|x: f64| real_matrix(2, &[1.0 + x, 0.5, 0.5, 2.0 - x])),
        );
        let f0: MatrixFn = Arc::new(|x: f64| real_matrix(2, &[1.0, 1.0, 1.0, 1.0 - 3.0 * x]));
        let f0_inv: MatrixFn = Arc::new(|x: f64| {
            real_matrix(2, &[1.0, 1.0, 1.0, 1.0 - 3.0 * x])
                .try_inverse()
                .expect("invertible off the zero set")
        });
        let round = w.conjugate(f0, None).conjugate(f0_inv, None);
        for &x in &[0.1, 0.25, 0.8] {
            assert!((round.evaluate(x) - w.evaluate(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn equivalence_requires_nonsingular() {
        let w = MatrixWeight::new(2, (0.0, 1.0), Arc::new(|_| CMatrix::identity(2, 2)));
        let singular = real_matrix(2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            w.equivalence_transform(&singular),
            Err(Error::SingularMatrix { .. })
        ));
        let m = real_matrix(2, &[2.0, 1.0, 0.0, 1.0]);
        let t = w.equivalence_transform(&m).unwrap();
        let want = &m * m.adjoint();
        assert!((t.evaluate(0.5) - want).norm() < 1e-15);
    }

    #[test]
    fn psd_report_accepts_psd_and_flags_indefinite() {
        let psd = MatrixWeight::new(
            2,
            (0.0, 1.0),
            Arc::new(|x: f64| real_matrix(2, &[x, 0.0, 0.0, x * x])),
        );
        let report = psd.psd_report(&grid(9));
        assert!(report.all_ok);
        assert_eq!(report.flagged_count(), 0);

        // diag(x, x - 1/2) is indefinite on (0, 1/2).
        let indefinite = MatrixWeight::new(
            2,
            (0.0, 1.0),
            Arc::new(|x: f64| real_matrix(2, &[x, 0.0, 0.0, x - 0.5])),
        );
        let report = indefinite.psd_report(&grid(9));
        assert!(!report.all_ok);
        assert!(report.flagged_count() >= 4);
        assert!(report.samples[0].min_eigenvalue < 0.0);
    }

    #[test]
    fn psd_report_flags_identically_zero_weight() {
        let zero = MatrixWeight::new(2, (0.0, 1.0), Arc::new(|_| CMatrix::zeros(2, 2)));
        let report = zero.psd_report(&grid(5));
        assert!(!report.all_ok);
        assert!(report.samples.iter().all(|s| s.degenerate && s.flagged));
    }

    #[test]
    fn psd_report_handles_complex_hermitian_entries() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3: PSD everywhere.
        let w = MatrixWeight::new(
            2,
            (0.0, 1.0),
            Arc::new(|_| {
                CMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        cplx(2.0, 0.0),
                        cplx(0.0, 1.0),
                        cplx(0.0, -1.0),
                        cplx(2.0, 0.0),
                    ],
                )
            }),
        );
        let report = w.psd_report(&grid(3));
        assert!(report.all_ok);
        assert!((report.samples[0].min_eigenvalue - 1.0).abs() < 1e-12);
        assert!((report.samples[0].spectral_norm - 3.0).abs() < 1e-12);
    }
}
