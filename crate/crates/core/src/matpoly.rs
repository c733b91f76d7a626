//! Dense complex matrices and matrix polynomials.
//!
//! A [`MatrixPolynomial`] stores square complex coefficient matrices in
//! ascending degree order, `P(x) = sum_k x^k A_k`, and keeps itself trimmed:
//! trailing coefficients whose Frobenius norm falls below a relative
//! threshold are dropped, so `degree()` always reports the honest numerical
//! degree.  All binary operations check matrix sizes and return
//! [`Error::SizeMismatch`](crate::Error::SizeMismatch) instead of panicking.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Dense square matrix over the complex doubles; the scalar type used by the
/// whole crate.
pub type CMatrix = DMatrix<Complex64>;

/// Relative threshold under which a trailing coefficient counts as zero:
/// a coefficient is trimmed when its norm is at most `TRIM_TOL` times the
/// largest coefficient norm of the polynomial.
pub const TRIM_TOL: f64 = 1e-12;

/// Relative singular-value threshold: a matrix counts as numerically
/// singular when its smallest singular value is below `SINGULAR_TOL` times
/// its largest.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Shorthand for a complex scalar.
pub fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds an `n x n` complex matrix from a row-major slice of real entries.
pub fn real_matrix(n: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), n * n, "entry count must be n^2");
    CMatrix::from_row_slice(
        n,
        n,
        &entries.iter().map(|&v| cplx(v, 0.0)).collect::<Vec<_>>(),
    )
}

/// Builds an `n x n` complex matrix from a row-major slice of complex entries.
pub fn complex_matrix(n: usize, entries: &[Complex64]) -> CMatrix {
    assert_eq!(entries.len(), n * n, "entry count must be n^2");
    CMatrix::from_row_slice(n, n, entries)
}

/// True when every entry of `m` is finite.
pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// True when `m` is numerically nonsingular: the smallest singular value
/// exceeds [`SINGULAR_TOL`] times the largest.  The zero matrix is singular.
pub fn is_nonsingular(m: &CMatrix) -> bool {
    let sv = m.clone().singular_values();
    let largest = sv.max();
    largest > 0.0 && sv.min() > SINGULAR_TOL * largest
}

/// Inverts `m`, reporting a descriptive error when it is numerically
/// singular.
pub fn invert(m: &CMatrix, context: &str) -> Result<CMatrix> {
    if !is_nonsingular(m) {
        return Err(Error::SingularMatrix {
            context: context.to_string(),
        });
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMatrix {
            context: context.to_string(),
        })
}

/// Hermitian part `(M + M^*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * cplx(0.5, 0.0)
}

/// Relative Frobenius-norm residual `|actual - reference| / |reference|`,
/// falling back to the absolute residual when the reference is numerically
/// zero.
pub fn relative_residual(actual: &CMatrix, reference: &CMatrix) -> f64 {
    let diff = (actual - reference).norm();
    let scale = reference.norm();
    if scale > 1e-14 {
        diff / scale
    } else {
        diff
    }
}

/// Error-free sum: returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e`
/// exactly (Knuth's TwoSum).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free product: returns `(p, e)` with `p = fl(a * b)` and
/// `a * b = p + e` exactly (via fused multiply-add).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn check_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Leading coefficient of a matrix polynomial, together with the degree it
/// sits at and whether it is numerically nonsingular.
#[derive(Debug, Clone)]
pub struct LeadingCoefficient {
    /// Degree of the polynomial.
    pub degree: usize,
    /// The coefficient matrix of `x^degree`.
    pub matrix: CMatrix,
    /// Whether the smallest singular value exceeds [`SINGULAR_TOL`] times
    /// the largest.
    pub nonsingular: bool,
}

/// A polynomial with square complex matrix coefficients, stored in ascending
/// degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    size: usize,
    coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    /// Builds a polynomial from ascending coefficients.  All matrices must
    /// be square, of equal size, and finite; trailing negligible
    /// coefficients are trimmed away.
    pub fn from_coeffs(coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs.first().ok_or(Error::EmptyCoefficients)?;
        let size = check_square(first)?;
        for c in &coeffs {
            let s = check_square(c)?;
            if s != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    got: s,
                });
            }
            if !is_finite(c) {
                return Err(Error::NonFinite {
                    context: "polynomial coefficient".to_string(),
                });
            }
        }
        let mut poly = MatrixPolynomial { size, coeffs };
        poly.trim();
        Ok(poly)
    }

    /// The zero polynomial of the given matrix size (a single zero
    /// coefficient).
    pub fn zero(size: usize) -> Self {
        MatrixPolynomial {
            size,
            coeffs: vec![CMatrix::zeros(size, size)],
        }
    }

    /// The constant polynomial `I`.
    pub fn identity(size: usize) -> Self {
        MatrixPolynomial {
            size,
            coeffs: vec![CMatrix::identity(size, size)],
        }
    }

    /// The constant polynomial with the given value.
    pub fn constant(value: CMatrix) -> Result<Self> {
        Self::from_coeffs(vec![value])
    }

    /// The scalar monomial `x^k I`.
    pub fn monomial(size: usize, k: usize) -> Self {
        let mut coeffs = vec![CMatrix::zeros(size, size); k + 1];
        coeffs[k] = CMatrix::identity(size, size);
        MatrixPolynomial { size, coeffs }
    }

    /// Matrix size `N` of the coefficients.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Numerical degree after trimming; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// True when all coefficients were trimmed away.
    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].iter().all(|z| z.norm() == 0.0)
    }

    /// The stored coefficients, ascending in degree.
    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> CMatrix {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.size, self.size))
    }

    /// Largest coefficient norm; 0 only for the zero polynomial.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn trim(&mut self) {
        let largest = self.max_coeff_norm();
        let threshold = TRIM_TOL * largest;
        while self.coeffs.len() > 1 {
            let last = self.coeffs.last().expect("nonempty");
            if last.norm() <= threshold {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.len() == 1 && self.coeffs[0].norm() <= threshold {
            // Fully negligible content: normalize to the canonical zero.
            self.coeffs[0] = CMatrix::zeros(self.size, self.size);
        }
    }

    /// Evaluates by compensated Horner (error-free transformations on each
    /// scalar component).  Hypergeometric coefficient lists alternate in
    /// sign and grow into the thousands, so plain Horner loses up to five
    /// digits near the end of the interval; the compensated scheme keeps
    /// the result accurate to a few ulps of the *value* instead.  A
    /// constant polynomial returns its coefficient exactly.
    pub fn eval(&self, x: f64) -> CMatrix {
        let mut acc = self.coeffs.last().expect("nonempty").clone();
        let mut err = CMatrix::zeros(self.size, self.size);
        for c in self.coeffs.iter().rev().skip(1) {
            for (a, (e, lo)) in acc.iter_mut().zip(err.iter_mut().zip(c.iter())) {
                let (pr, epr) = two_prod(a.re, x);
                let (sr, esr) = two_sum(pr, lo.re);
                let (pi, epi) = two_prod(a.im, x);
                let (si, esi) = two_sum(pi, lo.im);
                a.re = sr;
                a.im = si;
                e.re = e.re * x + (epr + esr);
                e.im = e.im * x + (epi + esi);
            }
        }
        acc + err
    }

    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.size != other.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: other.size,
            });
        }
        Ok(())
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for k in 0..len {
            coeffs.push(self.coeff(k) + other.coeff(k));
        }
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        Ok(out)
    }

    /// Coefficient-wise difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(cplx(-1.0, 0.0)))
    }

    /// Left multiplication by a constant matrix: `M P(x)`.
    pub fn left_mul(&self, m: &CMatrix) -> Result<Self> {
        let s = check_square(m)?;
        if s != self.size {
            return Err(Error::SizeMismatch {
                expected: self.size,
                got: s,
            });
        }
        let coeffs = self.coeffs.iter().map(|c| m * c).collect();
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        Ok(out)
    }

    /// Scalar multiple `c P(x)`.
    pub fn scale(&self, c: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a * c).collect();
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        out
    }

    /// Multiplication by a real scalar polynomial `s(x)` given by ascending
    /// coefficients, e.g. `&[1.0, -1.0]` for `1 - x`.
    pub fn mul_scalar_poly(&self, s: &[f64]) -> Self {
        if s.is_empty() {
            return Self::zero(self.size);
        }
        let mut coeffs =
            vec![CMatrix::zeros(self.size, self.size); self.coeffs.len() + s.len() - 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            for (j, &sj) in s.iter().enumerate() {
                if sj != 0.0 {
                    coeffs[k + j] += a * cplx(sj, 0.0);
                }
            }
        }
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        out
    }

    /// Full polynomial product `P(x) Q(x)`: coefficient matrices are
    /// multiplied in that order, so this is not commutative.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_size(other)?;
        let mut coeffs =
            vec![CMatrix::zeros(self.size, self.size); self.coeffs.len() + other.coeffs.len() - 1];
        for (k, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[k + j] += a * b;
            }
        }
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        Ok(out)
    }

    /// `k`-th derivative; `k = 0` returns a clone.
    pub fn derivative(&self, k: usize) -> Self {
        if k == 0 {
            return self.clone();
        }
        if k > self.degree() {
            return Self::zero(self.size);
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() - k);
        for (j, c) in self.coeffs.iter().enumerate().skip(k) {
            // d^k/dx^k x^j = j (j-1) ... (j-k+1) x^{j-k}
            let mut factor = 1.0;
            for i in 0..k {
                factor *= (j - i) as f64;
            }
            coeffs.push(c * cplx(factor, 0.0));
        }
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        out
    }

    /// Leading coefficient, its degree, and a nonsingularity flag.
    /// The zero polynomial has no leading coefficient.
    pub fn leading_coefficient(&self) -> Result<LeadingCoefficient> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let matrix = self.coeffs.last().expect("nonempty").clone();
        Ok(LeadingCoefficient {
            degree: self.degree(),
            nonsingular: is_nonsingular(&matrix),
            matrix,
        })
    }

    /// Composition with an affine map: returns `P(sigma x + tau)`.
    pub fn compose_affine(&self, sigma: f64, tau: f64) -> Self {
        // Horner in the polynomial ring: acc <- acc * (sigma x + tau) + c_k.
        let inner = [tau, sigma];
        let mut acc = MatrixPolynomial {
            size: self.size,
            coeffs: vec![self.coeffs.last().expect("nonempty").clone()],
        };
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul_scalar_poly(&inner);
            acc.coeffs[0] += c;
        }
        acc.trim();
        acc
    }

    /// Conjugation `P(x) -> M P(x) M^{-1}` by a constant nonsingular matrix.
    pub fn similarity(&self, m: &CMatrix) -> Result<Self> {
        let m_inv = invert(m, "similarity transform")?;
        let coeffs = self.coeffs.iter().map(|c| m * c * &m_inv).collect();
        let mut out = MatrixPolynomial {
            size: self.size,
            coeffs,
        };
        out.trim();
        Ok(out)
    }
}
