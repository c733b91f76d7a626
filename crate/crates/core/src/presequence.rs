//! Pre-sequences and their normalization into orthogonal sequences.
//!
//! A pre-sequence is a family `{F_n}` of matrix polynomials satisfying a
//! three-term recursion in a spectral variable `s = sigma x + tau`,
//!
//! ```text
//! s F_n(x) = A_n F_{n-1}(x) + B_n F_n(x) + C_n F_{n+1}(x),    A_0 = 0,
//! ```
//!
//! with every `C_n` nonsingular and `det F_0` vanishing at only finitely
//! many points.  The members need not be orthogonal, and `F_n` need not
//! have degree `n`.  Normalizing by `Q_n = F_n F_0^{-1}` repairs both
//! defects at once: the `Q_n` satisfy the same recursion with `Q_0 = I`,
//! have degree exactly `n` with nonsingular leading coefficient, and are
//! orthogonal with respect to the conjugated weight `W' = F_0 W F_0^*`.
//! This module builds the `Q_n` from the recursion, checks the
//! factorization `F_n = Q_n F_0` numerically, assembles Gram matrices, and
//! provides the classical moment-based recursion as an independent oracle.

use std::sync::Arc;

use crate::error::Error;
use crate::matpoly::{cplx, invert, is_nonsingular, CMatrix, MatrixPolynomial};
use crate::quadrature::{inner_product, QuadratureRule};
use crate::weights::{MatrixFn, MatrixWeight};
use crate::Result;

/// One triple `(A_n, B_n, C_n)` of recursion coefficients.
#[derive(Debug, Clone)]
pub struct ThreeTermCoefficients {
    /// Couples to `F_{n-1}`; must vanish for `n = 0`.
    pub a: CMatrix,
    /// Couples to `F_n`.
    pub b: CMatrix,
    /// Couples to `F_{n+1}`; must be nonsingular for the recursion to be
    /// solvable upward.
    pub c: CMatrix,
}

impl ThreeTermCoefficients {
    /// Checks the square sizes agree and returns the common size.
    pub fn size(&self) -> Result<usize> {
        let n = self.a.nrows();
        for m in [&self.a, &self.b, &self.c] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    got: m.nrows(),
                });
            }
        }
        Ok(n)
    }
}

/// Producer of the recursion coefficients for each index `n`.
pub type CoeffFn = Arc<dyn Fn(usize) -> ThreeTermCoefficients + Send + Sync>;

/// The affine spectral map `x -> sigma x + tau` in which the recursion
/// variable lives.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    /// Slope; must be nonzero.
    pub sigma: f64,
    /// Intercept.
    pub tau: f64,
}

impl AffineMap {
    /// The identity map `s = x`.
    pub fn identity() -> Self {
        AffineMap {
            sigma: 1.0,
            tau: 0.0,
        }
    }

    /// Applies the map.
    pub fn apply(&self, x: f64) -> f64 {
        self.sigma * x + self.tau
    }
}

/// A pre-sequence: recursion coefficients, the seed `F_0`, the base weight
/// `W`, and the spectral map tying the recursion variable to the weight
/// variable.
#[derive(Clone)]
pub struct PreSequence {
    size: usize,
    f0: MatrixFn,
    f0_poly: Option<MatrixPolynomial>,
    coeffs: CoeffFn,
    weight: MatrixWeight,
    spectral_map: AffineMap,
}

impl PreSequence {
    /// Assembles a pre-sequence.  Verifies that the spectral map is
    /// invertible, the sizes agree, and `A_0 = 0`.
    pub fn new(
        size: usize,
        f0: MatrixFn,
        f0_poly: Option<MatrixPolynomial>,
        coeffs: CoeffFn,
        weight: MatrixWeight,
        spectral_map: AffineMap,
    ) -> Result<Self> {
        if spectral_map.sigma == 0.0 {
            return Err(Error::InvalidParameter {
                context: "spectral map must have nonzero slope".to_string(),
            });
        }
        if weight.size() != size {
            return Err(Error::SizeMismatch {
                expected: size,
                got: weight.size(),
            });
        }
        if let Some(p) = &f0_poly {
            if p.size() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    got: p.size(),
                });
            }
        }
        let c0 = coeffs(0);
        if c0.size()? != size {
            return Err(Error::SizeMismatch {
                expected: size,
                got: c0.size()?,
            });
        }
        if c0.a.norm() > 1e-14 {
            return Err(Error::InvalidParameter {
                context: "A_0 must vanish".to_string(),
            });
        }
        Ok(PreSequence {
            size,
            f0,
            f0_poly,
            coeffs,
            weight,
            spectral_map,
        })
    }

    /// Matrix size `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// The base weight `W`.
    pub fn weight(&self) -> &MatrixWeight {
        &self.weight
    }

    /// The spectral map.
    pub fn spectral_map(&self) -> AffineMap {
        self.spectral_map
    }

    /// Recursion coefficients at index `n`.
    pub fn coefficients(&self, n: usize) -> ThreeTermCoefficients {
        (self.coeffs)(n)
    }

    /// Evaluates the seed `F_0(x)`.
    pub fn f0_at(&self, x: f64) -> CMatrix {
        (self.f0)(x)
    }

    /// The seed as a polynomial, when one was supplied.
    pub fn f0_poly(&self) -> Option<&MatrixPolynomial> {
        self.f0_poly.as_ref()
    }

    /// The conjugated weight `W'(x) = F_0(x) W(x) F_0(x)^*` that the
    /// normalized sequence is orthogonal against.
    pub fn conjugated_weight(&self) -> MatrixWeight {
        let f0_degree = self.f0_poly.as_ref().map(|p| p.degree());
        self.weight.conjugate(self.f0.clone(), f0_degree)
    }

    /// Counts the sample points where `|det F_0|` falls below `tol`; the
    /// almost-everywhere invertibility hypothesis allows only a thin set of
    /// such points, so on a generic grid the count should be zero.
    pub fn f0_near_singular_count(&self, xs: &[f64], tol: f64) -> usize {
        xs.iter()
            .filter(|&&x| self.f0_at(x).determinant().norm() < tol)
            .count()
    }

    /// Evaluates `F_n(x)` pointwise by running the recursion on matrix
    /// values (no polynomial arithmetic): useful as a cross-check against
    /// closed forms.
    pub fn f_value(&self, n: usize, x: f64) -> Result<CMatrix> {
        let s = self.spectral_map.apply(x);
        let mut prev = CMatrix::zeros(self.size, self.size);
        let mut cur = self.f0_at(x);
        for k in 0..n {
            let c = self.coefficients(k);
            if !is_nonsingular(&c.c) {
                return Err(Error::SingularRecursionCoefficient { index: k });
            }
            let c_inv = invert(&c.c, "recursion coefficient")?;
            let mut rhs = &cur * cplx(s, 0.0) - &c.b * &cur;
            if k > 0 {
                rhs -= &c.a * &prev;
            }
            let next = c_inv * rhs;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }
}

impl std::fmt::Debug for PreSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreSequence")
            .field("size", &self.size)
            .field("spectral_map", &self.spectral_map)
            .finish()
    }
}

/// Builds the normalized polynomials `Q_0, ..., Q_{n_max}` from the
/// recursion: `Q_0 = I` and
/// `Q_{n+1} = C_n^{-1} (s Q_n - B_n Q_n - A_n Q_{n-1})`, carried out in the
/// spectral variable and composed back through the spectral map.  Each `Q_n`
/// has degree exactly `n`; a degree drop means the coefficient input is
/// inconsistent and is reported as an error.
pub fn build_q(ps: &PreSequence, n_max: usize) -> Result<Vec<MatrixPolynomial>> {
    let size = ps.size();
    // Work in the spectral variable s, where the recursion reads
    // s Qhat_n = A_n Qhat_{n-1} + B_n Qhat_n + C_n Qhat_{n+1}.
    let mut qs: Vec<MatrixPolynomial> = Vec::with_capacity(n_max + 1);
    qs.push(MatrixPolynomial::identity(size));
    for n in 0..n_max {
        let coeffs = ps.coefficients(n);
        coeffs.size()?;
        if !is_nonsingular(&coeffs.c) {
            return Err(Error::SingularRecursionCoefficient { index: n });
        }
        let c_inv = invert(&coeffs.c, "recursion coefficient")?;
        // s Q_n - B_n Q_n
        let mut rhs = qs[n]
            .mul_scalar_poly(&[0.0, 1.0])
            .sub(&qs[n].left_mul(&coeffs.b)?)?;
        if n > 0 {
            rhs = rhs.sub(&qs[n - 1].left_mul(&coeffs.a)?)?;
        }
        let next = rhs.left_mul(&c_inv)?;
        if next.degree() != n + 1 {
            return Err(Error::DegreeLaw {
                index: n + 1,
                expected: n + 1,
                got: next.degree(),
            });
        }
        qs.push(next);
    }
    // Compose back to the weight variable x.
    let map = ps.spectral_map();
    Ok(qs
        .into_iter()
        .map(|q| q.compose_affine(map.sigma, map.tau))
        .collect())
}

/// Outcome of checking the factorization `F_n(x) = Q_n(x) F_0(x)` on a
/// sample grid.
#[derive(Debug, Clone)]
pub struct FactorizationReport {
    /// Largest relative residual per index `n`.
    pub residuals: Vec<f64>,
    /// Largest residual over all indices and samples.
    pub max_residual: f64,
    /// The tolerance the report was checked against.
    pub tol: f64,
    /// True when `max_residual <= tol`.
    pub pass: bool,
}

/// Verifies `F_n = Q_n F_0` pointwise.  `f_values` supplies reference
/// values of `F_n(x)` (closed form, recursion, or tabulated); residuals are
/// relative to `|F_n(x)|` and absolute where that norm is numerically zero.
pub fn verify_factorization(
    ps: &PreSequence,
    qs: &[MatrixPolynomial],
    f_values: &dyn Fn(usize, f64) -> CMatrix,
    samples: &[f64],
    tol: f64,
) -> Result<FactorizationReport> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            context: "factorization check".to_string(),
            required: 1,
            got: 0,
        });
    }
    let mut residuals = Vec::with_capacity(qs.len());
    for (n, q) in qs.iter().enumerate() {
        let mut worst = 0.0_f64;
        for &x in samples {
            let reference = f_values(n, x);
            let got = q.eval(x) * ps.f0_at(x);
            let scale = reference.norm();
            let diff = (got - &reference).norm();
            let res = if scale > 1e-14 { diff / scale } else { diff };
            worst = worst.max(res);
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(FactorizationReport {
        residuals,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Gram matrix of a finite family: block `(i, j)` holds the inner product
/// `(P_i, P_j)_W`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    count: usize,
    blocks: Vec<CMatrix>, // row-major block storage
}

impl GramMatrix {
    /// Number of polynomials (blocks per side).
    pub fn count(&self) -> usize {
        self.count
    }

    /// Block `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.count + j]
    }

    /// Largest off-diagonal block norm measured relative to the geometric
    /// mean of the adjacent diagonal blocks:
    /// `max |G_ij| / sqrt(|G_ii| |G_jj|)` over `i != j`.
    pub fn max_offdiagonal_ratio(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.count {
            for j in 0..self.count {
                if i == j {
                    continue;
                }
                let denom = (self.block(i, i).norm() * self.block(j, j).norm()).sqrt();
                let ratio = if denom > 0.0 {
                    self.block(i, j).norm() / denom
                } else {
                    self.block(i, j).norm()
                };
                worst = worst.max(ratio);
            }
        }
        worst
    }

    /// Smallest eigenvalue of each (Hermitian) diagonal block.
    pub fn diagonal_min_eigenvalues(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| {
                let herm = crate::matpoly::hermitian_part(self.block(i, i));
                nalgebra::SymmetricEigen::new(herm).eigenvalues.min()
            })
            .collect()
    }

    /// Checks near-diagonality: every diagonal block must be positive
    /// definite and every off-diagonal ratio at most `tol`.  Returns the
    /// worst off-diagonal ratio.
    pub fn check(&self, tol: f64) -> Result<f64> {
        for (i, min_eig) in self.diagonal_min_eigenvalues().iter().enumerate() {
            if *min_eig <= 0.0 {
                return Err(Error::NotPositiveDefinite {
                    index: i,
                    min_eigenvalue: *min_eig,
                });
            }
        }
        let ratio = self.max_offdiagonal_ratio();
        if ratio > tol {
            return Err(Error::NotAffine {
                context: "gram off-diagonal".to_string(),
                residual: ratio,
                tol,
            });
        }
        Ok(ratio)
    }
}

/// Assembles the Gram matrix of `polys` under `weight` using `rule`.
/// Hermitian symmetry `G_ji = G_ij^*` is used, so only the lower triangle
/// is integrated.
pub fn gram_matrix(
    polys: &[MatrixPolynomial],
    weight: &MatrixWeight,
    rule: &QuadratureRule,
) -> Result<GramMatrix> {
    let count = polys.len();
    let size = weight.size();
    let mut blocks = vec![CMatrix::zeros(size, size); count * count];
    for i in 0..count {
        for j in 0..=i {
            let g = inner_product(&polys[i], &polys[j], weight, rule)?;
            blocks[j * count + i] = g.adjoint();
            blocks[i * count + j] = g;
        }
    }
    Ok(GramMatrix { count, blocks })
}

/// Output of the moment-based monic recursion: the monic orthogonal
/// polynomials and their recursion coefficients
/// `x P_n = P_{n+1} + Btilde_n P_n + Atilde_n P_{n-1}`.
#[derive(Debug, Clone)]
pub struct MonicFromMoments {
    /// Monic orthogonal polynomials `P_0, ..., P_{n_max}`.
    pub polys: Vec<MatrixPolynomial>,
    /// `Btilde_n = (x P_n, P_n) (P_n, P_n)^{-1}` for `n = 0, ..., n_max-1`.
    pub b_tilde: Vec<CMatrix>,
    /// `Atilde_n = (x P_n, P_{n-1}) (P_{n-1}, P_{n-1})^{-1}` for
    /// `n = 1, ..., n_max-1`.
    pub a_tilde: Vec<CMatrix>,
}

/// Classical construction of monic matrix orthogonal polynomials directly
/// from moments of `weight`.  This is independent of any pre-sequence and
/// serves as an oracle: for the same weight, the monic normalization of any
/// orthogonal sequence must reproduce these polynomials.  The rule must
/// integrate degree `2 n_max + deg W` exactly for the orthogonality to be
/// trustworthy.
pub fn recursion_from_moments(
    weight: &MatrixWeight,
    n_max: usize,
    rule: &QuadratureRule,
) -> Result<MonicFromMoments> {
    let size = weight.size();
    let mut polys = vec![MatrixPolynomial::identity(size)];
    let mut b_tilde = Vec::new();
    let mut a_tilde = Vec::new();
    let x_poly = [0.0, 1.0];
    for n in 0..n_max {
        let pn = polys[n].clone();
        let xpn = pn.mul_scalar_poly(&x_poly);
        let hn = inner_product(&pn, &pn, weight, rule)?;
        if !is_nonsingular(&hn) {
            return Err(Error::DegenerateNorm { index: n });
        }
        let hn_inv = invert(&hn, "squared-norm matrix")?;
        let bn = inner_product(&xpn, &pn, weight, rule)? * &hn_inv;
        let mut next = xpn.sub(&pn.left_mul(&bn)?)?;
        if n > 0 {
            let pm = &polys[n - 1];
            let hm = inner_product(pm, pm, weight, rule)?;
            let hm_inv = invert(&hm, "squared-norm matrix")?;
            let an = inner_product(&pn.mul_scalar_poly(&x_poly), pm, weight, rule)? * &hm_inv;
            next = next.sub(&pm.left_mul(&an)?)?;
            a_tilde.push(an);
        }
        b_tilde.push(bn);
        polys.push(next);
    }
    Ok(MonicFromMoments {
        polys,
        b_tilde,
        a_tilde,
    })
}

/// Rescales each polynomial to monic form: returns `(M_n^{-1} Q_n, M_n)`
/// where `M_n` is the leading coefficient of `Q_n`.  Fails when some
/// leading coefficient is numerically singular.
pub fn monic_normalize(
    polys: &[MatrixPolynomial],
) -> Result<(Vec<MatrixPolynomial>, Vec<CMatrix>)> {
    let mut monic = Vec::with_capacity(polys.len());
    let mut leaders = Vec::with_capacity(polys.len());
    for (n, q) in polys.iter().enumerate() {
        let lc = q.leading_coefficient()?;
        if !lc.nonsingular {
            return Err(Error::SingularMatrix {
                context: format!("leading coefficient of polynomial {n}"),
            });
        }
        let inv = invert(&lc.matrix, "leading coefficient")?;
        monic.push(q.left_mul(&inv)?);
        leaders.push(lc.matrix);
    }
    Ok((monic, leaders))
}
