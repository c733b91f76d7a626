//! Built-in model: the 2x2 family attached to the complex projective plane.
//!
//! For an integer parameter `n >= 1` the model supplies, in closed form,
//! everything the rest of the crate knows how to verify:
//!
//! * a pre-sequence `F_w` of 2x2 polynomials whose entries are terminating
//!   hypergeometric sums (degree `w + 1` with singular leading coefficient,
//!   so the family is *not* orthogonal as it stands);
//! * the diagonal weight `W = diag(x (1-x)^{n+1}, x (1-x)^n)` on `[0, 1]`
//!   and the conjugated weight `W' = F_0 W F_0^*` the normalized family is
//!   orthogonal against;
//! * three-term recursion coefficients in the spectral variable `s = 1 - x`;
//! * the normalized polynomials `Q_w = F_w F_0^{-1}` in closed form and
//!   their leading coefficients;
//! * a right-acting second-order operator `D` with `F_w D = Lambda_w F_w`,
//!   its conjugation `Dtilde = F_0 D F_0^{-1}` in hypergeometric form, and
//!   the eigenvalues `Lambda_w`.
//!
//! Two published closed forms contain typos that the construction itself
//! exposes (the `(2,2)` entry of `Q_w` and two entries of its leading
//! coefficient); this module stores the corrected expressions, which are
//! the ones consistent with the recursion, and keeps the raw initial
//! vectors available so reports can state the discrepancy explicitly.

use std::sync::Arc;

use crate::diffop::{HypergeometricConstants, SampledDiffOperator};
use crate::hyper::{pfq_coefficients, CVector, HyperSeriesParams};
use crate::matpoly::{cplx, real_matrix, CMatrix, MatrixPolynomial};
use crate::presequence::{AffineMap, CoeffFn, PreSequence, ThreeTermCoefficients};
use crate::weights::{MatrixFn, MatrixWeight};

/// Pochhammer symbol `(a)_k = a (a+1) ... (a+k-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= a + i as f64;
    }
    out
}

/// The complex-projective-plane model at parameter `n`.
#[derive(Debug, Clone, Copy)]
pub struct Cp2Model {
    n: u32,
}

/// Builds a 2x2 matrix polynomial from four ascending scalar coefficient
/// lists in row-major entry order.
fn poly2(e11: &[f64], e12: &[f64], e21: &[f64], e22: &[f64]) -> MatrixPolynomial {
    let len = e11
        .len()
        .max(e12.len())
        .max(e21.len())
        .max(e22.len())
        .max(1);
    let get = |e: &[f64], k: usize| e.get(k).copied().unwrap_or(0.0);
    let coeffs = (0..len)
        .map(|k| real_matrix(2, &[get(e11, k), get(e12, k), get(e21, k), get(e22, k)]))
        .collect();
    MatrixPolynomial::from_coeffs(coeffs).expect("finite square coefficients")
}

/// Adds `scale * b` into `a`, growing `a` as needed.
fn add_scaled(a: &mut Vec<f64>, b: &[f64], scale: f64) {
    if a.len() < b.len() {
        a.resize(b.len(), 0.0);
    }
    for (dst, &src) in a.iter_mut().zip(b.iter()) {
        *dst += scale * src;
    }
}

fn series(numerator: &[f64], denominator: &[f64]) -> Vec<f64> {
    pfq_coefficients(&HyperSeriesParams::new(
        numerator.to_vec(),
        denominator.to_vec(),
    ))
    .expect("terminating series with positive denominator parameters")
}

impl Cp2Model {
    /// The model at weight exponent `n`; every `n >= 0` is valid (the
    /// denominators of all closed forms stay positive).
    pub fn new(n: u32) -> Self {
        Cp2Model { n }
    }

    /// The weight exponent `n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// The auxiliary denominator parameter
    /// `c = (w+1)(w+n+3) / ((w+1)(w+n+3) + n)` of the `(2,2)` entry.
    pub fn c_param(&self, w: u32) -> f64 {
        let (wf, nf) = (w as f64, self.nf());
        let prod = (wf + 1.0) * (wf + nf + 3.0);
        prod / (prod + nf)
    }

    /// The eigenvalue offset `s_w = w(w+n+4) + 3(n+2)` appearing in the
    /// second row of the closed-form `Q_w`.
    pub fn s_param(&self, w: u32) -> f64 {
        let (wf, nf) = (w as f64, self.nf());
        wf * (wf + nf + 4.0) + 3.0 * (nf + 2.0)
    }

    /// The pre-sequence member `F_w` as an exact polynomial.  Entries are
    /// terminating hypergeometric sums:
    ///
    /// ```text
    /// F_w = [ 3F2(-w, w+n+3, 2; 3, 1)      2F1(-w, w+n+3; 3)    ]
    ///       [ 2F1(-w, w+n+4; 3)            3F2(-w-1, w+n+3, c+1; 3, c) ]
    /// ```
    ///
    /// `F_w` has degree `w + 1` and a singular leading coefficient: only
    /// its `(2,2)` entry reaches the top degree.
    pub fn f_w(&self, w: u32) -> MatrixPolynomial {
        let (wf, nf) = (w as f64, self.nf());
        let c = self.c_param(w);
        let e11 = series(&[-wf, wf + nf + 3.0, 2.0], &[3.0, 1.0]);
        let e12 = series(&[-wf, wf + nf + 3.0], &[3.0]);
        let e21 = series(&[-wf, wf + nf + 4.0], &[3.0]);
        let e22 = series(&[-wf - 1.0, wf + nf + 3.0, c + 1.0], &[3.0, c]);
        poly2(&e11, &e12, &e21, &e22)
    }

    /// The base weight `W = diag(x (1-x)^{n+1}, x (1-x)^n)` on `[0, 1]`.
    pub fn weight(&self) -> MatrixWeight {
        let n = self.n;
        let eval: MatrixFn = Arc::new(move |x: f64| {
            let base = x * (1.0 - x).powi(n as i32);
            real_matrix(2, &[base * (1.0 - x), 0.0, 0.0, base])
        });
        MatrixWeight::polynomial(2, (0.0, 1.0), eval, self.n as usize + 2)
    }

    /// The conjugated weight in its published closed form,
    ///
    /// ```text
    /// W' = x (1-x)^n [ 2 - x            2 - (n+3) x                 ]
    ///                [ 2 - (n+3) x      1 - x + (1 - (n+2) x)^2     ],
    /// ```
    ///
    /// which coincides with `F_0 W F_0^*`.
    pub fn weight_prime(&self) -> MatrixWeight {
        let n = self.n;
        let nf = self.nf();
        let eval: MatrixFn = Arc::new(move |x: f64| {
            let base = x * (1.0 - x).powi(n as i32);
            let off = 2.0 - (nf + 3.0) * x;
            let d = 1.0 - (nf + 2.0) * x;
            real_matrix(
                2,
                &[
                    base * (2.0 - x),
                    base * off,
                    base * off,
                    base * (1.0 - x + d * d),
                ],
            )
        });
        MatrixWeight::polynomial(2, (0.0, 1.0), eval, self.n as usize + 3)
    }

    /// Recursion coefficients of `(1-x) F_w = A_w F_{w-1} + B_w F_w +
    /// C_w F_{w+1}` (so the spectral variable is `s = 1 - x`).
    pub fn recursion_coeffs(&self, w: u32) -> ThreeTermCoefficients {
        let (v, n) = (w as f64, self.nf());
        let a = real_matrix(
            2,
            &[
                v * (v + n) * (v + n + 2.0)
                    / ((v + n + 1.0) * (2.0 * v + n + 2.0) * (2.0 * v + n + 3.0)),
                v / ((v + 1.0) * (v + n + 1.0) * (2.0 * v + n + 3.0)),
                0.0,
                v * (v + 2.0) * (v + n + 1.0)
                    / ((v + 1.0) * (2.0 * v + n + 3.0) * (2.0 * v + n + 4.0)),
            ],
        );
        let b11 = (v + 1.0) * (v + 1.0) * (v + 3.0)
            / ((v + 2.0) * (2.0 * v + n + 3.0) * (2.0 * v + n + 4.0))
            + 1.0 / ((v + 1.0) * (v + 2.0) * (v + n + 1.0) * (v + n + 2.0))
            + (v + n) * (v + n + 2.0) * (v + n + 2.0)
                / ((v + n + 1.0) * (2.0 * v + n + 2.0) * (2.0 * v + n + 3.0));
        let b22 = (v + 1.0) * (v + 3.0) * (v + 3.0)
            / ((v + 2.0) * (2.0 * v + n + 4.0) * (2.0 * v + n + 5.0))
            + (v + n + 1.0) * (v + n + 1.0) * (v + n + 3.0)
                / ((v + n + 2.0) * (2.0 * v + n + 3.0) * (2.0 * v + n + 4.0));
        let b = real_matrix(
            2,
            &[
                b11,
                (v + n + 3.0) / ((v + 2.0) * (v + n + 2.0) * (2.0 * v + n + 3.0)),
                (v + n + 1.0) / ((v + 1.0) * (v + n + 2.0) * (2.0 * v + n + 4.0)),
                b22,
            ],
        );
        let c = real_matrix(
            2,
            &[
                (v + 1.0) * (v + 3.0) * (v + n + 3.0)
                    / ((v + 2.0) * (2.0 * v + n + 3.0) * (2.0 * v + n + 4.0)),
                0.0,
                (v + 3.0) / ((v + 2.0) * (v + n + 3.0) * (2.0 * v + n + 4.0)),
                (v + 3.0) * (v + n + 2.0) * (v + n + 4.0)
                    / ((v + n + 3.0) * (2.0 * v + n + 4.0) * (2.0 * v + n + 5.0)),
            ],
        );
        ThreeTermCoefficients { a, b, c }
    }

    /// Assembles the full pre-sequence: seed `F_0`, base weight `W`,
    /// recursion coefficients, spectral map `s = 1 - x`.
    pub fn presequence(&self) -> PreSequence {
        let f0 = self.f_w(0);
        let f0_eval = f0.clone();
        let eval: MatrixFn = Arc::new(move |x| f0_eval.eval(x));
        let model = *self;
        let coeffs: CoeffFn = Arc::new(move |w| model.recursion_coeffs(w as u32));
        PreSequence::new(
            2,
            eval,
            Some(f0),
            coeffs,
            self.weight(),
            AffineMap {
                sigma: -1.0,
                tau: 1.0,
            },
        )
        .expect("model data is consistent")
    }

    /// The normalized polynomial `Q_w = F_w F_0^{-1}` in closed form:
    ///
    /// ```text
    /// Q_w = [ 3F2(...) + k_w 2F1(1-w, w+n+4; 4)      -k_w 2F1(1-w, w+n+4; 4) ]
    ///       [ 2F1(-w, w+n+4; 3) - t_w 3F2(...)        t_w 3F2(-w, w+n+4, s_w+1; 4, s_w) ]
    /// ```
    ///
    /// with `k_w = w(w+n+3) / (3(n+2))` and `t_w = s_w / (3(n+2))`.  The
    /// `(2,2)` prefactor is `s_w / (3(n+2))`, not the published
    /// `s_w / (n+2)`; the corrected value is forced by `Q_0 = I` and by the
    /// recursion.
    pub fn closed_form_q(&self, w: u32) -> MatrixPolynomial {
        let (wf, nf) = (w as f64, self.nf());
        let s = self.s_param(w);
        let k_w = wf * (wf + nf + 3.0) / (3.0 * (nf + 2.0));
        let t_w = s / (3.0 * (nf + 2.0));

        let mut e11 = series(&[-wf, wf + nf + 3.0, 2.0], &[3.0, 1.0]);
        let mut e12 = vec![0.0];
        if w >= 1 {
            // The 2F1(1-w, ...) factor carries a zero prefactor at w = 0;
            // skipping it avoids evaluating a non-terminating series.
            let tail = series(&[1.0 - wf, wf + nf + 4.0], &[4.0]);
            add_scaled(&mut e11, &tail, k_w);
            add_scaled(&mut e12, &tail, -k_w);
        }
        let mut e21 = series(&[-wf, wf + nf + 4.0], &[3.0]);
        let second = series(&[-wf, wf + nf + 4.0, s + 1.0], &[4.0, s]);
        add_scaled(&mut e21, &second, -t_w);
        let mut e22 = vec![0.0];
        add_scaled(&mut e22, &second, t_w);
        poly2(&e11, &e12, &e21, &e22)
    }

    /// Closed-form leading coefficients `(LC(F_w), LC(Q_w))`.
    ///
    /// `F_w` has degree `w + 1` and its leading coefficient vanishes except
    /// in the `(2,2)` entry,
    /// `(-1)^{w+1} (w+n+3)_{w+1} (c+w+1) / ((3)_{w+1} c)`.  `Q_w` has
    /// degree `w` with nonsingular lower-triangular leading coefficient;
    /// the `(2,1)` and `(2,2)` entries below correct the published ones
    /// (which carry a wrong factor `w(w-3)` and a spurious factor 3), as
    /// confirmed by the recursion.
    pub fn leading_coeffs(&self, w: u32) -> (CMatrix, CMatrix) {
        let (wf, nf) = (w as f64, self.nf());
        let c = self.c_param(w);
        let s = self.s_param(w);
        let sign = |k: u32| if k.is_multiple_of(2) { 1.0 } else { -1.0 };

        let lf22 = sign(w + 1) * pochhammer(wf + nf + 3.0, w + 1) * (c + wf + 1.0)
            / (pochhammer(3.0, w + 1) * c);
        let lc_f = real_matrix(2, &[0.0, 0.0, 0.0, lf22]);

        let lq11 = sign(w) * 2.0 * pochhammer(wf + nf + 3.0, w) / ((wf + 2.0) * pochhammer(1.0, w));
        let lq21 = sign(w + 1) * pochhammer(wf + nf + 4.0, w) * wf * (wf + 3.0)
            / (pochhammer(3.0, w + 1) * (nf + 2.0));
        let lq22 = sign(w) * pochhammer(wf + nf + 4.0, w) * (s + wf)
            / (3.0 * (nf + 2.0) * pochhammer(4.0, w));
        let lc_q = real_matrix(2, &[lq11, 0.0, lq21, lq22]);
        (lc_f, lc_q)
    }

    /// The right-acting operator
    ///
    /// ```text
    /// D = d^2 x(1-x) + d^1 diag(2 - (n+4) x, 2 - (n+3) x)
    ///     + (1/x) [ -1    1-x ]
    ///             [  1   -1+x ]
    /// ```
    ///
    /// with `F_w D = Lambda_w F_w`.  The zeroth-order coefficient has a
    /// pole at `x = 0` (where `det F_0` vanishes), so the operator is only
    /// available in sampled form; evaluation at `x = 0` yields non-finite
    /// entries, which downstream checks reject.
    pub fn operator_d(&self) -> SampledDiffOperator {
        let nf = self.nf();
        let a0: MatrixFn = Arc::new(move |x: f64| {
            real_matrix(2, &[-1.0 / x, (1.0 - x) / x, 1.0 / x, (-1.0 + x) / x])
        });
        let a1: MatrixFn = Arc::new(move |x: f64| {
            real_matrix(2, &[2.0 - (nf + 4.0) * x, 0.0, 0.0, 2.0 - (nf + 3.0) * x])
        });
        let a2: MatrixFn =
            Arc::new(move |x: f64| CMatrix::identity(2, 2) * cplx(x * (1.0 - x), 0.0));
        SampledDiffOperator::new(2, vec![a0, a1, a2]).expect("nonempty coefficients")
    }

    /// First-order coefficient of `D` as an exact polynomial.
    pub fn a1_poly(&self) -> MatrixPolynomial {
        let nf = self.nf();
        poly2(&[2.0, -(nf + 4.0)], &[0.0], &[0.0], &[2.0, -(nf + 3.0)])
    }

    /// The constants of the conjugated operator
    /// `Dtilde = F_0 D F_0^{-1} = d^2 x(1-x) + d^1 (Ctilde - x Utilde)
    /// - Vtilde`:
    ///
    /// ```text
    /// Ctilde = 1/(n+2) [ 2n+5   -1   ]     Utilde = [ n+4   0   ]
    ///                  [ -2n-3  4n+7 ],             [ -1    n+5 ],
    /// Vtilde = diag(0, n+2).
    /// ```
    pub fn tilde_constants(&self) -> HypergeometricConstants {
        let nf = self.nf();
        let c = real_matrix(
            2,
            &[
                (2.0 * nf + 5.0) / (nf + 2.0),
                -1.0 / (nf + 2.0),
                (-2.0 * nf - 3.0) / (nf + 2.0),
                (4.0 * nf + 7.0) / (nf + 2.0),
            ],
        );
        let u = real_matrix(2, &[nf + 4.0, 0.0, -1.0, nf + 5.0]);
        let v = real_matrix(2, &[0.0, 0.0, 0.0, nf + 2.0]);
        HypergeometricConstants { c, u, v }
    }

    /// The matrix eigenvalue
    /// `Lambda_w = diag(-w(w+n+3), -w(w+n+4) - (n+2))` shared by
    /// `F_w D = Lambda_w F_w` and `Q_w Dtilde = Lambda_w Q_w`.
    pub fn lambda(&self, w: u32) -> CMatrix {
        let (wf, nf) = (w as f64, self.nf());
        real_matrix(
            2,
            &[
                -wf * (wf + nf + 3.0),
                0.0,
                0.0,
                -wf * (wf + nf + 4.0) - (nf + 2.0),
            ],
        )
    }

    /// The published initial row vectors
    /// `(w/(3(n+2))) (w+n+3, -w-n-3)` and `(w/(3(n+2))) (-w-n-4, w+n+4)`.
    /// The actual rows of `Q_w(0)` are these plus the corresponding rows of
    /// the identity; the difference is reported as a discrepancy note by
    /// the verification driver rather than silently absorbed.
    pub fn printed_initial_vectors(&self, w: u32) -> (CVector, CVector) {
        let (wf, nf) = (w as f64, self.nf());
        let scale = wf / (3.0 * (nf + 2.0));
        let row1 = CVector::from_vec(vec![
            cplx(scale * (wf + nf + 3.0), 0.0),
            cplx(-scale * (wf + nf + 3.0), 0.0),
        ]);
        let row2 = CVector::from_vec(vec![
            cplx(-scale * (wf + nf + 4.0), 0.0),
            cplx(scale * (wf + nf + 4.0), 0.0),
        ]);
        (row1, row2)
    }

    /// Node count that makes every Gram integral in a run up to `w_max`
    /// exact: the worst integrand degree is `2 w_max + n + 4`, covered
    /// comfortably by `w_max + n + 8` nodes.
    pub fn default_nodes(&self, w_max: u32) -> usize {
        (w_max + self.n + 8) as usize
    }
}
