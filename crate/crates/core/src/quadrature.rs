//! Gauss-Legendre quadrature on finite intervals.
//!
//! Nodes are the roots of the Legendre polynomial `P_m`, found by Newton
//! iteration from the Chebyshev-point initial guesses; weights follow from
//! the standard formula `w_i = 2 / ((1 - x_i^2) P_m'(x_i)^2)`.  An `m`-point
//! rule integrates polynomials up to degree `2m - 1` exactly, which lets the
//! rest of the crate evaluate inner products of matrix polynomials against
//! polynomial weights without truncation error.

use crate::error::Error;
use crate::matpoly::{cplx, CMatrix, MatrixPolynomial};
use crate::weights::MatrixWeight;
use crate::Result;

/// Newton iterations stop when the update falls below this absolute size.
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// An `m`-point quadrature rule on `[a, b]` with nodes in ascending order.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a: f64,
    b: f64,
}

/// Evaluates `(P_m(x), P_m'(x))` by the three-term recursion.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // P_m'(x) = m (x P_m - P_{m-1}) / (x^2 - 1)
    let dp = (m as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

impl QuadratureRule {
    /// Builds the `m`-point Gauss-Legendre rule on `[a, b]`.
    pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyRule);
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidInterval { a, b });
        }
        let mut nodes = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        // i = m, m-1, ..., 1 yields ascending roots on [-1, 1].
        for i in (1..=m).rev() {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
            for _ in 0..NEWTON_MAX_ITER {
                let (p, d) = legendre_with_derivative(m, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < NEWTON_TOL {
                    break;
                }
            }
            // One clean-up step so the weight uses the converged node.
            let (p, d) = legendre_with_derivative(m, x);
            x -= p / d;
            let dp = legendre_with_derivative(m, x).1;
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes.push(0.5 * (b - a) * x + 0.5 * (a + b));
            weights.push(0.5 * (b - a) * w);
        }
        Ok(QuadratureRule {
            nodes,
            weights,
            a,
            b,
        })
    }

    /// Quadrature nodes in ascending order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights matching [`nodes`](Self::nodes).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The integration interval `(a, b)`.
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes (never, for a constructed rule).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest polynomial degree integrated exactly: `2m - 1`.
    pub fn exactness_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// Integrates a scalar function (summed in ascending node order).
    pub fn integrate_scalar(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x);
        }
        acc
    }
}

/// Integrates a matrix-valued function over the rule's interval.  Terms are
/// accumulated in ascending node order, so the result is bitwise
/// reproducible across runs.
pub fn integrate_matrix(f: impl Fn(f64) -> CMatrix, rule: &QuadratureRule) -> Result<CMatrix> {
    let first = f(rule.nodes[0]);
    let (rows, cols) = (first.nrows(), first.ncols());
    let mut acc = first * cplx(rule.weights[0], 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights).skip(1) {
        let v = f(x);
        if v.nrows() != rows || v.ncols() != cols {
            return Err(Error::SizeMismatch {
                expected: rows,
                got: v.nrows(),
            });
        }
        acc += v * cplx(w, 0.0);
    }
    if !crate::matpoly::is_finite(&acc) {
        return Err(Error::NonFinite {
            context: "matrix quadrature".to_string(),
        });
    }
    Ok(acc)
}

/// Sesquilinear matrix inner product `(P, Q) = integral of P(x) W(x) Q(x)^*`
/// over the rule's interval.  The rule must be exact to
/// `deg P + deg Q + deg W` when `W` is polynomial; callers size it
/// accordingly.
pub fn inner_product(
    p: &MatrixPolynomial,
    q: &MatrixPolynomial,
    w: &MatrixWeight,
    rule: &QuadratureRule,
) -> Result<CMatrix> {
    if p.size() != w.size() {
        return Err(Error::SizeMismatch {
            expected: w.size(),
            got: p.size(),
        });
    }
    if q.size() != w.size() {
        return Err(Error::SizeMismatch {
            expected: w.size(),
            got: q.size(),
        });
    }
    integrate_matrix(
        |x| {
            let qe = q.eval(x);
            p.eval(x) * w.evaluate(x) * qe.adjoint()
        },
        rule,
    )
}
