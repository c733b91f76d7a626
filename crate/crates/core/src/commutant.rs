//! Commuting space of a matrix weight and the irreducibility test.
//!
//! The (real) commuting space of a weight `W` on its support is
//!
//! ```text
//! C = { T complex N x N :  T W(x) = W(x) T^*  for all x }.
//! ```
//!
//! It always contains the real span of the identity; the weight is
//! irreducible - not equivalent to a direct sum of smaller weights - exactly
//! when that is all of it, i.e. when `dim_R C = 1`.  The constraint is
//! real-linear in the real and imaginary parts of `T`, so sampling it at
//! enough points turns membership into a real null-space computation.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::matpoly::{cplx, CMatrix};
use crate::weights::MatrixWeight;
use crate::Result;

/// Singular values below `COMMUTANT_SV_CUTOFF` times the largest singular
/// value are treated as zero when extracting the null space.
pub const COMMUTANT_SV_CUTOFF: f64 = 1e-10;

/// A real basis of the commuting space.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    /// Real dimension of the space.
    pub dimension: usize,
    /// Basis matrices `T_1, ..., T_dim` (orthonormal in the underlying real
    /// embedding before rescaling; each is rescaled by a real factor so its
    /// largest entry has modulus 1 and a positive leading component).
    pub basis: Vec<CMatrix>,
    /// Whether the identity matrix lies in the real span of the basis.
    pub contains_identity: bool,
    /// Singular values of the sampled constraint matrix, descending; the
    /// gap between positions `2N^2 - dim` and beyond shows how cleanly the
    /// null space separates.
    pub singular_values: Vec<f64>,
}

/// Result of the irreducibility decision.
#[derive(Debug, Clone)]
pub struct IrreducibilityReport {
    /// Real dimension of the commuting space.
    pub dimension: usize,
    /// True exactly when the dimension is 1 (the span of the identity).
    pub irreducible: bool,
    /// Whether the identity was confirmed inside the computed space.
    pub identity_in_span: bool,
}

/// Writes the real-linear constraint `T W - W T^* = 0` at the samples into
/// a real matrix acting on the `2 N^2` real unknowns `(Re T, Im T)`.
///
/// Row blocks are scaled by `1 / |W(x_k)|` so that no sample dominates; the
/// column for each unknown is obtained by probing the constraint with the
/// corresponding elementary matrix, which keeps the assembly independent of
/// any entry-order bookkeeping.
fn constraint_matrix(weight: &MatrixWeight, samples: &[f64]) -> DMatrix<f64> {
    let n = weight.size();
    let unknowns = 2 * n * n;
    let rows_per_sample = 2 * n * n; // real and imaginary part of each entry
    let mut out = DMatrix::<f64>::zeros(rows_per_sample * samples.len(), unknowns);
    for (k, &x) in samples.iter().enumerate() {
        let w = weight.evaluate(x);
        let scale = {
            let nrm = w.norm();
            if nrm > 0.0 {
                1.0 / nrm
            } else {
                1.0
            }
        };
        for col in 0..unknowns {
            // Elementary probe: unknown `col` set to 1, the rest 0.
            let mut t = CMatrix::zeros(n, n);
            let entry = col % (n * n);
            let (i, j) = (entry / n, entry % n);
            t[(i, j)] = if col < n * n {
                cplx(1.0, 0.0)
            } else {
                cplx(0.0, 1.0)
            };
            let residual = &t * &w - &w * t.adjoint();
            for r in 0..n {
                for c in 0..n {
                    let row0 = k * rows_per_sample + 2 * (r * n + c);
                    out[(row0, col)] = residual[(r, c)].re * scale;
                    out[(row0 + 1, col)] = residual[(r, c)].im * scale;
                }
            }
        }
    }
    out
}

/// Reconstructs `T` from a real null-space vector and rescales it
/// deterministically.
///
/// The commuting space is a *real* vector space: multiplying a member by a
/// non-real scalar generally leaves it.  The rescaling therefore uses only
/// real factors: divide by the modulus of the largest entry, then flip the
/// sign so that the dominant component (real part if it dominates,
/// imaginary part otherwise) of the first such entry is positive.  A
/// member proportional to the identity comes out exactly as the identity.
fn vector_to_matrix(v: &nalgebra::DVector<f64>, n: usize) -> CMatrix {
    let mut t = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] = cplx(v[i * n + j], v[n * n + i * n + j]);
        }
    }
    let mut best = cplx(0.0, 0.0);
    for z in t.iter() {
        if z.norm() > best.norm() * (1.0 + 1e-12) {
            best = *z;
        }
    }
    if best.norm() > 0.0 {
        let lead = if best.re.abs() >= best.im.abs() {
            best.re
        } else {
            best.im
        };
        t /= cplx(lead.signum() * best.norm(), 0.0);
    }
    t
}

/// Computes a real basis of the commuting space of `weight` from samples.
///
/// The constraint has `2 N^2` real unknowns, so at least `2 N^2 + 1` sample
/// points are required for the linear system to be meaningfully
/// overdetermined.  Samples should be interior points of the support where
/// the weight is finite.
pub fn commuting_space(weight: &MatrixWeight, samples: &[f64]) -> Result<CommutantBasis> {
    let n = weight.size();
    let required = 2 * n * n + 1;
    if samples.len() < required {
        return Err(Error::TooFewSamples {
            context: "commuting space".to_string(),
            required,
            got: samples.len(),
        });
    }
    let m = constraint_matrix(weight, samples);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^t");
    let max_sv = svd.singular_values.max();
    let mut basis = Vec::new();
    for (idx, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= COMMUTANT_SV_CUTOFF * max_sv {
            let row = v_t.row(idx).transpose();
            basis.push(vector_to_matrix(&row, n));
        }
    }
    // A rank-deficient-to-zero constraint matrix (all singular values zero)
    // would make every direction null; that only happens for W = 0, which
    // the PSD checks reject upstream.  Guard anyway.
    if max_sv == 0.0 {
        return Err(Error::InvalidParameter {
            context: "commuting space of an identically zero weight".to_string(),
        });
    }
    let dimension = basis.len();
    let contains_identity = identity_in_span(&basis, n);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(CommutantBasis {
        dimension,
        basis,
        contains_identity,
        singular_values,
    })
}

/// Projects the identity onto the real span of `basis` and checks the
/// projection reproduces it.
fn identity_in_span(basis: &[CMatrix], n: usize) -> bool {
    if basis.is_empty() {
        return false;
    }
    // Real inner product <A, B> = Re tr(A^* B) on the embedding; the basis
    // is orthogonal up to the rescaling in `vector_to_matrix`, so use
    // least squares on the real embedding instead of assuming orthogonality.
    let dim = 2 * n * n;
    let mut a = DMatrix::<f64>::zeros(dim, basis.len());
    for (col, t) in basis.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                a[(i * n + j, col)] = t[(i, j)].re;
                a[(n * n + i * n + j, col)] = t[(i, j)].im;
            }
        }
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(dim);
    for i in 0..n {
        rhs[i * n + i] = 1.0;
    }
    let svd = a.clone().svd(true, true);
    match svd.solve(&rhs, 1e-12) {
        Ok(coeffs) => {
            let residual = a * coeffs - rhs;
            residual.norm() < 1e-8 * (n as f64).sqrt()
        }
        Err(_) => false,
    }
}

/// Decides irreducibility of `weight`: irreducible exactly when the
/// commuting space is one-dimensional.
pub fn is_irreducible(weight: &MatrixWeight, samples: &[f64]) -> Result<IrreducibilityReport> {
    let basis = commuting_space(weight, samples)?;
    Ok(IrreducibilityReport {
        dimension: basis.dimension,
        irreducible: basis.dimension == 1,
        identity_in_span: basis.contains_identity,
    })
}
