//! Acceptance suite: every numerical claim the crate makes about the
//! built-in model, held to a pinned threshold.  Each test prints one
//! summary line (`criterion k (<name>): PASS/FAIL (...)`) so a full run
//! doubles as a human-readable report (`cargo test --test acceptance --
//! --nocapture`).

use std::sync::Arc;

use mopkit_core::checks::{verify, CheckKind, VerifyOptions};
use mopkit_core::commutant::commuting_space;
use mopkit_core::cp2::Cp2Model;
use mopkit_core::diffop::{
    check_eigenfunction, check_eigenfunction_sampled, extract_hyper_constants, RightDiffOperator,
};
use mopkit_core::matpoly::{cplx, real_matrix, relative_residual, CMatrix, MatrixPolynomial};
use mopkit_core::presequence::{
    build_q, gram_matrix, monic_normalize, recursion_from_moments, verify_factorization,
};
use mopkit_core::quadrature::QuadratureRule;
use mopkit_core::report::CheckStatus;
use mopkit_core::weights::{MatrixFn, MatrixWeight};

const MODEL_NS: [u32; 4] = [0, 1, 2, 5];

fn interior_grid(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| k as f64 / (count as f64 + 1.0))
        .collect()
}

fn band_grid(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count as f64 - 1.0))
        .collect()
}

fn report_line(index: usize, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {index} ({name}): {verdict} ({detail})");
}

/// Degree law, nonsingular leading coefficients, and the factorization
/// `F_w = Q_w F_0` for every parameter set.
#[test]
fn criterion_01_normalization() {
    const TOL: f64 = 1e-9;
    let samples = interior_grid(20);
    let mut worst = 0.0_f64;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let ps = model.presequence();
        let qs = build_q(&ps, 8).expect("recursion builds");
        for (w, q) in qs.iter().enumerate() {
            assert_eq!(q.degree(), w, "deg Q_{w} at n={n}");
            let lc = q.leading_coefficient().expect("nonzero polynomial");
            assert!(lc.nonsingular, "LC(Q_{w}) nonsingular at n={n}");
        }
        let fs: Vec<MatrixPolynomial> = (0..=8).map(|w| model.f_w(w)).collect();
        let outcome = verify_factorization(&ps, &qs, &|w, x| fs[w].eval(x), &samples, TOL)
            .expect("factorization check runs");
        worst = worst.max(outcome.max_residual);
    }
    let pass = worst <= TOL;
    report_line(
        1,
        "normalization",
        pass,
        &format!("max residual {worst:.3e}, threshold {TOL:.1e}, n in {MODEL_NS:?}, w <= 8"),
    );
    assert!(pass);
}

/// Orthogonality at both levels: `F_w` under `W` and `Q_w` under
/// `W' = F_0 W F_0^*`, with positive-definite squared norms.
#[test]
fn criterion_02_orthogonality() {
    const TOL: f64 = 1e-10;
    let mut worst_ratio = 0.0_f64;
    let mut min_eig = f64::INFINITY;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let ps = model.presequence();
        // Closed-form coefficients for both families: the Gram floor then
        // reflects only per-coefficient rounding, not error accumulated by
        // the recursion build (which the factorization and moment-oracle
        // criteria pin against these same polynomials).
        let qs: Vec<MatrixPolynomial> = (0..=8).map(|w| model.closed_form_q(w)).collect();
        let fs: Vec<MatrixPolynomial> = (0..=8).map(|w| model.f_w(w)).collect();
        let rule =
            QuadratureRule::gauss_legendre(model.default_nodes(8), 0.0, 1.0).expect("rule builds");
        let w_prime = ps.conjugated_weight();
        for (polys, weight) in [(&fs, ps.weight()), (&qs, &w_prime)] {
            let gram = gram_matrix(polys, weight, &rule).expect("gram assembles");
            worst_ratio = worst_ratio.max(gram.max_offdiagonal_ratio());
            min_eig = min_eig.min(
                gram.diagonal_min_eigenvalues()
                    .into_iter()
                    .fold(f64::INFINITY, f64::min),
            );
        }
    }
    let pass = worst_ratio <= TOL && min_eig > 0.0;
    report_line(
        2,
        "orthogonality",
        pass,
        &format!(
            "max off-diagonal ratio {worst_ratio:.3e}, threshold {TOL:.1e}, \
             smallest diagonal eigenvalue {min_eig:.3e}"
        ),
    );
    assert!(pass);
}

/// The three-term recursion `(1-x) F_w = A_w F_{w-1} + B_w F_w +
/// C_w F_{w+1}` with the closed-form coefficients.
#[test]
fn criterion_03_recursion() {
    const TOL: f64 = 1e-9;
    let mut worst = 0.0_f64;
    let mut isolation_note = String::new();
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let mut opts = VerifyOptions::new(8);
        opts.checks = Some(vec![CheckKind::Recursion]);
        let report = verify(&model, &opts).expect("verify runs");
        let check = report
            .checks
            .iter()
            .find(|c| c.name == "recursion")
            .expect("recursion check present");
        assert_eq!(check.status, CheckStatus::Pass, "n={n}: {:?}", check.notes);
        worst = worst.max(check.residual.expect("residual recorded"));
        isolation_note = check.notes.first().cloned().unwrap_or_default();
    }
    // The report isolates the worst coefficient entry even on success.
    assert!(isolation_note.contains("entry"), "{isolation_note}");
    let pass = worst <= TOL;
    report_line(
        3,
        "recursion",
        pass,
        &format!("max residual {worst:.3e}, threshold {TOL:.1e}, {isolation_note}"),
    );
    assert!(pass);
}

/// Conjugation constants: the hypergeometric data of
/// `F_0 D F_0^{-1}` recovered from samples matches the closed forms
/// entrywise.
#[test]
fn criterion_04_conjugation_constants() {
    const TOL: f64 = 1e-9;
    let samples = interior_grid(9);
    let mut worst = 0.0_f64;
    let mut worst_structure = 0.0_f64;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let psi = model.f_w(0);
        let a1_poly = model.a1_poly();
        let a1: MatrixFn = Arc::new(move |x| a1_poly.eval(x));
        let d = model.operator_d();
        let a0 = d.coefficient(0).clone();
        let extracted = extract_hyper_constants(&psi, &a1, &a0, &samples, TOL)
            .expect("conjugated operator is hypergeometric");
        // Affinity of the first-order data and constancy of the
        // zeroth-order data are held to the same tolerance.
        worst_structure = worst_structure
            .max(extracted.affine_residual)
            .max(extracted.constant_residual);
        let got = extracted.constants;
        let want = model.tilde_constants();
        for (g, w) in [(&got.c, &want.c), (&got.u, &want.u), (&got.v, &want.v)] {
            let entry_diff = (g - w).iter().map(|z| z.norm()).fold(0.0, f64::max);
            worst = worst.max(entry_diff);
        }
    }
    let pass = worst <= TOL && worst_structure <= TOL;
    report_line(
        4,
        "conjugation constants",
        pass,
        &format!(
            "max entry deviation {worst:.3e}, structure residual {worst_structure:.3e}, \
             threshold {TOL:.1e}, n in {MODEL_NS:?}"
        ),
    );
    assert!(pass);
}

/// Eigenfunction identities on both sides of the conjugation:
/// `Q_w Dtilde = Lambda_w Q_w` (polynomial identity) and
/// `F_w D = Lambda_w F_w` sampled away from the coefficient pole.
#[test]
fn criterion_05_eigenfunctions() {
    const Q_TOL: f64 = 1e-9;
    const F_TOL: f64 = 1e-8;
    let mut worst_q = 0.0_f64;
    let mut worst_f = 0.0_f64;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let qs: Vec<MatrixPolynomial> = (0..=8).map(|w| model.closed_form_q(w)).collect();
        let fs: Vec<MatrixPolynomial> = (0..=8).map(|w| model.f_w(w)).collect();
        let lambdas: Vec<CMatrix> = (0..=8).map(|w| model.lambda(w)).collect();
        let d_tilde = model
            .tilde_constants()
            .operator()
            .expect("scalar top order");
        let q_report = check_eigenfunction(&d_tilde, &qs, &lambdas, &interior_grid(20), Q_TOL)
            .expect("check runs");
        worst_q = worst_q.max(q_report.max_residual);
        let f_report = check_eigenfunction_sampled(
            &model.operator_d(),
            &fs,
            &lambdas,
            &band_grid(20, 0.05, 0.95),
            F_TOL,
        )
        .expect("check runs");
        worst_f = worst_f.max(f_report.max_residual);
    }
    let pass = worst_q <= Q_TOL && worst_f <= F_TOL;
    report_line(
        5,
        "eigenfunctions",
        pass,
        &format!(
            "Q-side residual {worst_q:.3e} (threshold {Q_TOL:.1e}), \
             F-side residual {worst_f:.3e} (threshold {F_TOL:.1e})"
        ),
    );
    assert!(pass);
}

/// Closed-form leading coefficients: `LC(F_w)` is zero outside the (2,2)
/// entry and matches its formula; `LC(Q_w)` matches its formula and is
/// nonsingular.
#[test]
fn criterion_06_leading_coefficients() {
    const TOL: f64 = 1e-10;
    let mut worst = 0.0_f64;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        for w in 0..=6 {
            let (lf_closed, lq_closed) = model.leading_coeffs(w);
            let lf = model.f_w(w).leading_coefficient().expect("nonzero");
            assert_eq!(lf.degree, w as usize + 1);
            for (i, j) in [(0, 0), (0, 1), (1, 0)] {
                assert!(
                    lf.matrix[(i, j)].norm() <= TOL,
                    "LC(F_{w})[{i},{j}] at n={n}"
                );
            }
            let lq = model
                .closed_form_q(w)
                .leading_coefficient()
                .expect("nonzero");
            assert_eq!(lq.degree, w as usize);
            assert!(lq.nonsingular, "LC(Q_{w}) nonsingular at n={n}");
            worst = worst
                .max(relative_residual(&lf.matrix, &lf_closed))
                .max(relative_residual(&lq.matrix, &lq_closed));
        }
    }
    let pass = worst <= TOL;
    report_line(
        6,
        "leading coefficients",
        pass,
        &format!("max residual {worst:.3e}, threshold {TOL:.1e}, w <= 6"),
    );
    assert!(pass);
}

/// Irreducibility: the commuting space of `W'` is one-dimensional and
/// spanned by the identity; a reducible diagonal control weight yields
/// dimension 2.
#[test]
fn criterion_07_irreducibility() {
    let samples = interior_grid(11);
    let mut dims = Vec::new();
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let w_prime = model.presequence().conjugated_weight();
        let basis = commuting_space(&w_prime, &samples).expect("commutant computes");
        dims.push(basis.dimension);
        assert!(basis.contains_identity, "identity in span at n={n}");
        let identity = CMatrix::identity(2, 2);
        assert!(
            relative_residual(&basis.basis[0], &identity) < 1e-8,
            "basis element is the identity at n={n}"
        );
    }
    let control: MatrixFn = Arc::new(|x| real_matrix(2, &[x, 0.0, 0.0, x * x]));
    let control_weight = MatrixWeight::polynomial(2, (0.0, 1.0), control, 2);
    let control_basis = commuting_space(&control_weight, &samples).expect("commutant computes");
    let pass = dims.iter().all(|&d| d == 1) && control_basis.dimension == 2;
    report_line(
        7,
        "irreducibility",
        pass,
        &format!(
            "model commutant dimensions {dims:?} (identity basis), \
             reducible control dimension {}",
            control_basis.dimension
        ),
    );
    assert!(pass);
}

/// Matrix hypergeometric rows: power series seeded at `Q_w(0)` reproduce
/// the rows of `Q_w`, solve the second-order equation, and the offset
/// against the closed-form initial vectors is detected and reported.
#[test]
fn criterion_08_hypergeometric_rows() {
    const TOL: f64 = 1e-9;
    let mut worst = 0.0_f64;
    let mut discrepancy_reported = true;
    let mut offset_detected = true;
    for n in MODEL_NS {
        let model = Cp2Model::new(n);
        let mut opts = VerifyOptions::new(5);
        opts.checks = Some(vec![CheckKind::HyperRows]);
        let report = verify(&model, &opts).expect("verify runs");
        let check = report
            .checks
            .iter()
            .find(|c| c.name == "hyper-rows")
            .expect("hyper-rows check present");
        assert_eq!(check.status, CheckStatus::Pass, "n={n}: {:?}", check.notes);
        worst = worst.max(check.residual.expect("residual recorded"));
        discrepancy_reported &= report
            .discrepancies
            .iter()
            .any(|d| d.contains("initial vectors"));

        // The offset itself: Q_w(0) minus the closed-form vectors is the
        // identity, not zero.
        for w in 1..=5 {
            let q0 = model.closed_form_q(w).eval(0.0);
            let (r1, r2) = model.printed_initial_vectors(w);
            let mut diff = q0.clone();
            diff[(0, 0)] -= r1[0];
            diff[(0, 1)] -= r1[1];
            diff[(1, 0)] -= r2[0];
            diff[(1, 1)] -= r2[1];
            offset_detected &= relative_residual(&diff, &CMatrix::identity(2, 2)) < 1e-12;
        }
    }
    let pass = worst <= TOL && discrepancy_reported && offset_detected;
    report_line(
        8,
        "hypergeometric rows",
        pass,
        &format!(
            "max residual {worst:.3e}, threshold {TOL:.1e}, w <= 5; \
             initial-vector offset detected: {offset_detected}, reported: {discrepancy_reported}"
        ),
    );
    assert!(pass);
}

/// Moment oracle: the monic normalization of the recursion output equals
/// the monic sequence built directly from moments of `W'`.
#[test]
fn criterion_09_moment_oracle() {
    const TOL: f64 = 1e-8;
    let samples = interior_grid(20);
    let mut worst = 0.0_f64;
    for n in [0u32, 1] {
        let model = Cp2Model::new(n);
        let ps = model.presequence();
        let qs = build_q(&ps, 6).expect("recursion builds");
        let (monic, _) = monic_normalize(&qs).expect("nonsingular leading coefficients");
        let w_prime = ps.conjugated_weight();
        let rule = QuadratureRule::gauss_legendre(24, 0.0, 1.0).expect("rule builds");
        let oracle = recursion_from_moments(&w_prime, 6, &rule).expect("moments recursion");
        for (w, p) in monic.iter().enumerate() {
            for &x in &samples {
                worst = worst.max(relative_residual(&p.eval(x), &oracle.polys[w].eval(x)));
            }
        }
    }
    let pass = worst <= TOL;
    report_line(
        9,
        "moment oracle",
        pass,
        &format!("max deviation {worst:.3e}, threshold {TOL:.1e}, n in [0, 1], w <= 6"),
    );
    assert!(pass);
}

/// Scalar control: the 1x1 pipeline reproduces monic Legendre on [-1, 1]
/// (zero B coefficients, A_1 = 1/3) and its operator eigenfunction check.
#[test]
fn criterion_10_scalar_control() {
    const COEFF_TOL: f64 = 1e-12;
    const EIGEN_TOL: f64 = 1e-10;
    let weight = MatrixWeight::polynomial(
        1,
        (-1.0, 1.0),
        Arc::new(|_| CMatrix::from_element(1, 1, cplx(1.0, 0.0))),
        0,
    );
    let rule = QuadratureRule::gauss_legendre(16, -1.0, 1.0).expect("rule builds");
    let out = recursion_from_moments(&weight, 8, &rule).expect("moments recursion");
    let max_b = out
        .b_tilde
        .iter()
        .map(|b| b[(0, 0)].norm())
        .fold(0.0, f64::max);
    let a1_dev = (out.a_tilde[0][(0, 0)].re - 1.0 / 3.0).abs();

    // (1 - x^2) y'' - 2 x y' = -n (n + 1) y.
    let a2 = MatrixPolynomial::from_coeffs(vec![
        CMatrix::from_element(1, 1, cplx(1.0, 0.0)),
        CMatrix::zeros(1, 1),
        CMatrix::from_element(1, 1, cplx(-1.0, 0.0)),
    ])
    .expect("valid coefficients");
    let a1 = MatrixPolynomial::from_coeffs(vec![
        CMatrix::zeros(1, 1),
        CMatrix::from_element(1, 1, cplx(-2.0, 0.0)),
    ])
    .expect("valid coefficients");
    let d =
        RightDiffOperator::new(vec![MatrixPolynomial::zero(1), a1, a2]).expect("valid operator");
    let lambdas: Vec<CMatrix> = (0..out.polys.len())
        .map(|k| CMatrix::from_element(1, 1, cplx(-(k as f64) * (k as f64 + 1.0), 0.0)))
        .collect();
    let eigen = check_eigenfunction(
        &d,
        &out.polys,
        &lambdas,
        &band_grid(15, -0.9, 0.9),
        EIGEN_TOL,
    )
    .expect("check runs");

    let pass = max_b <= COEFF_TOL && a1_dev <= COEFF_TOL && eigen.pass;
    report_line(
        10,
        "scalar control",
        pass,
        &format!(
            "max |B| {max_b:.3e}, |A_1 - 1/3| {a1_dev:.3e} (threshold {COEFF_TOL:.1e}), \
             eigen residual {:.3e} (threshold {EIGEN_TOL:.1e})",
            eigen.max_residual
        ),
    );
    assert!(pass);
}
