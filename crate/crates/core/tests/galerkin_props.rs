//! Properties of Galerkin compressions and inequality checks.

mod common;

use common::{domain, pi_op};
use pie_cert::basis::{gauss_on, OrthoBasis};
use pie_cert::galerkin::{check_op_ineq, min_eig, project, Verdict};
use pie_cert::pi::PiOp;
use proptest::prelude::*;

fn self_adjoint(rows: usize) -> impl Strategy<Value = PiOp> {
    domain().prop_flat_map(move |d| pi_op(d, rows, rows, 2, false)).prop_map(|p| p.plus_adjoint().unwrap())
}

/// `⟨x, P x⟩` for the lifted witness, by nested Gauss quadrature of the
/// kernels rather than through any compression matrix.
fn lifted_form(p: &PiOp, n: usize, coeffs: &[f64]) -> f64 {
    let d = p.domain();
    let basis = OrthoBasis::legendre(n, d.a, d.b).unwrap();
    let x = |c: usize, s: f64| basis.eval_expansion(&coeffs[c * n..(c + 1) * n], s);
    let q = 2 * n + 8;
    let (outer, wo) = gauss_on(q, d.a, d.b);
    let mut total = 0.0;
    for (&s, &ws) in outer.iter().zip(&wo) {
        let (lo, wl) = gauss_on(q, d.a, s);
        let (hi, wh) = gauss_on(q, s, d.b);
        for i in 0..p.rows() {
            let mut px = 0.0;
            for j in 0..p.cols() {
                px += p.r0(i, j).eval(s) * x(j, s);
                px += lo.iter().zip(&wl).map(|(&t, &w)| w * p.r1(i, j).eval(s, t) * x(j, t)).sum::<f64>();
                px += hi.iter().zip(&wh).map(|(&t, &w)| w * p.r2(i, j).eval(s, t) * x(j, t)).sum::<f64>();
            }
            total += ws * x(i, s) * px;
        }
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn smallest_eigenvalue_decreases_with_resolution(p in self_adjoint(2)) {
        let mut prev = f64::INFINITY;
        for n in [1, 2, 4, 8, 16] {
            let (m, _) = min_eig(&project(&p, n).unwrap().symmetric());
            prop_assert!(m <= prev + 1e-10 * prev.abs().max(1.0), "N = {n}: {m} > {prev}");
            prev = m;
        }
    }

    #[test]
    fn adjoint_compresses_to_transpose(p in domain().prop_flat_map(|d| pi_op(d, 2, 2, 3, false))) {
        for n in [3, 8] {
            let a = project(&p.adjoint(), n).unwrap().matrix;
            let b = project(&p, n).unwrap().matrix.transpose();
            prop_assert!((a - b).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn violation_witnesses_are_sound(p in self_adjoint(2)) {
        let zero = PiOp::zero(2, 2, p.domain());
        let v = check_op_ineq(&p, &zero, &[2, 4, 8], 1e-8).unwrap();
        if v.verdict == Verdict::Violated {
            let w = v.witness.unwrap();
            let q = lifted_form(&p, w.n, &w.coeffs);
            prop_assert!(q < 0.0, "lifted form {q}");
            prop_assert!((q - w.value).abs() <= 1e-8 * w.value.abs().max(1.0), "{q} vs {}", w.value);
        } else {
            prop_assert!(v.witness.is_none());
        }
    }
}

#[test]
fn indefinite_operators_do_produce_witnesses() {
    let d = pie_cert::poly::Domain::unit();
    let p = PiOp::identity(1, d).scale(-1.0);
    let v = check_op_ineq(&p, &PiOp::zero(1, 1, d), &[4, 8], 1e-8).unwrap();
    assert_eq!(v.verdict, Verdict::Violated);
    let w = v.witness.unwrap();
    let q = lifted_form(&p, w.n, &w.coeffs);
    assert!((q + 1.0).abs() < 1e-12, "{q} {w:?}");
}
