//! Randomized checks of the PI-operator algebra.

mod common;

use common::{adaptive_simpson, domain, pi_op, poly1, poly2, suites};
use pie_cert::galerkin::project;
use pie_cert::pi::PiOp;
use pie_cert::poly::Poly1;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn adjoint_is_an_involution(p in suites::square_op()) {
        suites::involution(p)?;
    }

    #[test]
    fn adjoint_reverses_composition(ops in suites::chain()) {
        suites::contravariance(ops)?;
    }

    #[test]
    fn composition_is_associative(ops in suites::chain()) {
        suites::associativity(ops)?;
    }

    #[test]
    fn pi2_is_an_ideal(pair in suites::pi3_pi2_pair()) {
        suites::pi2_ideal(pair)?;
    }

    #[test]
    fn poly_mul_commutes_and_associates(
        (p, q, r) in domain().prop_flat_map(|d| (poly2(d, 2), poly2(d, 2), poly2(d, 2)))
    ) {
        prop_assert!((&p * &q).approx_eq(&(&q * &p), 1e-12));
        prop_assert!((&(&p * &q) * &r).approx_eq(&(&p * &(&q * &r)), 1e-12));
    }

    #[test]
    fn theta_integral_matches_quadrature(
        (p, lo, hi) in domain().prop_flat_map(|d| (poly2(d, 3), poly1(d, 1), poly1(d, 1))),
        frac in 0.0f64..1.0,
    ) {
        let d = p.domain();
        let s = d.a + frac * d.length();
        let exact = p.integrate_theta(&lo, &hi).eval(s);
        let numeric = adaptive_simpson(&|t| p.eval(s, t), lo.eval(s), hi.eval(s), 1e-13);
        prop_assert!((exact - numeric).abs() <= 1e-10, "{exact} vs {numeric}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn apply_respects_composition(case in suites::chain_with_input()) {
        suites::apply_consistency(case)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn norm_bound_dominates_compressions(p in domain().prop_flat_map(|d| pi_op(d, 2, 2, 2, false))) {
        let bound = p.norm_bound();
        for n in [1, 4, 8, 16, 32] {
            let c = project(&p, n).unwrap();
            let sigma = c.matrix.singular_values().max();
            prop_assert!(sigma <= bound * (1.0 + 1e-12), "N = {n}: {sigma} > {bound}");
        }
    }
}

#[test]
fn identity_application_is_exact() {
    let d = pie_cert::poly::Domain::unit();
    let x = vec![Poly1::new(vec![1.0, -2.0, 3.0], d)];
    let y = PiOp::identity(1, d).apply(&x).unwrap();
    assert!(y[0].approx_eq(&x[0], 0.0));
}
