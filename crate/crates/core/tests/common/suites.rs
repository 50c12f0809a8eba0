//! Property bodies shared by the property test targets and the acceptance
//! run, which replays them with a fixed seed.

use super::{domain, pi_op, poly1};
use nalgebra::DMatrix;
use pie_cert::pde::{dk_of_t, t_from_bc, taylor_matrix, BcSpec};
use pie_cert::pi::PiOp;
use pie_cert::poly::{Domain, Poly1};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const ALGEBRA_TOL: f64 = 1e-10;
pub const BIJECTION_TOL: f64 = 1e-9;

/// Runs `test` on `cases` deterministic draws from `strategy`.
pub fn replay<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let rng = TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, rng);
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

/// Three composable operators `m×k`, `k×l`, `l×n`.
pub fn chain() -> impl Strategy<Value = (PiOp, PiOp, PiOp)> {
    (domain(), 1usize..=2, 1usize..=2, 1usize..=2, 1usize..=2).prop_flat_map(|(d, m, k, l, n)| {
        (pi_op(d, m, k, 2, false), pi_op(d, k, l, 2, false), pi_op(d, l, n, 2, false))
    })
}

pub fn square_op() -> impl Strategy<Value = PiOp> {
    domain().prop_flat_map(|d| pi_op(d, 2, 2, 4, false))
}

pub fn pi3_pi2_pair() -> impl Strategy<Value = (PiOp, PiOp)> {
    domain().prop_flat_map(|d| (pi_op(d, 2, 2, 2, false), pi_op(d, 2, 2, 2, true)))
}

pub fn chain_with_input() -> impl Strategy<Value = ((PiOp, PiOp, PiOp), Vec<Poly1>)> {
    chain().prop_flat_map(|(p, q, s)| {
        let d = p.domain();
        let n = q.cols();
        (Just((p, q, s)), vec(poly1(d, 3), n))
    })
}

pub fn involution(p: PiOp) -> Result<(), TestCaseError> {
    prop_assert!(p.adjoint().adjoint().kernels_equal(&p, 1e-12));
    Ok(())
}

pub fn contravariance((p, q, _): (PiOp, PiOp, PiOp)) -> Result<(), TestCaseError> {
    let lhs = p.compose(&q).unwrap().adjoint();
    let rhs = q.adjoint().compose(&p.adjoint()).unwrap();
    prop_assert!(lhs.max_coeff_diff(&rhs).unwrap() <= ALGEBRA_TOL);
    Ok(())
}

pub fn associativity((p, q, s): (PiOp, PiOp, PiOp)) -> Result<(), TestCaseError> {
    let left = p.compose(&q).unwrap().compose(&s).unwrap();
    let right = p.compose(&q.compose(&s).unwrap()).unwrap();
    prop_assert!(left.max_coeff_diff(&right).unwrap() <= ALGEBRA_TOL);
    Ok(())
}

pub fn pi2_ideal((p, q): (PiOp, PiOp)) -> Result<(), TestCaseError> {
    prop_assert!(p.compose(&q).unwrap().is_pi2());
    prop_assert!(q.compose(&p).unwrap().is_pi2());
    Ok(())
}

pub fn apply_consistency(((p, q, _), x): ((PiOp, PiOp, PiOp), Vec<Poly1>)) -> Result<(), TestCaseError> {
    let direct = p.compose(&q).unwrap().apply(&x).unwrap();
    let nested = p.apply(&q.apply(&x).unwrap()).unwrap();
    let d = p.domain();
    for i in 0..20 {
        let s = d.a + d.length() * (i as f64 + 0.37) / 20.0;
        for (u, v) in direct.iter().zip(&nested) {
            prop_assert!((u.eval(s) - v.eval(s)).abs() <= ALGEBRA_TOL);
        }
    }
    Ok(())
}

/// Well-posed boundary conditions of order at most 4 on a random interval,
/// skipping those whose boundary matrix is nearly singular.
pub fn bc_strategy() -> impl Strategy<Value = BcSpec> {
    (1usize..=4, -1.0f64..0.5, 0.5f64..2.0)
        .prop_flat_map(|(n, a, len)| {
            let entries = vec(prop_oneof![Just(0.0), Just(1.0), -2.0f64..2.0], n * n);
            (Just(n), Just(Domain::new(a, a + len).unwrap()), entries.clone(), entries)
        })
        .prop_filter_map("ill-conditioned boundary conditions", |(n, d, na, nb)| {
            let na = DMatrix::from_row_slice(n, n, &na);
            let nb = DMatrix::from_row_slice(n, n, &nb);
            let m = &na + &nb * taylor_matrix(n, d.length());
            let sv = m.singular_values();
            if sv.min() < 1e-3 * sv.max() {
                return None;
            }
            BcSpec::new(na, nb, d).ok().filter(BcSpec::is_well_posed)
        })
}

pub fn bc_with_state() -> impl Strategy<Value = (BcSpec, Vec<f64>)> {
    (bc_strategy(), vec(-1.0f64..1.0, 1..=6))
}

fn nth_derivative(p: &Poly1, n: usize) -> Poly1 {
    (0..n).fold(p.clone(), |q, _| q.derivative())
}

fn coeff_err(p: &Poly1, q: &Poly1) -> f64 {
    let len = p.coeffs().len().max(q.coeffs().len());
    (0..len)
        .map(|i| (p.coeffs().get(i).unwrap_or(&0.0) - q.coeffs().get(i).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// `D^n T x = x`, `T D^n u = u`, boundary residuals of `Tx`, and `D^k T`
/// against differentiating `Tx`, relative to the coefficient scale of `Tx`.
pub fn bijection((bc, xc): (BcSpec, Vec<f64>)) -> Result<(), TestCaseError> {
    let d = bc.domain;
    let n = bc.n;
    let x = Poly1::new(xc, d);
    let t = t_from_bc(&bc).unwrap();
    let u = t.apply(std::slice::from_ref(&x)).unwrap().remove(0);
    let tol = BIJECTION_TOL * 1.0f64.max(u.max_abs_coeff());

    prop_assert!(coeff_err(&nth_derivative(&u, n), &x) <= tol);
    let back = t.apply(&[nth_derivative(&u, n)]).unwrap().remove(0);
    prop_assert!(coeff_err(&back, &u) <= tol);
    for r in bc.residuals(&u) {
        prop_assert!(r.abs() <= tol, "residual {r}");
    }
    for k in 0..=n {
        let dk = dk_of_t(&bc, k).unwrap().apply(std::slice::from_ref(&x)).unwrap().remove(0);
        let direct = nth_derivative(&u, k);
        for i in 0..20 {
            let s = d.a + d.length() * (i as f64 + 0.5) / 20.0;
            prop_assert!((dk.eval(s) - direct.eval(s)).abs() <= tol);
        }
    }
    Ok(())
}
