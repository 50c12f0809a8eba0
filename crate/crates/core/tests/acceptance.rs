//! Acceptance run: one PASS/FAIL line per criterion, each with its time
//! budget. Runs without the libtest harness so the lines always print.

mod common;

use common::suites::{self, replay};
use nalgebra::DMatrix;
use pie_cert::certify::{
    conditions_for, table_row, verify_candidate, Candidate, CertOptions, CertVerdict, Direction, Family, Form, Kind,
    Notion, Variant,
};
use pie_cert::galerkin::{pencil_spectrum, project};
use pie_cert::pde::{assemble_pie, heat_system, t_from_bc, wave_system, BcSpec, PieSystem};
use pie_cert::pi::PiOp;
use pie_cert::poly::{Domain, Poly2};
use pie_cert::simulate::{empirical_classify, integrate_with, ClassifyOptions, SimOptions};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

const KERNEL_TOL: f64 = 1e-12;
const PI2: f64 = PI * PI;

fn unit() -> Domain {
    Domain::unit()
}

fn p2(rows: Vec<Vec<f64>>) -> Poly2 {
    Poly2::from_rows(rows, unit())
}

/// `θ(s−1)` below the diagonal, `s(θ−1)` above.
fn t_heat_expected() -> PiOp {
    PiOp::kernel(p2(vec![vec![0.0, -1.0], vec![0.0, 1.0]]), p2(vec![vec![0.0], vec![-1.0, 1.0]])).unwrap()
}

/// `−θ` below the diagonal, `−s` above.
fn t0_expected() -> PiOp {
    PiOp::kernel(Poly2::theta(unit()).scale(-1.0), Poly2::s(unit()).scale(-1.0)).unwrap()
}

fn wave_bc() -> BcSpec {
    let na = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let nb = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    BcSpec::new(na, nb, unit()).unwrap()
}

fn heat(lambda: f64) -> PieSystem {
    assemble_pie(&heat_system(lambda)).unwrap()
}

fn heat_kernels() {
    let t = t_from_bc(&BcSpec::dirichlet(unit())).unwrap();
    let err = t.max_coeff_diff(&t_heat_expected()).unwrap();
    assert!(err <= KERNEL_TOL, "coefficient error {err:e}");
}

fn wave_kernels() {
    let t = t_from_bc(&wave_bc()).unwrap();
    let err = t.max_coeff_diff(&t0_expected()).unwrap();
    assert!(err <= KERNEL_TOL, "coefficient error {err:e}");
}

fn factorizations() {
    let r = PiOp::kernel(Poly2::zero(unit()), Poly2::constant(-1.0, unit())).unwrap();
    let rr = r.adjoint().compose(&r).unwrap().scale(-1.0);
    assert!(rr.kernels_equal(&t0_expected(), KERNEL_TOL), "-R*R differs from T0");
    let m = PiOp::kernel(Poly2::theta(unit()), p2(vec![vec![-1.0, 1.0]])).unwrap();
    let mm = m.adjoint().compose(&m).unwrap().scale(-1.0);
    assert!(mm.kernels_equal(&t_heat_expected(), KERNEL_TOL), "-M*M differs from T");
}

fn wave_certificate() {
    let sys = assemble_pie(&wave_system()).unwrap();
    let cand = Candidate::new("energy", Form::Q, "blockdiag(I(1), -I(1))").unwrap();
    let q = cand.operator(&sys, &Default::default()).unwrap();
    assert!(q.compose(&sys.a).unwrap().plus_adjoint().unwrap().is_zero(), "QA + A*Q* is not symbolically zero");

    let rep = verify_candidate(&sys, Notion::lyapunov(Direction::Pie2Pde), &cand, &CertOptions::default()).unwrap();
    assert_eq!(rep.verdict, CertVerdict::CertifiedEvidence);
    let neg = rep.conditions.iter().find(|c| c.condition.kind == Kind::Negativity).unwrap();
    assert!(neg.exact, "negativity not closed exactly");
    let floor = 1.0f64.min(1.0 / t_from_bc(&wave_bc()).unwrap().norm_bound());
    let eps = rep.epsilon.unwrap();
    assert!(eps >= floor, "ε* = {eps} < {floor}");

    let v = q.compose(&sys.t).unwrap();
    let n = 16;
    let x0: Vec<f64> = (0..sys.dim() * n).map(|i| ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5).collect();
    let opts = SimOptions { lyapunov: Some(v), rtol: 1e-11, ..Default::default() };
    let tr = integrate_with(&sys, &x0, 10.0, n, &opts).unwrap();
    let vals = tr.v_values.unwrap();
    let drift = vals.iter().map(|e| (e - vals[0]).abs()).fold(0.0, f64::max) / vals[0].abs();
    assert!(drift <= 1e-6, "relative drift of V {drift:e}");
}

fn heat_threshold() {
    let notion = Notion::exponential(Direction::Pde, Variant::IdentityNegativity);
    let cand = Candidate::new("identity", Form::P, "I").unwrap();
    let opts = CertOptions::default();
    let mut alpha9 = None;
    for (lambda, want) in [
        (0.0, CertVerdict::CertifiedEvidence),
        (5.0, CertVerdict::CertifiedEvidence),
        (9.0, CertVerdict::CertifiedEvidence),
        (11.0, CertVerdict::Refuted),
    ] {
        let rep = verify_candidate(&heat(lambda), notion, &cand, &opts).unwrap();
        assert_eq!(rep.verdict, want, "λ = {lambda}");
        if lambda == 9.0 {
            alpha9 = rep.alpha;
        }
    }
    let alpha = alpha9.unwrap();
    let want = 2.0 * (PI2 - 9.0);
    assert!((alpha - want).abs() <= 0.05 * want, "α* = {alpha}, expected {want}");

    let rightmost = |lambda: f64| pencil_spectrum(&heat(lambda), 16).unwrap()[0].re;
    let (mut lo, mut hi) = (9.0, 11.0);
    assert!(rightmost(lo) < 0.0 && rightmost(hi) > 0.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if rightmost(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    assert!((crossing - PI2).abs() <= 0.01 * PI2, "crossing at λ = {crossing}");
}

fn spectrum() {
    let re = pencil_spectrum(&heat(0.0), 16).unwrap()[0].re;
    assert!((re + PI2).abs() <= 1e-3 * PI2, "rightmost eigenvalue {re}");
    let c = project(&t_heat_expected(), 32).unwrap();
    let mut eig: Vec<f64> = c.symmetric().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    for k in 1..=5 {
        let want = -1.0 / ((k * k) as f64 * PI2);
        let got = eig[k - 1];
        assert!((got - want).abs() <= 1e-4 * want.abs(), "k = {k}: {got} vs {want}");
    }
}

fn algebra_suite() {
    let cases = 200;
    let runs = [
        ("involution", replay(cases, suites::square_op(), suites::involution)),
        ("contravariance", replay(cases, suites::chain(), suites::contravariance)),
        ("associativity", replay(cases, suites::chain(), suites::associativity)),
        ("Π2 closure", replay(cases, suites::pi3_pi2_pair(), suites::pi2_ideal)),
        ("apply consistency", replay(cases, suites::chain_with_input(), suites::apply_consistency)),
    ];
    for (name, r) in runs {
        if let Err(e) = r {
            panic!("{name}: {e}");
        }
    }
}

fn bijection_suite() {
    replay(100, suites::bc_with_state(), suites::bijection).unwrap_or_else(|e| panic!("{e}"));
}

fn table_conformance() {
    let table = common::condition_table();
    assert_eq!(table.len(), Notion::all().len());
    for (notion, row) in table {
        assert_eq!(table_row(&conditions_for(notion, Form::Q).unwrap()), row, "{notion}");
    }
}

fn empirical_matrix() {
    let holding = |sys: &PieSystem, t_end: f64| -> Vec<String> {
        let opts = ClassifyOptions { t_end, ..Default::default() };
        let r = empirical_classify(sys, &opts).unwrap();
        r.estimates.iter().filter(|e| e.holds).map(|e| e.label()).collect()
    };
    let families = [Family::Lyapunov, Family::Exponential, Family::FiniteEnergy];
    let stable = heat(5.0);
    let r = empirical_classify(&stable, &ClassifyOptions::default()).unwrap();
    for f in families {
        for d in [Direction::Pie2Pde, Direction::Pie, Direction::Pde] {
            assert!(r.holds(f, d), "heat λ = 5: {f:?} {d:?} not flagged");
        }
        assert!(!r.holds(f, Direction::Pde2Pie), "heat λ = 5: {f:?} pde2pie flagged");
    }
    let wave = assemble_pie(&wave_system()).unwrap();
    assert_eq!(holding(&wave, 10.0), vec!["lyap-pie2pde".to_string()]);
    let unstable = holding(&heat(11.0), 4.0);
    assert!(unstable.is_empty(), "heat λ = 11 flags {unstable:?}");
}

fn main() {
    let criteria: [(&str, u64, fn()); 10] = [
        ("heat kernels from Dirichlet conditions", 1, heat_kernels),
        ("wave kernels from mixed conditions", 1, wave_kernels),
        ("symbolic factorizations -R*R and -M*M", 1, factorizations),
        ("wave energy certificate and conservation", 30, wave_certificate),
        ("heat exponential threshold sweep", 60, heat_threshold),
        ("pencil and compression spectra", 10, spectrum),
        ("PI algebra property suite", 60, algebra_suite),
        ("boundary-condition bijection suite", 60, bijection_suite),
        ("condition table conformance", 10, table_conformance),
        ("empirical classification matrix", 120, empirical_matrix),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let detail = match result {
            Err(p) => Some(
                p.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default(),
            ),
            Ok(()) if elapsed > Duration::from_secs(budget) => Some(format!("exceeded {budget} s budget")),
            Ok(()) => None,
        };
        let secs = elapsed.as_secs_f64();
        match detail {
            None => println!("PASS criterion {:>2}: {name} ({secs:.2} s)", i + 1),
            Some(why) => {
                failed += 1;
                println!("FAIL criterion {:>2}: {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    let _ = std::panic::take_hook();
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
