//! Helpers shared by the integration test targets.
#![allow(dead_code)]

pub mod suites;

use pie_cert::certify::{Class, Notion, TableRow};
use pie_cert::pi::PiOp;
use pie_cert::poly::{Domain, Poly1, Poly2};
use proptest::collection::vec;
use proptest::prelude::*;

pub fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// The summary table of weakest Lyapunov conditions, one line per notion
/// identifier. Columns: positivity PIE, PDE | bound PDE, PIE | negativity
/// PIE, PDE, semidefinite. The table lists exponential PDE and PDE2PIE once;
/// both variant identifiers map to that row.
pub const CONDITION_TABLE: &str = "
lyap-pie2pde     . X | . X | . . X
lyap-pie         X . | . X | . . X
lyap-pde         . X | X . | . . X
lyap-pde2pie     X . | X . | . . X
exp-pie2pde-id   . X | . X | X . .
exp-pie2pde-qt   . X | X . | . X .
exp-pie-id       X . | . X | X . .
exp-pie-qt       X . | X . | . X .
exp-pde-id       . X | X . | . X .
exp-pde-qt       . X | X . | . X .
exp-pde2pie-id   X . | X . | . X .
exp-pde2pie-qt   X . | X . | . X .
fe-pie2pde       . . | . X | . X .
fe-pie           . . | . X | X . .
fe-pde           . . | X . | . X .
fe-pde2pie       . . | X . | X . .
";

/// Parses [`CONDITION_TABLE`] into `(notion, row)` pairs.
pub fn condition_table() -> Vec<(Notion, TableRow)> {
    CONDITION_TABLE
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut it = line.split_whitespace();
            let notion: Notion = it.next().unwrap().parse().unwrap();
            let marks: Vec<bool> = it.filter(|t| *t != "|").map(|t| t == "X").collect();
            assert_eq!(marks.len(), 7, "{line}");
            let pick = |xs: &[(bool, Class)]| -> Vec<Class> { xs.iter().filter(|x| x.0).map(|x| x.1).collect() };
            let pos = pick(&[(marks[0], Class::Pie), (marks[1], Class::Pde)]);
            let bound = pick(&[(marks[2], Class::Pde), (marks[3], Class::Pie)]);
            let neg = pick(&[(marks[4], Class::Pie), (marks[5], Class::Pde), (marks[6], Class::Semidefinite)]);
            assert!(pos.len() <= 1 && bound.len() == 1 && neg.len() == 1, "{line}");
            (notion, TableRow { positivity: pos.first().copied(), bound: bound[0], negativity: neg[0] })
        })
        .collect()
}

pub fn domain() -> impl Strategy<Value = Domain> {
    prop_oneof![
        Just(Domain::unit()),
        (-1.0f64..0.0, 1.0f64..2.0).prop_map(|(a, l)| Domain::new(a, a + l).unwrap()),
    ]
}

pub fn poly1(d: Domain, deg: usize) -> impl Strategy<Value = Poly1> {
    vec(-1.0f64..1.0, 1..=deg + 1).prop_map(move |c| Poly1::new(c, d))
}

pub fn poly2(d: Domain, deg: usize) -> impl Strategy<Value = Poly2> {
    vec(vec(-1.0f64..1.0, deg + 1), 1..=deg + 1).prop_map(move |rows| Poly2::from_rows(rows, d))
}

/// Random operator with kernels of degree at most `deg` in each variable;
/// `pi2` forces a zero multiplier.
pub fn pi_op(d: Domain, rows: usize, cols: usize, deg: usize, pi2: bool) -> impl Strategy<Value = PiOp> {
    let n = rows * cols;
    (vec(poly1(d, deg), n), vec(poly2(d, deg), n), vec(poly2(d, deg), n)).prop_map(move |(r0, r1, r2)| {
        let r0 = if pi2 { vec![Poly1::zero(d); n] } else { r0 };
        PiOp::new(rows, cols, d, r0, r1, r2).unwrap()
    })
}

/// Independent adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, whole: f64, m: f64, fm: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, left, lm, flm, tol / 2.0, depth - 1) + rec(f, m, fm, b, fb, right, rm, frm, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, whole, m, fm, tol, 40)
}
