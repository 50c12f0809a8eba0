//! Three-part PI operators with polynomial multipliers and kernels.
//!
//! A [`PiOp`] acts on vector-valued functions on `[a, b]` as
//!
//! ```text
//! (P x)(s) = R0(s) x(s) + ∫_a^s R1(s,θ) x(θ) dθ + ∫_s^b R2(s,θ) x(θ) dθ
//! ```
//!
//! Sums, products, adjoints, and block assemblies of such operators are again
//! of this form, and with polynomial entries everything stays exact.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{chain_integral, Domain, Limit, Poly1, Poly2};

/// Default tolerance for [`PiOp::kernels_equal`].
pub const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PiOp {
    rows: usize,
    cols: usize,
    domain: Domain,
    r0: Vec<Poly1>,
    r1: Vec<Poly2>,
    r2: Vec<Poly2>,
}

impl PiOp {
    /// Build from row-major entry lists.
    pub fn new(
        rows: usize,
        cols: usize,
        domain: Domain,
        r0: Vec<Poly1>,
        r1: Vec<Poly2>,
        r2: Vec<Poly2>,
    ) -> Result<Self> {
        let n = rows * cols;
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("PI operator needs at least one row and column"));
        }
        if r0.len() != n || r1.len() != n || r2.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} operator given {}/{}/{} entries",
                r0.len(),
                r1.len(),
                r2.len()
            )));
        }
        for p in &r0 {
            domain.check(&p.domain())?;
        }
        for p in r1.iter().chain(&r2) {
            domain.check(&p.domain())?;
        }
        Ok(PiOp { rows, cols, domain, r0, r1, r2 })
    }

    /// Scalar (1x1) operator from its three parts.
    pub fn scalar(r0: Poly1, r1: Poly2, r2: Poly2) -> Result<Self> {
        let d = r0.domain();
        PiOp::new(1, 1, d, vec![r0], vec![r1], vec![r2])
    }

    /// Scalar integral operator with the given lower and upper kernels.
    pub fn kernel(r1: Poly2, r2: Poly2) -> Result<Self> {
        let d = r1.domain();
        PiOp::scalar(Poly1::zero(d), r1, r2)
    }

    pub fn zero(rows: usize, cols: usize, domain: Domain) -> Self {
        let n = rows * cols;
        PiOp {
            rows,
            cols,
            domain,
            r0: vec![Poly1::zero(domain); n],
            r1: vec![Poly2::zero(domain); n],
            r2: vec![Poly2::zero(domain); n],
        }
    }

    pub fn identity(n: usize, domain: Domain) -> Self {
        let mut p = PiOp::zero(n, n, domain);
        for i in 0..n {
            p.r0[i * n + i] = Poly1::constant(1.0, domain);
        }
        p
    }

    /// Pure multiplier with a constant matrix.
    pub fn constant_multiplier(m: &DMatrix<f64>, domain: Domain) -> Self {
        let mut p = PiOp::zero(m.nrows(), m.ncols(), domain);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                p.r0[i * m.ncols() + j] = Poly1::constant(m[(i, j)], domain);
            }
        }
        p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Zero multiplier part.
    pub fn is_pi2(&self) -> bool {
        self.r0.iter().all(Poly1::is_zero)
    }

    pub fn r0(&self, i: usize, j: usize) -> &Poly1 {
        &self.r0[i * self.cols + j]
    }

    pub fn r1(&self, i: usize, j: usize) -> &Poly2 {
        &self.r1[i * self.cols + j]
    }

    pub fn r2(&self, i: usize, j: usize) -> &Poly2 {
        &self.r2[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, r0: Poly1, r1: Poly2, r2: Poly2) {
        let k = i * self.cols + j;
        self.r0[k] = r0;
        self.r1[k] = r1;
        self.r2[k] = r2;
    }

    /// Entry `(i, j)` as a scalar operator.
    pub fn entry(&self, i: usize, j: usize) -> PiOp {
        PiOp {
            rows: 1,
            cols: 1,
            domain: self.domain,
            r0: vec![self.r0(i, j).clone()],
            r1: vec![self.r1(i, j).clone()],
            r2: vec![self.r2(i, j).clone()],
        }
    }

    /// All entries of the multiplier are constants and both kernels vanish.
    pub fn is_constant_multiplier(&self) -> bool {
        self.r0.iter().all(|p| p.degree().unwrap_or(0) == 0)
            && self.r1.iter().all(Poly2::is_zero)
            && self.r2.iter().all(Poly2::is_zero)
    }

    pub fn constant_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.r0(i, j).eval(self.domain.a))
    }

    fn same_shape(&self, other: &PiOp) -> Result<()> {
        self.domain.check(&other.domain)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &PiOp) -> Result<PiOp> {
        self.same_shape(other)?;
        Ok(self.zip(other, 1.0))
    }

    pub fn sub(&self, other: &PiOp) -> Result<PiOp> {
        self.same_shape(other)?;
        Ok(self.zip(other, -1.0))
    }

    fn zip(&self, other: &PiOp, c: f64) -> PiOp {
        PiOp {
            rows: self.rows,
            cols: self.cols,
            domain: self.domain,
            r0: self.r0.iter().zip(&other.r0).map(|(p, q)| p + &q.scale(c)).collect(),
            r1: self.r1.iter().zip(&other.r1).map(|(p, q)| p + &q.scale(c)).collect(),
            r2: self.r2.iter().zip(&other.r2).map(|(p, q)| p + &q.scale(c)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> PiOp {
        PiOp {
            rows: self.rows,
            cols: self.cols,
            domain: self.domain,
            r0: self.r0.iter().map(|p| p.scale(c)).collect(),
            r1: self.r1.iter().map(|p| p.scale(c)).collect(),
            r2: self.r2.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Left multiplication by the scalar function `c(s)`.
    pub fn mul_left_poly(&self, c: &Poly1) -> Result<PiOp> {
        self.domain.check(&c.domain())?;
        Ok(PiOp {
            rows: self.rows,
            cols: self.cols,
            domain: self.domain,
            r0: self.r0.iter().map(|p| p * c).collect(),
            r1: self.r1.iter().map(|p| p.mul_s(c)).collect(),
            r2: self.r2.iter().map(|p| p.mul_s(c)).collect(),
        })
    }

    /// `(Px)(s)` for polynomial `x`, computed exactly.
    pub fn apply(&self, x: &[Poly1]) -> Result<Vec<Poly1>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "operator has {} columns, input has {} components",
                self.cols,
                x.len()
            )));
        }
        for xi in x {
            self.domain.check(&xi.domain())?;
        }
        let d = self.domain;
        let lo = Poly1::constant(d.a, d);
        let hi = Poly1::constant(d.b, d);
        let s = Poly1::s(d);
        let out = (0..self.rows)
            .map(|i| {
                let mut acc = Poly1::zero(d);
                for (j, xj) in x.iter().enumerate() {
                    acc = &acc + &(self.r0(i, j) * xj);
                    let k1 = self.r1(i, j);
                    if !k1.is_zero() {
                        acc = &acc + &k1.mul_theta(xj).integrate_theta(&lo, &s);
                    }
                    let k2 = self.r2(i, j);
                    if !k2.is_zero() {
                        acc = &acc + &k2.mul_theta(xj).integrate_theta(&s, &hi);
                    }
                }
                acc
            })
            .collect();
        Ok(out)
    }

    /// The operator `P ∘ Q`.
    pub fn compose(&self, other: &PiOp) -> Result<PiOp> {
        self.domain.check(&other.domain)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let d = self.domain;
        let mut out = PiOp::zero(self.rows, other.cols, d);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut r0 = Poly1::zero(d);
                let mut r1 = Poly2::zero(d);
                let mut r2 = Poly2::zero(d);
                for m in 0..self.cols {
                    let (a0, a1, a2) = compose_scalar(
                        (self.r0(i, m), self.r1(i, m), self.r2(i, m)),
                        (other.r0(m, j), other.r1(m, j), other.r2(m, j)),
                        d,
                    );
                    r0 = &r0 + &a0;
                    r1 = &r1 + &a1;
                    r2 = &r2 + &a2;
                }
                out.set(i, j, r0, r1, r2);
            }
        }
        Ok(out)
    }

    /// The L2 adjoint.
    pub fn adjoint(&self) -> PiOp {
        let mut out = PiOp::zero(self.cols, self.rows, self.domain);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(
                    j,
                    i,
                    self.r0(i, j).clone(),
                    self.r2(i, j).swap(),
                    self.r1(i, j).swap(),
                );
            }
        }
        out
    }

    /// `P + P*`.
    pub fn plus_adjoint(&self) -> Result<PiOp> {
        self.add(&self.adjoint())
    }

    /// Block-diagonal assembly of square blocks.
    pub fn block_diag(blocks: &[PiOp]) -> Result<PiOp> {
        let first = blocks.first().ok_or_else(|| Error::invalid("block_diag of an empty list"))?;
        for b in blocks {
            first.domain.check(&b.domain)?;
            if !b.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "block_diag needs square blocks, got {}x{}",
                    b.rows, b.cols
                )));
            }
        }
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let grid: Vec<Vec<Option<&PiOp>>> = blocks
            .iter()
            .enumerate()
            .map(|(i, _)| {
                (0..blocks.len()).map(|j| if i == j { Some(&blocks[i]) } else { None }).collect()
            })
            .collect();
        let sizes: Vec<usize> = blocks.iter().map(|b| b.rows).collect();
        let out = PiOp::block(&grid, &sizes, &sizes, first.domain)?;
        debug_assert_eq!(out.rows, n);
        Ok(out)
    }

    /// General block assembly; `None` entries are zero blocks.
    pub fn block(
        grid: &[Vec<Option<&PiOp>>],
        row_sizes: &[usize],
        col_sizes: &[usize],
        domain: Domain,
    ) -> Result<PiOp> {
        let rows: usize = row_sizes.iter().sum();
        let cols: usize = col_sizes.iter().sum();
        let mut out = PiOp::zero(rows, cols, domain);
        if grid.len() != row_sizes.len() {
            return Err(Error::DimensionMismatch("block grid row count".into()));
        }
        let mut r_off = 0;
        for (bi, row) in grid.iter().enumerate() {
            if row.len() != col_sizes.len() {
                return Err(Error::DimensionMismatch("block grid column count".into()));
            }
            let mut c_off = 0;
            for (bj, blk) in row.iter().enumerate() {
                if let Some(b) = blk {
                    domain.check(&b.domain)?;
                    if b.rows != row_sizes[bi] || b.cols != col_sizes[bj] {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({bi},{bj}) is {}x{}, expected {}x{}",
                            b.rows, b.cols, row_sizes[bi], col_sizes[bj]
                        )));
                    }
                    for i in 0..b.rows {
                        for j in 0..b.cols {
                            out.set(
                                r_off + i,
                                c_off + j,
                                b.r0(i, j).clone(),
                                b.r1(i, j).clone(),
                                b.r2(i, j).clone(),
                            );
                        }
                    }
                }
                c_off += col_sizes[bj];
            }
            r_off += row_sizes[bi];
        }
        Ok(out)
    }

    /// Sub-operator on the given row and column index ranges.
    pub fn sub_block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> PiOp {
        let mut out = PiOp::zero(rows.len(), cols.len(), self.domain);
        for (oi, i) in rows.clone().enumerate() {
            for (oj, j) in cols.clone().enumerate() {
                out.set(oi, oj, self.r0(i, j).clone(), self.r1(i, j).clone(), self.r2(i, j).clone());
            }
        }
        out
    }

    /// Principal sub-operator on an arbitrary index set.
    pub fn principal(&self, idx: &[usize]) -> PiOp {
        let mut out = PiOp::zero(idx.len(), idx.len(), self.domain);
        for (oi, &i) in idx.iter().enumerate() {
            for (oj, &j) in idx.iter().enumerate() {
                out.set(oi, oj, self.r0(i, j).clone(), self.r1(i, j).clone(), self.r2(i, j).clone());
            }
        }
        out
    }

    /// Entry-wise zero test with exact comparison.
    pub fn is_zero(&self) -> bool {
        self.r0.iter().all(Poly1::is_zero)
            && self.r1.iter().all(Poly2::is_zero)
            && self.r2.iter().all(Poly2::is_zero)
    }

    /// Largest coefficient-level difference between two operators of the same
    /// shape.
    pub fn max_coeff_diff(&self, other: &PiOp) -> Result<f64> {
        self.same_shape(other)?;
        let d0 = self
            .r0
            .iter()
            .zip(&other.r0)
            .map(|(p, q)| (p - q).max_abs_coeff())
            .fold(0.0, f64::max);
        let d1 = self.r1.iter().zip(&other.r1).map(|(p, q)| p.max_abs_diff(q)).fold(0.0, f64::max);
        let d2 = self.r2.iter().zip(&other.r2).map(|(p, q)| p.max_abs_diff(q)).fold(0.0, f64::max);
        Ok(d0.max(d1).max(d2))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        let a = self.r0.iter().map(Poly1::max_abs_coeff).fold(0.0, f64::max);
        let b = self.r1.iter().chain(&self.r2).map(Poly2::max_abs_coeff).fold(0.0, f64::max);
        a.max(b)
    }

    /// Coefficient-wise equality within `tol`. Operators of different shape
    /// or domain are never equal.
    pub fn kernels_equal(&self, other: &PiOp, tol: f64) -> bool {
        self.max_coeff_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    /// Coefficient distance between `P` and `P*`; zero for self-adjoint `P`.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_coeff_diff(&self.adjoint()).unwrap_or(f64::INFINITY)
    }

    /// Computable upper bound on the L2-induced norm: sup-norm of the
    /// multiplier plus the Hilbert–Schmidt norm of the integral part.
    pub fn norm_bound(&self) -> f64 {
        let sigma = |s: f64| -> f64 {
            let m = DMatrix::from_fn(self.rows, self.cols, |i, j| self.r0(i, j).eval(s));
            if self.rows == 1 && self.cols == 1 {
                m[(0, 0)].abs()
            } else {
                m.singular_values().max()
            }
        };
        let Domain { a, b } = self.domain;
        let samples = 1000;
        let h = (b - a) / samples as f64;
        let (mut best_s, mut best) = (a, sigma(a));
        for k in 1..=samples {
            let s = a + h * k as f64;
            let v = sigma(s);
            if v > best {
                best = v;
                best_s = s;
            }
        }
        // golden-section refinement around the best sample
        let (mut lo, mut hi) = ((best_s - h).max(a), (best_s + h).min(b));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        while hi - lo > 1e-6 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if sigma(x1) >= sigma(x2) {
                hi = x2;
            } else {
                lo = x1;
            }
        }
        let sup = best.max(sigma(0.5 * (lo + hi)));

        let d = self.domain;
        let lo_p = Poly1::constant(a, d);
        let hi_p = Poly1::constant(b, d);
        let s = Poly1::s(d);
        let mut hs = 0.0;
        for k in &self.r1 {
            if !k.is_zero() {
                hs += (k * k).integrate_theta(&lo_p, &s).integrate(a, b);
            }
        }
        for k in &self.r2 {
            if !k.is_zero() {
                hs += (k * k).integrate_theta(&s, &hi_p).integrate(a, b);
            }
        }
        sup + hs.max(0.0).sqrt()
    }
}

type Parts<'a> = (&'a Poly1, &'a Poly2, &'a Poly2);

/// Composition of scalar PI operators. The inner integration variable is
/// split at `θ` and `s`, giving six kernel sub-terms.
fn compose_scalar(p: Parts<'_>, q: Parts<'_>, d: Domain) -> (Poly1, Poly2, Poly2) {
    let (p0, p1, p2) = p;
    let (q0, q1, q2) = q;
    let a = Limit::Const(d.a);
    let b = Limit::Const(d.b);

    let r0 = p0 * q0;
    let mut r1 = &q1.mul_s(p0) + &p1.mul_theta(q0);
    let mut r2 = &q2.mul_s(p0) + &p2.mul_theta(q0);

    // a < θ < η < s
    r1 = &r1 + &chain_integral(p1, q1, Limit::Theta, Limit::S);
    // η < θ < s and η < s < θ
    r1 = &r1 + &chain_integral(p1, q2, a, Limit::Theta);
    r2 = &r2 + &chain_integral(p1, q2, a, Limit::S);
    // θ < s < η and s < θ < η
    r1 = &r1 + &chain_integral(p2, q1, Limit::S, b);
    r2 = &r2 + &chain_integral(p2, q1, Limit::Theta, b);
    // s < η < θ
    r2 = &r2 + &chain_integral(p2, q2, Limit::S, Limit::Theta);

    (r0, r1, r2)
}

impl fmt::Display for PiOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} PI operator on [{}, {}]", self.rows, self.cols, self.domain.a, self.domain.b)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (r0, r1, r2) = (self.r0(i, j), self.r1(i, j), self.r2(i, j));
                if r0.is_zero() && r1.is_zero() && r2.is_zero() {
                    continue;
                }
                writeln!(f, "  ({i},{j}): R0 = {r0}; R1 = {r1}; R2 = {r2}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d() -> Domain {
        Domain::unit()
    }

    fn p2(rows: Vec<Vec<f64>>) -> Poly2 {
        Poly2::from_rows(rows, d())
    }

    /// Dirichlet heat kernel: θ(s-1) below the diagonal, s(θ-1) above.
    fn t_heat() -> PiOp {
        PiOp::kernel(p2(vec![vec![0.0, -1.0], vec![0.0, 1.0]]), p2(vec![vec![0.0], vec![-1.0, 1.0]]))
            .unwrap()
    }

    fn m_heat() -> PiOp {
        PiOp::kernel(Poly2::theta(d()), p2(vec![vec![-1.0, 1.0]])).unwrap()
    }

    fn r_wave() -> PiOp {
        PiOp::kernel(Poly2::zero(d()), Poly2::constant(-1.0, d())).unwrap()
    }

    fn t0_wave() -> PiOp {
        PiOp::kernel(Poly2::theta(d()).scale(-1.0), Poly2::s(d()).scale(-1.0)).unwrap()
    }

    #[test]
    fn identity_apply() {
        let x = vec![Poly1::new(vec![1.0, -2.0, 3.0], d())];
        assert_eq!(PiOp::identity(1, d()).apply(&x).unwrap(), x);
    }

    #[test]
    fn heat_apply_constant() {
        let y = t_heat().apply(&[Poly1::constant(1.0, d())]).unwrap();
        assert!(y[0].approx_eq(&Poly1::new(vec![0.0, -0.5, 0.5], d()), 1e-15));
    }

    #[test]
    fn wave_r_apply_constant() {
        let y = r_wave().apply(&[Poly1::constant(1.0, d())]).unwrap();
        assert!(y[0].approx_eq(&Poly1::new(vec![-1.0, 1.0], d()), 1e-15));
    }

    #[test]
    fn apply_dimension_mismatch() {
        assert!(matches!(
            PiOp::identity(2, d()).apply(&[Poly1::zero(d())]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn identity_is_unit_for_compose() {
        let p = t_heat();
        let c = PiOp::identity(1, d()).compose(&p).unwrap();
        assert!(c.kernels_equal(&p, 0.0));
    }

    #[test]
    fn wave_factorization() {
        let rr = r_wave().adjoint().compose(&r_wave()).unwrap();
        let expect = PiOp::kernel(Poly2::theta(d()), Poly2::s(d())).unwrap();
        assert!(rr.kernels_equal(&expect, KERNEL_TOL));
        assert!(rr.scale(-1.0).kernels_equal(&t0_wave(), KERNEL_TOL));
    }

    #[test]
    fn heat_factorization() {
        let mm = m_heat().adjoint().compose(&m_heat()).unwrap();
        assert!(mm.scale(-1.0).kernels_equal(&t_heat(), KERNEL_TOL));
    }

    #[test]
    fn adjoint_examples() {
        assert!(PiOp::identity(2, d()).adjoint().kernels_equal(&PiOp::identity(2, d()), 0.0));
        let ra = r_wave().adjoint();
        let expect = PiOp::kernel(Poly2::constant(-1.0, d()), Poly2::zero(d())).unwrap();
        assert!(ra.kernels_equal(&expect, 0.0));
        assert!(t_heat().adjoint().kernels_equal(&t_heat(), 0.0));
    }

    #[test]
    fn block_diag_wave_t() {
        let i1 = PiOp::identity(1, d());
        assert!(PiOp::block_diag(std::slice::from_ref(&i1)).unwrap().kernels_equal(&i1, 0.0));
        let t = PiOp::block_diag(&[i1, t0_wave()]).unwrap();
        assert_eq!((t.rows(), t.cols()), (2, 2));
        assert!(!t.is_pi2());
        assert!(t.r0(1, 1).is_zero());
        assert!(t.r1(1, 1).approx_eq(&Poly2::theta(d()).scale(-1.0), 0.0));
        assert!(PiOp::block_diag(&[]).is_err());
    }

    #[test]
    fn norm_bounds() {
        assert!((PiOp::identity(1, d()).norm_bound() - 1.0).abs() < 1e-12);
        assert!((t_heat().norm_bound() - 1.0 / 90f64.sqrt()).abs() < 1e-12);
        assert!((r_wave().norm_bound() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kernels_equal_examples() {
        let t = t_heat();
        assert!(t.kernels_equal(&t, 0.0));
        let bumped = t.add(&PiOp::scalar(Poly1::s(d()).scale(1e-6), Poly2::zero(d()), Poly2::zero(d())).unwrap()).unwrap();
        assert!(!t.kernels_equal(&bumped, KERNEL_TOL));
    }

    #[test]
    fn pi2_closure_small() {
        let p = PiOp::scalar(Poly1::s(d()), Poly2::s(d()), Poly2::theta(d())).unwrap();
        assert!(p.compose(&t_heat()).unwrap().is_pi2());
        assert!(t_heat().compose(&p).unwrap().is_pi2());
    }
}
