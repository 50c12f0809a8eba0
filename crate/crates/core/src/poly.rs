//! Real polynomials in one, two, and three variables.
//!
//! `Poly1` is a polynomial in `s`. `Poly2` is a polynomial in `(s, θ)` and
//! carries the kernels of PI operators. `Poly3` adds a dummy variable `η`
//! that only exists long enough to be integrated away during composition.
//!
//! Coefficients are stored in the monomial basis, lowest degree first, and are
//! trimmed so that the highest stored coefficient is nonzero. The zero
//! polynomial has no coefficients and degree `None`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::invalid(format!("domain requires a < b, got [{a}, {b}]")));
        }
        Ok(Domain { a, b })
    }

    pub fn unit() -> Self {
        Domain { a: 0.0, b: 1.0 }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub(crate) fn check(&self, other: &Domain) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DomainMismatch(self.a, self.b, other.a, other.b))
        }
    }
}

fn trim(v: &mut Vec<f64>) {
    while v.last() == Some(&0.0) {
        v.pop();
    }
}

fn add_into(dst: &mut Vec<f64>, src: &[f64], scale: f64) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

fn mul_coeffs(p: &[f64], q: &[f64]) -> Vec<f64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, &pi) in p.iter().enumerate() {
        if pi == 0.0 {
            continue;
        }
        for (j, &qj) in q.iter().enumerate() {
            out[i + j] += pi * qj;
        }
    }
    out
}

/// Polynomial in `s` on a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly1 {
    coeffs: Vec<f64>,
    domain: Domain,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<f64>, domain: Domain) -> Self {
        trim(&mut coeffs);
        Poly1 { coeffs, domain }
    }

    pub fn zero(domain: Domain) -> Self {
        Poly1 { coeffs: Vec::new(), domain }
    }

    pub fn constant(c: f64, domain: Domain) -> Self {
        Poly1::new(vec![c], domain)
    }

    /// The coordinate `s` itself.
    pub fn s(domain: Domain) -> Self {
        Poly1::new(vec![0.0, 1.0], domain)
    }

    pub fn monomial(k: usize, c: f64, domain: Domain) -> Self {
        let mut v = vec![0.0; k + 1];
        v[k] = c;
        Poly1::new(v, domain)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn scale(&self, c: f64) -> Self {
        Poly1::new(self.coeffs.iter().map(|x| x * c).collect(), self.domain)
    }

    pub fn try_add(&self, other: &Poly1) -> Result<Self> {
        self.domain.check(&other.domain)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Poly1) -> Result<Self> {
        self.domain.check(&other.domain)?;
        Ok(self * other)
    }

    pub fn derivative(&self) -> Self {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Poly1::new(c, self.domain)
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(self.coeffs.iter().enumerate().map(|(k, &x)| x / (k + 1) as f64));
        Poly1::new(c, self.domain)
    }

    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(hi) - anti.eval(lo)
    }

    /// `self(q(s))`.
    pub fn compose(&self, q: &Poly1) -> Self {
        let mut out = Poly1::zero(self.domain);
        for &c in self.coeffs.iter().rev() {
            out = &(&out * q) + &Poly1::constant(c, self.domain);
        }
        out
    }

    pub fn approx_eq(&self, other: &Poly1, tol: f64) -> bool {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| {
            let x = self.coeffs.get(k).copied().unwrap_or(0.0);
            let y = other.coeffs.get(k).copied().unwrap_or(0.0);
            (x - y).abs() <= tol
        })
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, rhs: &Poly1) -> Poly1 {
        debug_assert_eq!(self.domain, rhs.domain);
        let mut c = self.coeffs.clone();
        add_into(&mut c, &rhs.coeffs, 1.0);
        Poly1::new(c, self.domain)
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        debug_assert_eq!(self.domain, rhs.domain);
        let mut c = self.coeffs.clone();
        add_into(&mut c, &rhs.coeffs, -1.0);
        Poly1::new(c, self.domain)
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        debug_assert_eq!(self.domain, rhs.domain);
        Poly1::new(mul_coeffs(&self.coeffs, &rhs.coeffs), self.domain)
    }
}

impl Neg for &Poly1 {
    type Output = Poly1;
    fn neg(self) -> Poly1 {
        self.scale(-1.0)
    }
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: &[(f64, String)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (k, (c, mono)) in terms.iter().enumerate() {
        let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
        if k == 0 {
            if sign == "-" {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        if mono.is_empty() {
            write!(f, "{mag}")?;
        } else if mag == 1.0 {
            write!(f, "{mono}")?;
        } else {
            write!(f, "{mag}*{mono}")?;
        }
    }
    Ok(())
}

fn mono(var: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{k}"),
    }
}

impl fmt::Display for Poly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, &c)| (c, mono("s", k)))
            .collect();
        fmt_terms(f, &terms)
    }
}

/// Polynomial in `(s, θ)`; coefficient `(i, j)` multiplies `s^i θ^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    // row-major, `ns` rows (powers of s) by `nt` columns (powers of θ)
    coeffs: Vec<f64>,
    ns: usize,
    nt: usize,
    domain: Domain,
}

impl Poly2 {
    /// Build from rows indexed by the power of `s`.
    pub fn from_rows(rows: Vec<Vec<f64>>, domain: Domain) -> Self {
        let ns = rows.len();
        let nt = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut coeffs = vec![0.0; ns * nt];
        for (i, r) in rows.iter().enumerate() {
            coeffs[i * nt..i * nt + r.len()].copy_from_slice(r);
        }
        Poly2::raw(coeffs, ns, nt, domain)
    }

    fn raw(coeffs: Vec<f64>, ns: usize, nt: usize, domain: Domain) -> Self {
        let mut p = Poly2 { coeffs, ns, nt, domain };
        p.trim();
        p
    }

    fn trim(&mut self) {
        let mut ns = self.ns;
        while ns > 0 && self.coeffs[(ns - 1) * self.nt..ns * self.nt].iter().all(|&c| c == 0.0) {
            ns -= 1;
        }
        let mut nt = self.nt;
        while nt > 0 && (0..ns).all(|i| self.coeffs[i * self.nt + nt - 1] == 0.0) {
            nt -= 1;
        }
        if ns == 0 || nt == 0 {
            self.coeffs.clear();
            self.ns = 0;
            self.nt = 0;
            return;
        }
        if nt != self.nt || ns != self.ns {
            let mut c = Vec::with_capacity(ns * nt);
            for i in 0..ns {
                c.extend_from_slice(&self.coeffs[i * self.nt..i * self.nt + nt]);
            }
            self.coeffs = c;
            self.ns = ns;
            self.nt = nt;
        }
    }

    pub fn zero(domain: Domain) -> Self {
        Poly2 { coeffs: Vec::new(), ns: 0, nt: 0, domain }
    }

    pub fn constant(c: f64, domain: Domain) -> Self {
        Poly2::raw(vec![c], 1, 1, domain)
    }

    pub fn s(domain: Domain) -> Self {
        Poly2::from_rows(vec![vec![0.0], vec![1.0]], domain)
    }

    pub fn theta(domain: Domain) -> Self {
        Poly2::from_rows(vec![vec![0.0, 1.0]], domain)
    }

    /// Lift a polynomial in `s` to one in `(s, θ)` that ignores `θ`.
    pub fn from_s(p: &Poly1) -> Self {
        Poly2::raw(p.coeffs.clone(), p.coeffs.len(), 1, p.domain)
    }

    /// Lift a polynomial in one variable into the `θ` slot.
    pub fn from_theta(p: &Poly1) -> Self {
        Poly2::raw(p.coeffs.clone(), 1, p.coeffs.len(), p.domain)
    }

    /// `p(s) q(θ)`.
    pub fn outer(p: &Poly1, q: &Poly1) -> Self {
        let ns = p.coeffs.len();
        let nt = q.coeffs.len();
        let mut c = vec![0.0; ns * nt];
        for i in 0..ns {
            for j in 0..nt {
                c[i * nt + j] = p.coeffs[i] * q.coeffs[j];
            }
        }
        Poly2::raw(c, ns, nt, p.domain)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(degree in s, degree in θ)`, `None` for zero.
    pub fn degrees(&self) -> Option<(usize, usize)> {
        if self.is_zero() {
            None
        } else {
            Some((self.ns - 1, self.nt - 1))
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        if i < self.ns && j < self.nt {
            self.coeffs[i * self.nt + j]
        } else {
            0.0
        }
    }

    /// The coefficient of `θ^j` as a polynomial in `s`.
    pub fn theta_coeff(&self, j: usize) -> Poly1 {
        Poly1::new((0..self.ns).map(|i| self.coeff(i, j)).collect(), self.domain)
    }

    /// The coefficient of `s^i` as a polynomial in `θ`.
    pub fn s_coeff(&self, i: usize) -> Poly1 {
        Poly1::new((0..self.nt).map(|j| self.coeff(i, j)).collect(), self.domain)
    }

    pub fn eval(&self, s: f64, theta: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..self.ns).rev() {
            let row = &self.coeffs[i * self.nt..(i + 1) * self.nt];
            let r = row.iter().rev().fold(0.0, |a, &c| a * theta + c);
            acc = acc * s + r;
        }
        acc
    }

    pub fn scale(&self, c: f64) -> Self {
        Poly2::raw(self.coeffs.iter().map(|x| x * c).collect(), self.ns, self.nt, self.domain)
    }

    pub fn try_add(&self, other: &Poly2) -> Result<Self> {
        self.domain.check(&other.domain)?;
        Ok(self + other)
    }

    pub fn try_mul(&self, other: &Poly2) -> Result<Self> {
        self.domain.check(&other.domain)?;
        Ok(self * other)
    }

    /// `p(θ, s)`.
    pub fn swap(&self) -> Self {
        let mut c = vec![0.0; self.ns * self.nt];
        for i in 0..self.ns {
            for j in 0..self.nt {
                c[j * self.ns + i] = self.coeffs[i * self.nt + j];
            }
        }
        Poly2::raw(c, self.nt, self.ns, self.domain)
    }

    pub fn d_s(&self) -> Self {
        if self.ns <= 1 {
            return Poly2::zero(self.domain);
        }
        let mut c = vec![0.0; (self.ns - 1) * self.nt];
        for i in 1..self.ns {
            for j in 0..self.nt {
                c[(i - 1) * self.nt + j] = i as f64 * self.coeffs[i * self.nt + j];
            }
        }
        Poly2::raw(c, self.ns - 1, self.nt, self.domain)
    }

    pub fn d_theta(&self) -> Self {
        self.swap().d_s().swap()
    }

    /// Multiply by a polynomial in `s`.
    pub fn mul_s(&self, p: &Poly1) -> Self {
        self * &Poly2::from_s(p)
    }

    /// Multiply by a polynomial in `θ`.
    pub fn mul_theta(&self, p: &Poly1) -> Self {
        self * &Poly2::from_theta(p)
    }

    /// Restriction to the diagonal `θ = s`.
    pub fn diagonal(&self) -> Poly1 {
        let n = if self.is_zero() { 0 } else { self.ns + self.nt - 1 };
        let mut c = vec![0.0; n];
        for i in 0..self.ns {
            for j in 0..self.nt {
                c[i + j] += self.coeffs[i * self.nt + j];
            }
        }
        Poly1::new(c, self.domain)
    }

    /// `∫_{lo(s)}^{hi(s)} p(s, θ) dθ`, a polynomial in `s`.
    pub fn integrate_theta(&self, lo: &Poly1, hi: &Poly1) -> Poly1 {
        let mut out = Poly1::zero(self.domain);
        if self.is_zero() {
            return out;
        }
        let mut hi_pow = hi.clone();
        let mut lo_pow = lo.clone();
        for j in 0..self.nt {
            let cj = self.theta_coeff(j);
            if !cj.is_zero() {
                let diff = (&hi_pow - &lo_pow).scale(1.0 / (j + 1) as f64);
                out = &out + &(&cj * &diff);
            }
            if j + 1 < self.nt {
                hi_pow = &hi_pow * hi;
                lo_pow = &lo_pow * lo;
            }
        }
        out
    }

    /// `∫_{lo(θ)}^{hi(θ)} p(s, θ) ds`, a polynomial in `θ` (returned in the
    /// variable slot of `Poly1`).
    pub fn integrate_s(&self, lo: &Poly1, hi: &Poly1) -> Poly1 {
        self.swap().integrate_theta(lo, hi)
    }

    pub fn integrate_square(&self, lo_s: f64, hi_s: f64, lo_t: f64, hi_t: f64) -> f64 {
        let d = self.domain;
        let inner = self.integrate_theta(&Poly1::constant(lo_t, d), &Poly1::constant(hi_t, d));
        inner.integrate(lo_s, hi_s)
    }

    pub fn approx_eq(&self, other: &Poly2, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    pub fn max_abs_diff(&self, other: &Poly2) -> f64 {
        let ns = self.ns.max(other.ns);
        let nt = self.nt.max(other.nt);
        let mut m: f64 = 0.0;
        for i in 0..ns {
            for j in 0..nt {
                m = m.max((self.coeff(i, j) - other.coeff(i, j)).abs());
            }
        }
        m
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        debug_assert_eq!(self.domain, rhs.domain);
        let ns = self.ns.max(rhs.ns);
        let nt = self.nt.max(rhs.nt);
        let mut c = vec![0.0; ns * nt];
        for i in 0..ns {
            for j in 0..nt {
                c[i * nt + j] = self.coeff(i, j) + rhs.coeff(i, j);
            }
        }
        Poly2::raw(c, ns, nt, self.domain)
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &rhs.scale(-1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        debug_assert_eq!(self.domain, rhs.domain);
        if self.is_zero() || rhs.is_zero() {
            return Poly2::zero(self.domain);
        }
        let ns = self.ns + rhs.ns - 1;
        let nt = self.nt + rhs.nt - 1;
        let mut c = vec![0.0; ns * nt];
        for i in 0..self.ns {
            for j in 0..self.nt {
                let a = self.coeffs[i * self.nt + j];
                if a == 0.0 {
                    continue;
                }
                for k in 0..rhs.ns {
                    for l in 0..rhs.nt {
                        c[(i + k) * nt + j + l] += a * rhs.coeffs[k * rhs.nt + l];
                    }
                }
            }
        }
        Poly2::raw(c, ns, nt, self.domain)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for i in 0..self.ns {
            for j in 0..self.nt {
                let c = self.coeffs[i * self.nt + j];
                if c != 0.0 {
                    let m = match (mono("s", i), mono("θ", j)) {
                        (a, b) if a.is_empty() => b,
                        (a, b) if b.is_empty() => a,
                        (a, b) => format!("{a}*{b}"),
                    };
                    terms.push((c, m));
                }
            }
        }
        fmt_terms(f, &terms)
    }
}

/// Polynomial in `(s, θ, η)`, stored as `Σ_m c_m(s, θ) η^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly3 {
    eta: Vec<Poly2>,
    domain: Domain,
}

impl Poly3 {
    /// `p(s, η) q(η, θ)`: the integrand of a kernel composition.
    pub fn chain(p: &Poly2, q: &Poly2) -> Self {
        let domain = p.domain;
        if p.is_zero() || q.is_zero() {
            return Poly3 { eta: Vec::new(), domain };
        }
        // p's θ-slot holds η; q's s-slot holds η.
        let mut eta = vec![Poly2::zero(domain); p.nt + q.ns - 1];
        for j in 0..p.nt {
            let pj = p.theta_coeff(j);
            if pj.is_zero() {
                continue;
            }
            for k in 0..q.ns {
                let qk = q.s_coeff(k);
                if qk.is_zero() {
                    continue;
                }
                eta[j + k] = &eta[j + k] + &Poly2::outer(&pj, &qk);
            }
        }
        Poly3 { eta, domain }
    }

    pub fn from_eta_coeffs(eta: Vec<Poly2>, domain: Domain) -> Self {
        Poly3 { eta, domain }
    }

    pub fn eval(&self, s: f64, theta: f64, eta: f64) -> f64 {
        self.eta.iter().rev().fold(0.0, |acc, c| acc * eta + c.eval(s, theta))
    }

    /// `∫_{lo(s,θ)}^{hi(s,θ)} p(s, θ, η) dη`.
    pub fn integrate_eta(&self, lo: &Poly2, hi: &Poly2) -> Poly2 {
        let mut out = Poly2::zero(self.domain);
        let mut hi_pow = hi.clone();
        let mut lo_pow = lo.clone();
        for (m, c) in self.eta.iter().enumerate() {
            if !c.is_zero() {
                let diff = (&hi_pow - &lo_pow).scale(1.0 / (m + 1) as f64);
                out = &out + &(c * &diff);
            }
            if m + 1 < self.eta.len() {
                hi_pow = &hi_pow * hi;
                lo_pow = &lo_pow * lo;
            }
        }
        out
    }
}

/// Limits of a definite integral over the dummy variable in a composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    Const(f64),
    S,
    Theta,
}

impl Limit {
    pub fn as_poly(self, domain: Domain) -> Poly2 {
        match self {
            Limit::Const(c) => Poly2::constant(c, domain),
            Limit::S => Poly2::s(domain),
            Limit::Theta => Poly2::theta(domain),
        }
    }
}

/// `∫_{lo}^{hi} p(s, η) q(η, θ) dη` with limits drawn from `{a, b, s, θ}`.
pub(crate) fn chain_integral(p: &Poly2, q: &Poly2, lo: Limit, hi: Limit) -> Poly2 {
    if p.is_zero() || q.is_zero() {
        return Poly2::zero(p.domain);
    }
    let d = p.domain;
    Poly3::chain(p, q).integrate_eta(&lo.as_poly(d), &hi.as_poly(d))
}
