//! Orthonormal shifted-Legendre bases and Gauss–Legendre quadrature.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{Domain, Poly1};

/// Gauss–Legendre nodes and weights on `[-1, 1]`. Exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[lo, hi]`.
pub fn gauss_on(n: usize, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (hi - lo);
    let c = 0.5 * (hi + lo);
    (x.iter().map(|t| c + h * t).collect(), w.iter().map(|v| v * h).collect())
}

/// `N` orthonormal shifted-Legendre polynomials on `[a, b]`; element `k` has
/// degree exactly `k`.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    domain: Domain,
    elements: Vec<Poly1>,
}

impl OrthoBasis {
    pub fn legendre(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("basis size must be at least 1"));
        }
        let domain = Domain::new(a, b)?;
        // t = (2s - a - b)/(b - a)
        let t = Poly1::new(vec![-(a + b) / (b - a), 2.0 / (b - a)], domain);
        let mut legendre = vec![Poly1::constant(1.0, domain)];
        if n > 1 {
            legendre.push(t.clone());
        }
        for k in 1..n.saturating_sub(1) {
            let kf = k as f64;
            let next = &(&t * &legendre[k]).scale((2.0 * kf + 1.0) / (kf + 1.0))
                - &legendre[k - 1].scale(kf / (kf + 1.0));
            legendre.push(next);
        }
        let elements = legendre
            .into_iter()
            .enumerate()
            .map(|(k, p)| p.scale(((2 * k + 1) as f64 / (b - a)).sqrt()))
            .collect();
        Ok(OrthoBasis { domain, elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Monomial-form elements. Accurate for moderate sizes only; numerical
    /// work goes through [`OrthoBasis::eval_all`].
    pub fn elements(&self) -> &[Poly1] {
        &self.elements
    }

    /// Values of every basis element at `s`, by the three-term recurrence.
    pub fn eval_all(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(s, &mut out);
        out
    }

    pub fn eval_into(&self, s: f64, out: &mut [f64]) {
        let n = out.len().min(self.len());
        let Domain { a, b } = self.domain;
        let t = (2.0 * s - a - b) / (b - a);
        let (mut p0, mut p1) = (1.0, t);
        for (k, slot) in out.iter_mut().enumerate().take(n) {
            let pk = match k {
                0 => 1.0,
                1 => t,
                _ => {
                    let kf = (k - 1) as f64;
                    let p2 = ((2.0 * kf + 1.0) * t * p1 - kf * p0) / (kf + 1.0);
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *slot = pk * ((2 * k + 1) as f64 / (b - a)).sqrt();
        }
    }

    /// Value of `Σ_k c_k φ_k(s)`.
    pub fn eval_expansion(&self, coeffs: &[f64], s: f64) -> f64 {
        let vals = self.eval_all(s);
        coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum()
    }

    /// Gram matrix `⟨φ_j, φ_k⟩` by Gauss quadrature, exact for these degrees.
    pub fn gram(&self) -> DMatrix<f64> {
        let n = self.len();
        let (xs, ws) = gauss_on(n + 1, self.domain.a, self.domain.b);
        let mut g = DMatrix::zeros(n, n);
        for (x, w) in xs.iter().zip(&ws) {
            let v = self.eval_all(*x);
            for j in 0..n {
                for k in 0..n {
                    g[(j, k)] += w * v[j] * v[k];
                }
            }
        }
        g
    }

    /// Orthogonal projection coefficients of `f` using `nq` quadrature nodes.
    pub fn project_fn(&self, f: impl Fn(f64) -> f64, nq: usize) -> Vec<f64> {
        let (xs, ws) = gauss_on(nq.max(self.len() + 1), self.domain.a, self.domain.b);
        let mut c = vec![0.0; self.len()];
        for (x, w) in xs.iter().zip(&ws) {
            let fx = f(*x);
            for (ck, v) in c.iter_mut().zip(self.eval_all(*x)) {
                *ck += w * fx * v;
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_exactness() {
        let (x, w) = gauss_legendre(5);
        // ∫ t^8 over [-1,1] = 2/9
        let v: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(8)).sum();
        assert!((v - 2.0 / 9.0).abs() < 1e-15);
        let (x1, w1) = gauss_legendre(1);
        assert_eq!(x1, vec![0.0]);
        assert!((w1[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_element_is_constant_one() {
        let b = OrthoBasis::legendre(1, 0.0, 1.0).unwrap();
        assert_eq!(b.elements()[0].coeffs(), &[1.0]);
    }

    #[test]
    fn second_element() {
        let b = OrthoBasis::legendre(2, 0.0, 1.0).unwrap();
        let r3 = 3f64.sqrt();
        assert!(b.elements()[1].approx_eq(&Poly1::new(vec![-r3, 2.0 * r3], Domain::unit()), 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OrthoBasis::legendre(0, 0.0, 1.0).is_err());
        assert!(OrthoBasis::legendre(3, 1.0, 0.0).is_err());
    }

    #[test]
    fn recurrence_matches_monomial_form() {
        let b = OrthoBasis::legendre(8, -1.0, 2.0).unwrap();
        for &s in &[-1.0, -0.3, 0.5, 1.7, 2.0] {
            let v = b.eval_all(s);
            for (k, p) in b.elements().iter().enumerate() {
                assert!((v[k] - p.eval(s)).abs() < 1e-9 * (1.0 + v[k].abs()));
            }
        }
    }

    #[test]
    fn gram_identity() {
        for n in [1, 8, 32] {
            let g = OrthoBasis::legendre(n, 0.0, 1.0).unwrap().gram();
            let e = (g - DMatrix::<f64>::identity(n, n)).abs().max();
            assert!(e < 1e-12, "N={n}: {e}");
        }
    }

    #[test]
    fn nested() {
        let b7 = OrthoBasis::legendre(7, 0.0, 1.0).unwrap();
        let b8 = OrthoBasis::legendre(8, 0.0, 1.0).unwrap();
        assert_eq!(b7.elements(), &b8.elements()[..7]);
    }
}
