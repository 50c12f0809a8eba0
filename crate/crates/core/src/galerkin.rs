//! Galerkin compressions of PI operators and numerical operator-inequality
//! checks.
//!
//! Compressions are taken on orthonormal shifted-Legendre bases. Every
//! integrand is a polynomial, so tensor Gauss rules sized from the kernel
//! degrees integrate exactly; the triangles `θ < s` and `s < θ` are mapped to
//! the unit square first.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::basis::{gauss_legendre, OrthoBasis};
use crate::error::{Error, Result};
use crate::pde::PieSystem;
use crate::pi::PiOp;
use crate::poly::{Poly1, Poly2};

pub const DEFAULT_NS: [usize; 4] = [4, 8, 16, 32];
pub const DEFAULT_TOL: f64 = 1e-8;
/// Largest admissible condition number of `T_N`.
pub const MAX_COND: f64 = 1e12;
/// Relative change over the last doubling below which margins count as
/// stabilized.
pub const STABLE_REL: f64 = 0.1;

/// `⟨φ_j, P φ_k⟩` for an `N`-element basis; block `(i, j)` of the operator
/// occupies rows `i*N..(i+1)*N` and columns `j*N..(j+1)*N`.
#[derive(Debug, Clone)]
pub struct Compression {
    pub matrix: DMatrix<f64>,
    pub n: usize,
    pub basis: OrthoBasis,
}

impl Compression {
    /// `(M + Mᵀ)/2`.
    pub fn symmetric(&self) -> DMatrix<f64> {
        (&self.matrix + self.matrix.transpose()) * 0.5
    }
}

fn nodes_for(degree: usize) -> usize {
    degree / 2 + 1
}

fn compress_r0(p: &Poly1, basis: &OrthoBasis) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    let Some(d0) = p.degree() else { return m };
    let d = basis.domain();
    let (xs, ws) = gauss_legendre(nodes_for(d0 + 2 * (n - 1)));
    let h = 0.5 * d.length();
    let mut phi = vec![0.0; n];
    for (x, w) in xs.iter().zip(&ws) {
        let s = d.a + h * (x + 1.0);
        basis.eval_into(s, &mut phi);
        let c = w * h * p.eval(s);
        for j in 0..n {
            let cj = c * phi[j];
            for k in 0..n {
                m[(j, k)] += cj * phi[k];
            }
        }
    }
    m
}

/// Compression of `∫ K(s,θ) x(θ) dθ` over `θ < s` (`lower`) or `s < θ`.
fn compress_kernel(k: &Poly2, basis: &OrthoBasis, lower: bool) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    let Some((ds, dt)) = k.degrees() else { return m };
    let d = basis.domain();
    let (xs, ws) = gauss_legendre(nodes_for(ds + dt + 2 * n - 1));
    let (xu, wu) = gauss_legendre(nodes_for(dt + n - 1));
    let h = 0.5 * d.length();
    let mut phi_s = vec![0.0; n];
    let mut phi_t = vec![0.0; n];
    let mut v = vec![0.0; n];
    for (x, w) in xs.iter().zip(&ws) {
        let s = d.a + h * (x + 1.0);
        let (lo, len) = if lower { (d.a, s - d.a) } else { (s, d.b - s) };
        v.iter_mut().for_each(|e| *e = 0.0);
        for (y, wy) in xu.iter().zip(&wu) {
            let theta = lo + 0.5 * len * (y + 1.0);
            basis.eval_into(theta, &mut phi_t);
            let c = 0.5 * wy * len * k.eval(s, theta);
            for (vk, pk) in v.iter_mut().zip(&phi_t) {
                *vk += c * pk;
            }
        }
        basis.eval_into(s, &mut phi_s);
        let c = w * h;
        for j in 0..n {
            let cj = c * phi_s[j];
            for kk in 0..n {
                m[(j, kk)] += cj * v[kk];
            }
        }
    }
    m
}

fn compress_with(p: &PiOp, basis: &OrthoBasis) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(p.rows() * n, p.cols() * n);
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            let block = compress_r0(p.r0(i, j), basis)
                + compress_kernel(p.r1(i, j), basis, true)
                + compress_kernel(p.r2(i, j), basis, false);
            m.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        }
    }
    m
}

pub fn project(p: &PiOp, n: usize) -> Result<Compression> {
    let d = p.domain();
    let basis = OrthoBasis::legendre(n, d.a, d.b)?;
    Ok(Compression { matrix: compress_with(p, &basis), n, basis })
}

/// `⟨x, P x⟩` for `x` given by basis coefficients, one block of `N` per
/// component.
pub fn quadratic_form(p: &PiOp, n: usize, coeffs: &[f64]) -> Result<f64> {
    let c = project(p, n)?;
    if coeffs.len() != c.matrix.ncols() || c.matrix.nrows() != c.matrix.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a {}x{} compression",
            coeffs.len(),
            c.matrix.nrows(),
            c.matrix.ncols()
        )));
    }
    let x = DVector::from_column_slice(coeffs);
    Ok(x.dot(&(&c.matrix * &x)))
}

/// Smallest eigenvalue and its eigenvector of a symmetric matrix.
pub fn min_eig(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let e = SymmetricEigen::new(m.clone());
    let (idx, val) = e
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("nonempty matrix");
    (val, e.eigenvectors.column(idx).into_owned())
}

/// `|M|` for symmetric `M`, i.e. `V |Λ| Vᵀ`.
fn abs_sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(m.clone());
    let lam = DMatrix::from_diagonal(&e.eigenvalues.map(f64::abs));
    &e.eigenvectors * lam * e.eigenvectors.transpose()
}

/// Smallest eigenvalue of the pencil `(D, B)` for `B ≻ 0`, or `None` when
/// `B` is numerically singular.
fn normalized_min(d: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let e = SymmetricEigen::new(b.clone());
    let top = e.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if top <= 0.0 || e.eigenvalues.iter().any(|&l| l <= 1e-13 * top) {
        return None;
    }
    let inv_sqrt = DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let w = &e.eigenvectors * inv_sqrt * e.eigenvectors.transpose();
    let scaled = &w * d * &w;
    Some(min_eig(&((&scaled + scaled.transpose()) * 0.5)).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    HoldsEvidence,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::HoldsEvidence => "holds-evidence",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    /// Every margin is zero to within tolerance.
    Zero,
    /// Relative change over the last doubling below 10%.
    Stabilized,
    /// Raw margins keep shrinking but their ratio to the operand scale is
    /// stable, as for compact positive operators.
    NormalizedStable,
    /// Still moving at the finest resolution.
    Unsettled,
}

/// Counterexample direction: basis coefficients at resolution `n` with
/// `⟨x, (lhs − rhs) x⟩ = value < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: usize,
    pub coeffs: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IneqVerdict {
    pub ns: Vec<usize>,
    pub margins: Vec<f64>,
    /// Margins relative to `|lhs| + |rhs|`, where that is nonsingular.
    pub normalized: Vec<Option<f64>>,
    pub trend: Trend,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

/// Classify symmetric difference matrices `D_N = L_N − R_N`, supplied with
/// the scale matrix `|L_N| + |R_N|`, one per resolution.
pub(crate) fn classify(ns: &[usize], diffs: &[(DMatrix<f64>, DMatrix<f64>)], tol: f64) -> IneqVerdict {
    let mut margins = Vec::with_capacity(ns.len());
    let mut normalized = Vec::with_capacity(ns.len());
    let mut witness: Option<Witness> = None;
    for (&n, (d, scale)) in ns.iter().zip(diffs) {
        let (m, v) = min_eig(d);
        margins.push(m);
        normalized.push(normalized_min(d, scale));
        if m < -tol && witness.as_ref().is_none_or(|w| m < w.value) {
            witness = Some(Witness { n, coeffs: v.iter().cloned().collect(), value: m });
        }
    }
    let last = margins.len() - 1;
    let settled = |xs: &[f64]| {
        last == 0 || (xs[last] - xs[last - 1]).abs() < STABLE_REL * xs[last].abs()
    };
    let (trend, verdict) = if witness.is_some() {
        (Trend::Unsettled, Verdict::Violated)
    } else if margins.iter().all(|m| m.abs() < tol) {
        (Trend::Zero, Verdict::HoldsEvidence)
    } else if settled(&margins) {
        let v = if margins.iter().all(|&m| m >= tol) { Verdict::HoldsEvidence } else { Verdict::Inconclusive };
        (Trend::Stabilized, v)
    } else {
        let nz: Option<Vec<f64>> = normalized.iter().cloned().collect();
        match nz {
            Some(nz) if nz[last] > 0.0 && settled(&nz) => {
                let v = if margins.iter().all(|&m| m >= tol) { Verdict::HoldsEvidence } else { Verdict::Inconclusive };
                (Trend::NormalizedStable, v)
            }
            _ => (Trend::Unsettled, Verdict::Inconclusive),
        }
    };
    IneqVerdict { ns: ns.to_vec(), margins, normalized, trend, verdict, witness }
}

/// Relative asymmetry threshold for operands of inequality checks.
pub const SYMMETRY_TOL: f64 = 1e-9;

pub(crate) fn require_self_adjoint(p: &PiOp) -> Result<()> {
    let asym = p.asymmetry();
    if asym > SYMMETRY_TOL * p.max_abs_coeff().max(1.0) {
        return Err(Error::NotSelfAdjoint { asymmetry: asym });
    }
    Ok(())
}

/// Numerical evidence for `lhs ≽ rhs` over a ladder of resolutions.
pub fn check_op_ineq(lhs: &PiOp, rhs: &PiOp, ns: &[usize], tol: f64) -> Result<IneqVerdict> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::invalid("resolution list must be nonempty with every N ≥ 1"));
    }
    let diff = lhs.sub(rhs)?;
    require_self_adjoint(lhs)?;
    require_self_adjoint(rhs)?;
    let mut diffs = Vec::with_capacity(ns.len());
    for &n in ns {
        let l = project(lhs, n)?.symmetric();
        let r = project(rhs, n)?.symmetric();
        let d = project(&diff, n)?.symmetric();
        diffs.push((d, abs_sym(&l) + abs_sym(&r)));
    }
    Ok(classify(ns, &diffs, tol))
}

/// Condition number of a square matrix from its singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

/// `T_N`, `A_N` and `T_N⁻¹ A_N` at one resolution.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub n: usize,
    pub t: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub generator: DMatrix<f64>,
    pub basis: OrthoBasis,
}

pub fn discretize(sys: &PieSystem, n: usize) -> Result<Discretization> {
    let t = project(&sys.t, n)?;
    let a = project(&sys.a, n)?;
    let cond = condition_number(&t.matrix);
    if cond.is_nan() || cond >= MAX_COND {
        return Err(Error::SingularMass { cond });
    }
    let generator = t
        .matrix
        .clone()
        .lu()
        .solve(&a.matrix)
        .ok_or(Error::SingularMass { cond })?;
    Ok(Discretization { n, t: t.matrix, a: a.matrix, generator, basis: t.basis })
}

/// Generalized eigenvalues of `A_N v = λ T_N v`, rightmost first.
pub fn pencil_spectrum(sys: &PieSystem, n: usize) -> Result<Vec<Eigenvalue>> {
    let disc = discretize(sys, n)?;
    let mut eig: Vec<Eigenvalue> = disc
        .generator
        .complex_eigenvalues()
        .iter()
        .map(|z| Eigenvalue { re: z.re, im: z.im })
        .collect();
    eig.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(eig)
}
