//! From boundary conditions and differential dynamics to `T ẋ = A x`.
//!
//! For a component of differentiation order `n` with boundary conditions
//! `Σ_j α_ij (D^{j-1} u)(a) + β_ij (D^{j-1} u)(b) = 0`, the map `T` sends the
//! highest derivative `x = D^n u` back to `u`. It is an integral operator with
//! a polynomial kernel built from the Taylor matrix `W(b - a)` and the
//! boundary matrices `Na`, `Nb`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::pi::PiOp;
use crate::poly::{Domain, Poly1, Poly2};

/// Determinant threshold for well-posedness, relative to `max(1, ‖M‖_F)^n`.
pub const WELL_POSED_TOL: f64 = 1e-9;

/// Boundary conditions for one component of order `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BcSpec {
    pub n: usize,
    pub na: DMatrix<f64>,
    pub nb: DMatrix<f64>,
    pub domain: Domain,
}

/// Upper-triangular Taylor matrix: `W[i][j] = t^{j-i}/(j-i)!` for `j ≥ i`.
pub fn taylor_matrix(n: usize, t: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if j >= i { t.powi((j - i) as i32) / factorial(j - i) } else { 0.0 })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl BcSpec {
    pub fn new(na: DMatrix<f64>, nb: DMatrix<f64>, domain: Domain) -> Result<Self> {
        let n = na.nrows();
        if n == 0 || na.ncols() != n || nb.nrows() != n || nb.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "boundary matrices must both be n x n, got {}x{} and {}x{}",
                na.nrows(),
                na.ncols(),
                nb.nrows(),
                nb.ncols()
            )));
        }
        Ok(BcSpec { n, na, nb, domain })
    }

    /// Homogeneous Dirichlet conditions `u(a) = u(b) = 0` for order 2.
    pub fn dirichlet(domain: Domain) -> Self {
        BcSpec {
            n: 2,
            na: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            nb: DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
            domain,
        }
    }

    fn boundary_matrix(&self) -> DMatrix<f64> {
        &self.na + &self.nb * taylor_matrix(self.n, self.domain.length())
    }

    pub fn determinant(&self) -> f64 {
        self.boundary_matrix().determinant()
    }

    pub fn is_well_posed(&self) -> bool {
        let m = self.boundary_matrix();
        let scale = m.norm().max(1.0).powi(self.n as i32);
        m.determinant().abs() > WELL_POSED_TOL * scale
    }

    /// `P = (Na + Nb W)^{-1} Nb W`.
    pub fn projector(&self) -> Result<DMatrix<f64>> {
        if !self.is_well_posed() {
            return Err(Error::IllPosed { det: self.determinant() });
        }
        let w = taylor_matrix(self.n, self.domain.length());
        let m = &self.na + &self.nb * &w;
        let rhs = &self.nb * &w;
        m.lu().solve(&rhs).ok_or(Error::IllPosed { det: self.determinant() })
    }

    /// Boundary residuals `Σ_j α_ij (D^{j-1}u)(a) + β_ij (D^{j-1}u)(b)`.
    pub fn residuals(&self, u: &Poly1) -> Vec<f64> {
        let mut derivs = Vec::with_capacity(self.n);
        let mut p = u.clone();
        for _ in 0..self.n {
            derivs.push((p.eval(self.domain.a), p.eval(self.domain.b)));
            p = p.derivative();
        }
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| self.na[(i, j)] * derivs[j].0 + self.nb[(i, j)] * derivs[j].1)
                    .sum()
            })
            .collect()
    }
}

/// The fundamental-state map `T` with `D^n T x = x` and `T x` satisfying the
/// boundary conditions.
pub fn t_from_bc(bc: &BcSpec) -> Result<PiOp> {
    let p = bc.projector()?;
    let n = bc.n;
    let d = bc.domain;
    let a = d.a;
    // e1(s - a)_k = (s-a)^k / k!
    let shift = Poly1::new(vec![-a, 1.0], d);
    let mut e1 = Vec::with_capacity(n);
    let mut pw = Poly1::constant(1.0, d);
    for k in 0..n {
        e1.push(pw.scale(1.0 / factorial(k)));
        pw = &pw * &shift;
    }
    // en(a - θ)_l = (a-θ)^{n-1-l} / (n-1-l)!
    let rshift = Poly1::new(vec![a, -1.0], d);
    let mut pows = Vec::with_capacity(n);
    let mut pw = Poly1::constant(1.0, d);
    for k in 0..n {
        pows.push(pw.scale(1.0 / factorial(k)));
        pw = &pw * &rshift;
    }
    let en: Vec<Poly1> = (0..n).map(|l| pows[n - 1 - l].clone()).collect();

    let ident = DMatrix::<f64>::identity(n, n);
    let lower = &ident - &p;
    let mut r1 = Poly2::zero(d);
    let mut r2 = Poly2::zero(d);
    for k in 0..n {
        for l in 0..n {
            let outer = Poly2::outer(&e1[k], &en[l]);
            if lower[(k, l)] != 0.0 {
                r1 = &r1 + &outer.scale(lower[(k, l)]);
            }
            if p[(k, l)] != 0.0 {
                r2 = &r2 + &outer.scale(-p[(k, l)]);
            }
        }
    }
    PiOp::kernel(r1, r2)
}

/// `s`-derivative of a PI operator with zero multiplier: the jump of the
/// kernel across the diagonal becomes the new multiplier.
pub fn differentiate(p: &PiOp) -> Result<PiOp> {
    if !p.is_pi2() {
        return Err(Error::invalid("only operators with zero multiplier can be differentiated"));
    }
    let d = p.domain();
    let mut out = PiOp::zero(p.rows(), p.cols(), d);
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            let jump = &p.r1(i, j).diagonal() - &p.r2(i, j).diagonal();
            out.set(i, j, jump, p.r1(i, j).d_s(), p.r2(i, j).d_s());
        }
    }
    Ok(out)
}

/// `D^k ∘ T` for `0 ≤ k ≤ n`.
pub fn dk_of_t(bc: &BcSpec, k: usize) -> Result<PiOp> {
    if k > bc.n {
        return Err(Error::invalid(format!("derivative order {k} exceeds component order {}", bc.n)));
    }
    if k == bc.n {
        bc.projector()?;
        return Ok(PiOp::identity(1, bc.domain));
    }
    let t = t_from_bc(bc)?;
    let d = bc.domain;
    let mut op = t;
    for _ in 0..k {
        let next = differentiate(&op)?;
        // below order n the kernel is continuous across the diagonal
        op = PiOp::kernel(next.r1(0, 0).clone(), next.r2(0, 0).clone())?;
        debug_assert_eq!(op.domain(), d);
    }
    Ok(op)
}

/// One state component of a PDE system.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub name: String,
    pub order: usize,
    pub bc: Option<BcSpec>,
}

impl ComponentSpec {
    pub fn undifferentiated(name: impl Into<String>) -> Self {
        ComponentSpec { name: name.into(), order: 0, bc: None }
    }

    pub fn with_bc(name: impl Into<String>, bc: BcSpec) -> Self {
        ComponentSpec { name: name.into(), order: bc.n, bc: Some(bc) }
    }

    fn validate(&self) -> Result<()> {
        match (&self.bc, self.order) {
            (None, 0) => Ok(()),
            (Some(_), 0) => Err(Error::invalid(format!(
                "component {}: order 0 takes no boundary conditions",
                self.name
            ))),
            (None, n) => Err(Error::invalid(format!(
                "component {}: order {n} needs boundary conditions",
                self.name
            ))),
            (Some(bc), n) if bc.n != n => Err(Error::invalid(format!(
                "component {}: order {n} but {}x{} boundary matrices",
                self.name, bc.n, bc.n
            ))),
            _ => Ok(()),
        }
    }

    /// `D^k` applied to this component's PDE state, in terms of its PIE
    /// state.
    pub fn dk(&self, k: usize, domain: Domain) -> Result<PiOp> {
        match &self.bc {
            None if k == 0 => Ok(PiOp::identity(1, domain)),
            None => Err(Error::invalid(format!(
                "component {} has order 0; D^{k} is not available",
                self.name
            ))),
            Some(bc) => dk_of_t(bc, k),
        }
    }
}

/// `∂_t u_target += coeff(s) · D^k u_source`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynTerm {
    pub target: usize,
    pub source: usize,
    pub k: usize,
    pub coeff: Poly1,
}

/// A linear PDE system, first order in time.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSystem {
    pub domain: Domain,
    pub components: Vec<ComponentSpec>,
    pub dynamics: Vec<DynTerm>,
}

/// Per-component bookkeeping carried alongside `T` and `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentMeta {
    pub name: String,
    pub order: usize,
    pub projector: Option<DMatrix<f64>>,
}

/// `T ẋ = A x` together with the component map.
#[derive(Debug, Clone, PartialEq)]
pub struct PieSystem {
    pub t: PiOp,
    pub a: PiOp,
    pub meta: Vec<ComponentMeta>,
}

impl PieSystem {
    pub fn dim(&self) -> usize {
        self.t.rows()
    }

    pub fn domain(&self) -> Domain {
        self.t.domain()
    }
}

pub fn assemble_pie(sys: &PdeSystem) -> Result<PieSystem> {
    let d = sys.domain;
    let nc = sys.components.len();
    if nc == 0 {
        return Err(Error::invalid("system has no components"));
    }
    let mut t_blocks = Vec::with_capacity(nc);
    let mut meta = Vec::with_capacity(nc);
    for c in &sys.components {
        c.validate()?;
        match &c.bc {
            None => {
                t_blocks.push(PiOp::identity(1, d));
                meta.push(ComponentMeta { name: c.name.clone(), order: 0, projector: None });
            }
            Some(bc) => {
                d.check(&bc.domain)?;
                t_blocks.push(t_from_bc(bc)?);
                meta.push(ComponentMeta {
                    name: c.name.clone(),
                    order: c.order,
                    projector: Some(bc.projector()?),
                });
            }
        }
    }
    let t = PiOp::block_diag(&t_blocks)?;

    let mut a = PiOp::zero(nc, nc, d);
    for term in &sys.dynamics {
        if term.target >= nc || term.source >= nc {
            return Err(Error::invalid(format!(
                "dynamics term references component {} of {nc}",
                term.target.max(term.source)
            )));
        }
        let src = &sys.components[term.source];
        if term.k > src.order {
            return Err(Error::invalid(format!(
                "dynamics uses D^{} of component {} which has order {}",
                term.k, src.name, src.order
            )));
        }
        let op = src.dk(term.k, d)?.mul_left_poly(&term.coeff)?;
        let (i, j) = (term.target, term.source);
        let cur = a.entry(i, j).add(&op)?;
        a.set(i, j, cur.r0(0, 0).clone(), cur.r1(0, 0).clone(), cur.r2(0, 0).clone());
    }
    Ok(PieSystem { t, a, meta })
}

/// Heat equation `u_t = u_ss + λu` on `[0, 1]` with Dirichlet conditions.
pub fn heat_system(lambda: f64) -> PdeSystem {
    let d = Domain::unit();
    let mut dynamics = vec![DynTerm { target: 0, source: 0, k: 2, coeff: Poly1::constant(1.0, d) }];
    if lambda != 0.0 {
        dynamics.push(DynTerm { target: 0, source: 0, k: 0, coeff: Poly1::constant(lambda, d) });
    }
    PdeSystem {
        domain: d,
        components: vec![ComponentSpec::with_bc("u", BcSpec::dirichlet(d))],
        dynamics,
    }
}

/// Wave equation `u_tt = u_ss` on `[0, 1]` with `u(0) = 0`, `u_s(1) = 0`,
/// written as the pair `(u_t, u)`.
pub fn wave_system() -> PdeSystem {
    let d = Domain::unit();
    let bc = BcSpec {
        n: 2,
        na: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
        nb: DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]),
        domain: d,
    };
    PdeSystem {
        domain: d,
        components: vec![ComponentSpec::undifferentiated("ut"), ComponentSpec::with_bc("u", bc)],
        dynamics: vec![
            DynTerm { target: 0, source: 1, k: 2, coeff: Poly1::constant(1.0, d) },
            DynTerm { target: 1, source: 0, k: 0, coeff: Poly1::constant(1.0, d) },
        ],
    }
}
