//! Verification of certificate candidates against the stability notions.
//!
//! Each condition is brought to the form `U + t·W ≽ 0` with one scalar `t`
//! to optimize. The operator is split into independent diagonal blocks;
//! blocks that are exactly zero or constant multipliers are settled in
//! closed form, the rest by bisection on Galerkin margins.

pub mod expr;
pub mod notion;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::{self, IneqVerdict, Verdict, Witness, DEFAULT_NS, DEFAULT_TOL};
use crate::pde::PieSystem;
use crate::pi::{PiOp, KERNEL_TOL};

pub use expr::{parse, Expr};
pub use notion::{conditions_for, table_row, Class, Condition, Direction, Family, Form, Kind, Notion, Operand, Slot, TableRow, Variant};

/// Largest slot magnitude explored by bisection.
pub const SLOT_CAP: f64 = 1e8;
/// Slots `ε`, `α` at or below this are treated as zero.
pub const SLOT_FLOOR: f64 = 1e-6;
/// Relative bisection precision.
pub const SLOT_REL: f64 = 1e-6;

const EVIDENCE_NOTE: &str = "operator inequalities other than exact identities are supported by \
     Galerkin evidence only: compressions can refute an inequality but cannot prove it";

/// A certificate operator given as an expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub form: Form,
    pub expr: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, Vec<f64>>,
}

impl Candidate {
    pub fn new(name: impl Into<String>, form: Form, expr: impl Into<String>) -> Result<Self> {
        let c = Candidate {
            name: name.into(),
            form,
            expr: expr.into(),
            params: BTreeMap::new(),
            grid: BTreeMap::new(),
        };
        c.parsed()?;
        Ok(c)
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }

    pub fn with_grid(mut self, name: impl Into<String>, values: Vec<f64>) -> Self {
        self.grid.insert(name.into(), values);
        self
    }

    pub fn parsed(&self) -> Result<Expr> {
        parse(&self.expr)
    }

    /// Parameters referenced by the expression but not fixed.
    pub fn free_params(&self) -> Result<Vec<String>> {
        Ok(self.parsed()?.params().into_iter().filter(|p| !self.params.contains_key(p)).collect())
    }

    /// The operator `P` or `Q`, with `overrides` taking precedence over the
    /// fixed parameters.
    pub fn operator(&self, sys: &PieSystem, overrides: &BTreeMap<String, f64>) -> Result<PiOp> {
        let mut params = self.params.clone();
        params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
        let env = expr::Env { t: &sys.t, a: &sys.a, params: &params };
        let op = self.parsed()?.eval(&env)?.into_op()?;
        if op.rows() != sys.dim() || op.cols() != sys.dim() {
            return Err(Error::DimensionMismatch(format!(
                "candidate {} is {}x{}, system has {} components",
                self.name,
                op.rows(),
                op.cols(),
                sys.dim()
            )));
        }
        Ok(op)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertOptions {
    pub ns: Vec<usize>,
    pub tol: f64,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions { ns: DEFAULT_NS.to_vec(), tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionVerdict {
    /// Closed symbolically or holds for every candidate of the form.
    Exact,
    HoldsEvidence,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertVerdict {
    Refuted,
    Inconclusive,
    CertifiedEvidence,
}

impl std::fmt::Display for CertVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CertVerdict::Refuted => "refuted",
            CertVerdict::Inconclusive => "inconclusive",
            CertVerdict::CertifiedEvidence => "certified-evidence",
        })
    }
}

/// Best slot value at one resolution; `None` if infeasible there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotSample {
    pub n: usize,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub text: String,
    pub verdict: ConditionVerdict,
    pub exact: bool,
    /// Achieved `ε*`, `α*` (largest) or `C*` (smallest).
    pub value: Option<f64>,
    /// The slot is unconstrained in its favourable direction.
    pub unbounded: bool,
    pub per_n: Vec<SlotSample>,
    /// Slot value at which the ladder check ran.
    pub checked_at: Option<f64>,
    pub evidence: Vec<IneqVerdict>,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub notion: Notion,
    pub form: Form,
    pub candidate: String,
    pub params: BTreeMap<String, f64>,
    pub verdict: CertVerdict,
    /// Every condition closed symbolically.
    pub exact: bool,
    pub epsilon: Option<f64>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub n_used: usize,
    pub conditions: Vec<ConditionReport>,
    pub notes: Vec<String>,
}

impl CertReport {
    pub fn slot(&self, slot: Slot) -> Option<f64> {
        match slot {
            Slot::Epsilon => self.epsilon,
            Slot::Alpha => self.alpha,
            Slot::C => self.c,
        }
    }
}

struct Operands {
    v: PiOp,
    tpt: Option<PiOp>,
    tt: PiOp,
    deriv: PiOp,
    ident: PiOp,
    zero: PiOp,
}

impl Operands {
    fn build(sys: &PieSystem, form: Form, op: &PiOp) -> Result<Self> {
        let t = &sys.t;
        let a = &sys.a;
        let ts = t.adjoint();
        let (v, tpt, deriv) = match form {
            Form::Q => {
                let qt = op.compose(t)?;
                galerkin::require_self_adjoint(&qt)?;
                let qa = op.compose(a)?;
                (qt, None, qa.plus_adjoint()?)
            }
            Form::P => {
                galerkin::require_self_adjoint(op)?;
                let tp = ts.compose(op)?;
                let tpa = tp.compose(a)?;
                (op.clone(), Some(tp.compose(t)?), tpa.plus_adjoint()?)
            }
        };
        let d = t.domain();
        Ok(Operands {
            v,
            tpt,
            tt: ts.compose(t)?,
            deriv,
            ident: PiOp::identity(t.rows(), d),
            zero: PiOp::zero(t.rows(), t.rows(), d),
        })
    }

    fn get(&self, o: Operand) -> &PiOp {
        match o {
            Operand::QT | Operand::P => &self.v,
            Operand::TPT => self.tpt.as_ref().unwrap_or(&self.v),
            Operand::TT => &self.tt,
            Operand::I => &self.ident,
            Operand::Zero => &self.zero,
            Operand::QDeriv | Operand::PDeriv => &self.deriv,
        }
    }
}

/// Connected components of the coupling pattern of `ops`.
fn diagonal_groups(ops: &[&PiOp]) -> Vec<Vec<usize>> {
    let n = ops[0].rows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for op in ops {
        for i in 0..n {
            for j in 0..n {
                if i != j && op.entry(i, j).max_abs_coeff() > KERNEL_TOL {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `sup { t : u + t w ≽ 0 }` for constant symmetric matrices, when `w` is
/// zero or negative definite. `Some(None)` means infeasible for every `t`.
fn constant_sup(u: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<Option<f64>> {
    let (u, w) = (sym(u), sym(w));
    if w.amax() == 0.0 {
        let lmin = SymmetricEigen::new(u.clone()).eigenvalues.min();
        return Some(if lmin >= -KERNEL_TOL { Some(f64::INFINITY) } else { None });
    }
    let e = SymmetricEigen::new(-w);
    if e.eigenvalues.min() <= 0.0 {
        return None;
    }
    let inv_sqrt = &e.eigenvectors
        * DMatrix::from_diagonal(&e.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * e.eigenvectors.transpose();
    Some(Some(SymmetricEigen::new(sym(&(&inv_sqrt * u * &inv_sqrt))).eigenvalues.min()))
}

/// Compressions of one numeric block across the ladder.
struct NumericBlock {
    idx: Vec<usize>,
    u: Vec<DMatrix<f64>>,
    w: Vec<DMatrix<f64>>,
    scale_u: Vec<DMatrix<f64>>,
    scale_w: Vec<DMatrix<f64>>,
}

fn abs_sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(m.clone());
    &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f64::abs)) * e.eigenvectors.transpose()
}

impl NumericBlock {
    fn new(idx: Vec<usize>, u: &PiOp, w: &PiOp, ns: &[usize]) -> Result<Self> {
        let (ub, wb) = (u.principal(&idx), w.principal(&idx));
        let mut out = NumericBlock { idx, u: vec![], w: vec![], scale_u: vec![], scale_w: vec![] };
        for &n in ns {
            let cu = sym(&galerkin::project(&ub, n)?.matrix);
            let cw = sym(&galerkin::project(&wb, n)?.matrix);
            out.scale_u.push(abs_sym(&cu));
            out.scale_w.push(abs_sym(&cw));
            out.u.push(cu);
            out.w.push(cw);
        }
        Ok(out)
    }

    fn margin(&self, k: usize, t: f64) -> f64 {
        galerkin::min_eig(&(&self.u[k] + &self.w[k] * t)).0
    }

    /// Largest `t` with margin ≥ tol at ladder index `k`; `None` if even the
    /// start point fails, `+∞` past the cap.
    fn sup(&self, k: usize, start: &[f64], tol: f64) -> Option<f64> {
        let mut lo = *start.iter().find(|&&t| self.margin(k, t) >= tol)?;
        let mut step = lo.abs().max(1.0);
        let hi = loop {
            let hi = lo + step;
            if hi.abs() > SLOT_CAP {
                return Some(f64::INFINITY);
            }
            if self.margin(k, hi) < tol {
                break hi;
            }
            lo = hi;
            step *= 2.0;
        };
        let mut hi = hi;
        while hi - lo > SLOT_REL * lo.abs().max(SLOT_FLOOR) {
            let mid = 0.5 * (lo + hi);
            if self.margin(k, mid) >= tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    fn check(&self, ns: &[usize], t: f64, tol: f64) -> IneqVerdict {
        let diffs: Vec<_> = (0..ns.len())
            .map(|k| (&self.u[k] + &self.w[k] * t, &self.scale_u[k] + &self.scale_w[k] * t.abs()))
            .collect();
        galerkin::classify(ns, &diffs, tol)
    }

    /// Witness coefficients lifted from the block to all components.
    fn lift(&self, w: Witness, dim: usize) -> Witness {
        let n = w.n;
        let mut coeffs = vec![0.0; dim * n];
        for (b, &comp) in self.idx.iter().enumerate() {
            coeffs[comp * n..(comp + 1) * n].copy_from_slice(&w.coeffs[b * n..(b + 1) * n]);
        }
        Witness { n, coeffs, value: w.value }
    }
}

fn evaluate_condition(c: &Condition, ops: &Operands, opts: &CertOptions) -> Result<ConditionReport> {
    let x = ops.get(c.lhs);
    let y = ops.get(c.rhs);
    let text = c.to_string();
    let mut rep = ConditionReport {
        condition: *c,
        text,
        verdict: ConditionVerdict::Inconclusive,
        exact: false,
        value: None,
        unbounded: false,
        per_n: vec![],
        checked_at: None,
        evidence: vec![],
        witness: None,
        notes: vec![],
    };
    if c.automatic {
        rep.verdict = ConditionVerdict::Exact;
        rep.exact = true;
        // T*PT ≼ ‖P‖ T*T, so the P-form constant is the bound on P itself
        let (bounded, name) = if c.lhs == Operand::TPT { (&ops.v, Operand::P) } else { (x, c.lhs) };
        rep.value = Some(bounded.norm_bound());
        rep.notes.push(format!("holds for every candidate; C = norm bound of {name}"));
        return Ok(rep);
    }
    // F(t) = U + t W ≽ 0, maximizing t; for C the slot is -t.
    let (u, w, sign) = match (c.kind, c.slot) {
        (Kind::Positivity, _) => (x.clone(), y.scale(-1.0), 1.0),
        (Kind::Negativity, _) => (x.scale(-1.0), y.scale(-1.0), 1.0),
        (Kind::Bound, _) => (x.scale(-1.0), y.scale(-1.0), -1.0),
    };
    let slotted = c.slot.is_some();
    let w = if slotted { w } else { PiOp::zero(u.rows(), u.cols(), u.domain()) };
    let dim = u.rows();
    let ns = &opts.ns;
    let kmax = ns.len() - 1;

    if u.max_abs_coeff() <= KERNEL_TOL && w.max_abs_coeff() <= KERNEL_TOL {
        rep.exact = true;
        rep.verdict = ConditionVerdict::Exact;
        rep.notes.push(format!("{} exact zero", c.lhs));
        if slotted {
            rep.unbounded = true;
        }
        return Ok(rep);
    }

    // closed-form blocks give a bound on t; numeric ones a bound per N
    let mut exact_sup = f64::INFINITY;
    let mut exact_all = true;
    let mut numeric = Vec::new();
    for g in diagonal_groups(&[&u, &w]) {
        let (ug, wg) = (u.principal(&g), w.principal(&g));
        let closed = if ug.is_constant_multiplier() && wg.is_constant_multiplier() {
            constant_sup(&ug.constant_part(), &wg.constant_part())
        } else {
            None
        };
        match closed {
            Some(Some(t)) => exact_sup = exact_sup.min(t),
            Some(None) => exact_sup = f64::NEG_INFINITY,
            None => {
                exact_all = false;
                numeric.push(NumericBlock::new(g, &u, &w, ns)?);
            }
        }
    }

    // t is the slot for ε and α and -C for bounds
    let starts: Vec<f64> = if sign > 0.0 {
        vec![0.0]
    } else {
        std::iter::successors(Some(-1.0f64), |t| Some(t * 2.0)).take_while(|t| t.abs() <= SLOT_CAP).collect()
    };
    let mut per_n = Vec::with_capacity(ns.len());
    for k in 0..ns.len() {
        let mut t = exact_sup;
        for b in &numeric {
            t = t.min(b.sup(k, &starts, opts.tol).unwrap_or(f64::NEG_INFINITY));
        }
        per_n.push(t);
    }
    let t_star = per_n[kmax];
    let to_slot = |t: f64| if t.is_finite() { Some(sign * t) } else { None };
    rep.per_n = ns.iter().zip(&per_n).map(|(&n, &t)| SlotSample { n, value: to_slot(t) }).collect();
    rep.unbounded = t_star == f64::INFINITY && slotted;

    let feasible = if !slotted {
        t_star >= 0.0
    } else if sign > 0.0 {
        t_star > SLOT_FLOOR
    } else {
        t_star > f64::NEG_INFINITY
    };
    if slotted && feasible {
        rep.value = to_slot(t_star);
    }

    if exact_all {
        if feasible {
            rep.exact = true;
            rep.verdict = ConditionVerdict::Exact;
            rep.notes.push("closed form on constant blocks".into());
            return Ok(rep);
        }
        // infeasible in closed form; compress everything for a witness
        numeric = diagonal_groups(&[&u, &w])
            .into_iter()
            .map(|g| NumericBlock::new(g, &u, &w, ns))
            .collect::<Result<_>>()?;
    }

    let t_check = if !slotted {
        0.0
    } else if !feasible {
        if sign > 0.0 {
            SLOT_FLOOR
        } else {
            -SLOT_CAP
        }
    } else if sign > 0.0 {
        if t_star.is_finite() {
            0.5 * t_star
        } else {
            1.0
        }
    } else {
        t_star - t_star.abs().max(1e-3)
    };
    if slotted {
        rep.checked_at = Some(sign * t_check);
    }
    let mut any_violated = false;
    let mut all_hold = true;
    for b in &numeric {
        let mut v = b.check(ns, t_check, opts.tol);
        if let Some(wit) = v.witness.take() {
            v.witness = Some(b.lift(wit, dim));
        }
        match v.verdict {
            Verdict::Violated => {
                any_violated = true;
                all_hold = false;
                if rep.witness.as_ref().is_none_or(|w| v.witness.as_ref().is_some_and(|x| x.value < w.value)) {
                    rep.witness = v.witness.clone();
                }
            }
            Verdict::Inconclusive => all_hold = false,
            Verdict::HoldsEvidence => {}
        }
        rep.evidence.push(v);
    }

    // refinement stability of the numeric slot
    let settled = !slotted || !feasible || {
        let prev = per_n[kmax.saturating_sub(1)];
        kmax == 0
            || !t_star.is_finite()
            || (prev.is_finite() && (prev - t_star).abs() <= galerkin::STABLE_REL * t_star.abs())
            || t_star == exact_sup
    };
    if !settled {
        rep.notes.push(format!(
            "{} changes by more than {}% over the last doubling",
            c.slot.map(Slot::symbol).unwrap_or("slot"),
            galerkin::STABLE_REL * 100.0
        ));
    }
    rep.verdict = if any_violated {
        ConditionVerdict::Violated
    } else if feasible && all_hold && settled {
        ConditionVerdict::HoldsEvidence
    } else {
        ConditionVerdict::Inconclusive
    };
    if !feasible && !any_violated {
        rep.notes.push("no admissible slot value at the finest resolution, but no witness either".into());
    }
    Ok(rep)
}

/// Check every condition of `notion` for the candidate at its fixed
/// parameters.
pub fn verify_candidate(sys: &PieSystem, notion: Notion, cand: &Candidate, opts: &CertOptions) -> Result<CertReport> {
    verify_with(sys, notion, cand, &BTreeMap::new(), opts)
}

fn verify_with(
    sys: &PieSystem,
    notion: Notion,
    cand: &Candidate,
    overrides: &BTreeMap<String, f64>,
    opts: &CertOptions,
) -> Result<CertReport> {
    if opts.ns.is_empty() || opts.ns.contains(&0) {
        return Err(Error::invalid("resolution list must be nonempty with every N ≥ 1"));
    }
    let conds = conditions_for(notion, cand.form)?;
    let op = cand.operator(sys, overrides)?;
    let ops = Operands::build(sys, cand.form, &op)?;
    let conditions = conds.iter().map(|c| evaluate_condition(c, &ops, opts)).collect::<Result<Vec<_>>>()?;

    let verdict = if conditions.iter().any(|c| c.verdict == ConditionVerdict::Violated) {
        CertVerdict::Refuted
    } else if conditions
        .iter()
        .all(|c| matches!(c.verdict, ConditionVerdict::Exact | ConditionVerdict::HoldsEvidence))
    {
        CertVerdict::CertifiedEvidence
    } else {
        CertVerdict::Inconclusive
    };
    let slot = |s: Slot| conditions.iter().find(|c| c.condition.slot == Some(s)).and_then(|c| c.value);
    let mut params = cand.params.clone();
    params.extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(CertReport {
        notion,
        form: cand.form,
        candidate: cand.name.clone(),
        params,
        verdict,
        exact: conditions.iter().all(|c| c.exact),
        epsilon: slot(Slot::Epsilon),
        alpha: slot(Slot::Alpha),
        c: slot(Slot::C),
        n_used: *opts.ns.last().expect("nonempty"),
        conditions,
        notes: vec![EVIDENCE_NOTE.to_string()],
    })
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: CertReport,
    pub params: BTreeMap<String, f64>,
    /// Every grid point with its verdict, in evaluation order.
    pub evaluated: Vec<(BTreeMap<String, f64>, CertVerdict)>,
}

/// Ranking metric: `α*` for decay notions, `ε*` for Lyapunov ones.
fn metric(r: &CertReport) -> f64 {
    let v = match r.notion.family {
        Family::Lyapunov => r.epsilon,
        _ => r.alpha,
    };
    v.unwrap_or(f64::NEG_INFINITY)
}

/// `a` ranks strictly above `b`.
fn better(a: &CertReport, b: &CertReport) -> bool {
    if a.verdict != b.verdict {
        return a.verdict > b.verdict;
    }
    let (x, y) = (metric(a), metric(b));
    if x == y || (x - y).abs() <= 1e-6 * x.abs().max(y.abs()) {
        return false;
    }
    x > y
}

/// Exhaustive search over the candidate's grid (extended by `grid`).
/// Points are visited in lexicographic order of the parameter vector, so
/// keeping the first of equally ranked points breaks ties toward the
/// smallest vector.
pub fn scalar_search(
    sys: &PieSystem,
    notion: Notion,
    template: &Candidate,
    grid: &BTreeMap<String, Vec<f64>>,
    opts: &CertOptions,
) -> Result<SearchResult> {
    let mut axes = template.grid.clone();
    axes.extend(grid.iter().map(|(k, v)| (k.clone(), v.clone())));
    if axes.is_empty() || axes.values().any(Vec::is_empty) {
        return Err(Error::invalid("scalar search needs a nonempty grid for every parameter"));
    }
    for p in template.free_params()? {
        if !axes.contains_key(&p) {
            return Err(Error::invalid(format!("parameter '{p}' has no value and no grid")));
        }
    }
    let names: Vec<String> = axes.keys().cloned().collect();
    let mut lists: Vec<Vec<f64>> = axes.into_values().collect();
    for l in &mut lists {
        l.sort_by(f64::total_cmp);
        l.dedup();
    }
    let total: usize = lists.iter().map(Vec::len).product();
    let mut best: Option<(CertReport, BTreeMap<String, f64>)> = None;
    let mut evaluated = Vec::with_capacity(total);
    let mut first_err = None;
    let mut index = vec![0usize; lists.len()];
    for _ in 0..total {
        let point: BTreeMap<String, f64> =
            names.iter().zip(&index).zip(&lists).map(|((n, &i), l)| (n.clone(), l[i])).collect();
        match verify_with(sys, notion, template, &point, opts) {
            Ok(rep) => {
                evaluated.push((point.clone(), rep.verdict));
                if best.as_ref().is_none_or(|(b, _)| better(&rep, b)) {
                    best = Some((rep, point));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
        for d in (0..index.len()).rev() {
            index[d] += 1;
            if index[d] < lists[d].len() {
                break;
            }
            index[d] = 0;
        }
    }
    match best {
        Some((best, params)) => Ok(SearchResult { best, params, evaluated }),
        None => Err(first_err.unwrap_or_else(|| Error::invalid("empty grid"))),
    }
}

/// Notions that follow from the certified ones through the direction
/// hierarchy, each paired with a certified notion implying it.
pub fn implied_certified(reports: &[CertReport]) -> Vec<(Notion, Notion)> {
    let mut out: Vec<(Notion, Notion)> = Vec::new();
    for r in reports.iter().filter(|r| r.verdict == CertVerdict::CertifiedEvidence) {
        for m in r.notion.implied() {
            if !out.iter().any(|(n, _)| n.base() == m.base()) {
                out.push((m, r.notion));
            }
        }
    }
    out
}
