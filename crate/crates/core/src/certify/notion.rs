//! Stability notions and the operator inequalities that certify them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Lyapunov,
    Exponential,
    FiniteEnergy,
}

/// Which norm is bounded by which: `Pie2Pde` bounds `‖Tx(t)‖` by `‖x(0)‖`,
/// and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Pie2Pde,
    Pie,
    Pde,
    Pde2Pie,
}

/// Negativity strength for exponential notions: decay relative to the
/// Lyapunov function itself, or relative to a fixed norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    QtNegativity,
    IdentityNegativity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Notion {
    pub family: Family,
    pub direction: Direction,
    pub variant: Option<Variant>,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Lyapunov, Family::Exponential, Family::FiniteEnergy];

    fn tag(self) -> &'static str {
        match self {
            Family::Lyapunov => "lyap",
            Family::Exponential => "exp",
            Family::FiniteEnergy => "fe",
        }
    }
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Pie2Pde, Direction::Pie, Direction::Pde, Direction::Pde2Pie];

    fn tag(self) -> &'static str {
        match self {
            Direction::Pie2Pde => "pie2pde",
            Direction::Pie => "pie",
            Direction::Pde => "pde",
            Direction::Pde2Pie => "pde2pie",
        }
    }

    /// Directions implied by this one within a family.
    pub fn implies(self) -> &'static [Direction] {
        match self {
            Direction::Pie2Pde => &[],
            Direction::Pie | Direction::Pde => &[Direction::Pie2Pde],
            Direction::Pde2Pie => &[Direction::Pie, Direction::Pde, Direction::Pie2Pde],
        }
    }
}

impl Notion {
    pub fn new(family: Family, direction: Direction, variant: Option<Variant>) -> Result<Self> {
        match (family, variant) {
            (Family::Exponential, None) => Err(Error::invalid("exponential notions need a variant")),
            (Family::Exponential, Some(_)) | (_, None) => Ok(Notion { family, direction, variant }),
            (_, Some(_)) => Err(Error::invalid("only exponential notions take a variant")),
        }
    }

    pub fn lyapunov(direction: Direction) -> Self {
        Notion { family: Family::Lyapunov, direction, variant: None }
    }

    pub fn exponential(direction: Direction, variant: Variant) -> Self {
        Notion { family: Family::Exponential, direction, variant: Some(variant) }
    }

    pub fn finite_energy(direction: Direction) -> Self {
        Notion { family: Family::FiniteEnergy, direction, variant: None }
    }

    /// The twelve notions, with both exponential variants: sixteen entries.
    pub fn all() -> Vec<Notion> {
        let mut out = Vec::with_capacity(16);
        for d in Direction::ALL {
            out.push(Notion::lyapunov(d));
        }
        for v in [Variant::IdentityNegativity, Variant::QtNegativity] {
            for d in Direction::ALL {
                out.push(Notion::exponential(d, v));
            }
        }
        for d in Direction::ALL {
            out.push(Notion::finite_energy(d));
        }
        out
    }

    /// Same notion with the variant dropped, for comparing stability claims
    /// regardless of how they were certified.
    pub fn base(&self) -> (Family, Direction) {
        (self.family, self.direction)
    }

    /// Notions implied by this one through the direction hierarchy.
    pub fn implied(&self) -> Vec<Notion> {
        self.direction
            .implies()
            .iter()
            .map(|&direction| Notion { direction, ..*self })
            .collect()
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family.tag(), self.direction.tag())?;
        match self.variant {
            Some(Variant::QtNegativity) => f.write_str("-qt"),
            Some(Variant::IdentityNegativity) => f.write_str("-id"),
            None => Ok(()),
        }
    }
}

impl FromStr for Notion {
    type Err = Error;

    /// `{lyap|exp|fe}-{pie2pde|pie|pde|pde2pie}`, with an optional `-qt` or
    /// `-id` suffix on exponential notions; a bare `exp-*` means `-id`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::invalid(format!(
                "unknown notion '{s}'; expected {{lyap|exp|fe}}-{{pie2pde|pie|pde|pde2pie}}[-qt|-id]"
            ))
        };
        let mut parts = s.trim().split('-');
        let family = match parts.next() {
            Some("lyap") => Family::Lyapunov,
            Some("exp") => Family::Exponential,
            Some("fe") => Family::FiniteEnergy,
            _ => return Err(bad()),
        };
        let direction = match parts.next() {
            Some("pie2pde") => Direction::Pie2Pde,
            Some("pie") => Direction::Pie,
            Some("pde") => Direction::Pde,
            Some("pde2pie") => Direction::Pde2Pie,
            _ => return Err(bad()),
        };
        let variant = match parts.next() {
            None if family == Family::Exponential => Some(Variant::IdentityNegativity),
            None => None,
            Some("qt") => Some(Variant::QtNegativity),
            Some("id") => Some(Variant::IdentityNegativity),
            Some(_) => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Notion::new(family, direction, variant).map_err(|_| bad())
    }
}

impl Serialize for Notion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Notion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which Lyapunov function the candidate parameterizes:
/// `P` gives `V(x) = ⟨Tx, P Tx⟩`, `Q` gives `V(x) = ⟨x, Q T x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    P,
    Q,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::P => "P",
            Form::Q => "Q",
        })
    }
}

/// Operators appearing in the conditions. `V` is the operator of the
/// Lyapunov function (`QT` or `P`), `Vdot` that of its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operand {
    /// `QT`
    QT,
    /// `P`
    P,
    /// `T*PT`
    TPT,
    /// `T*T`
    TT,
    /// `I`
    I,
    /// `0`
    Zero,
    /// `QA + A*Q*`
    QDeriv,
    /// `T*PA + A*PT`
    PDeriv,
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operand::QT => "QT",
            Operand::P => "P",
            Operand::TPT => "T*PT",
            Operand::TT => "T*T",
            Operand::I => "I",
            Operand::Zero => "0",
            Operand::QDeriv => "QA + A*Q*",
            Operand::PDeriv => "T*PA + A*PT",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Positivity,
    Bound,
    Negativity,
}

/// Strength class of a condition, stated for the Lyapunov function `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    /// Bounded by the PIE-state norm `‖x‖²`.
    Pie,
    /// Bounded by the PDE-state norm `‖Tx‖²`.
    Pde,
    /// Sign condition only.
    Semidefinite,
    /// `V̇ ≤ −αV`.
    Lyapunov,
}

/// Scalar unknown of a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Epsilon,
    Alpha,
    C,
}

impl Slot {
    pub fn symbol(self) -> &'static str {
        match self {
            Slot::Epsilon => "ε",
            Slot::Alpha => "α",
            Slot::C => "C",
        }
    }
}

/// One operator inequality: `lhs ≽ ε rhs` (positivity), `lhs ≼ C rhs`
/// (bound) or `lhs ≼ −α rhs` (negativity); without a slot the scalar is 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub kind: Kind,
    pub class: Class,
    pub lhs: Operand,
    pub rhs: Operand,
    pub slot: Option<Slot>,
    /// Holds for every candidate of this form; no check needed.
    pub automatic: bool,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scaled = |f: &mut fmt::Formatter<'_>, sign: &str| match self.slot {
            Some(s) if self.rhs == Operand::I => write!(f, "{sign}{}I", s.symbol()),
            Some(s) => write!(f, "{sign}{}{}", s.symbol(), self.rhs),
            None => f.write_str("0"),
        };
        match self.kind {
            Kind::Positivity => {
                write!(f, "{} ≽ ", self.lhs)?;
                scaled(f, "")
            }
            Kind::Bound => {
                write!(f, "{} ≼ ", self.lhs)?;
                scaled(f, "")
            }
            Kind::Negativity => {
                write!(f, "{} ≼ ", self.lhs)?;
                scaled(f, "−")
            }
        }?;
        if self.automatic {
            f.write_str(" (automatic)")?;
        }
        Ok(())
    }
}

fn cond(kind: Kind, class: Class, lhs: Operand, rhs: Operand, slot: Option<Slot>) -> Condition {
    Condition { kind, class, lhs, rhs, slot, automatic: false }
}

fn pos(form: Form, class: Class) -> Condition {
    use Operand::*;
    let lhs = if form == Form::P { P } else { QT };
    match (form, class) {
        (_, Class::Semidefinite) => cond(Kind::Positivity, class, lhs, Zero, None),
        // V = ⟨Tx, PTx⟩ ≥ ε‖Tx‖² follows from P ≽ εI
        (Form::P, _) => cond(Kind::Positivity, class, P, I, Some(Slot::Epsilon)),
        (Form::Q, Class::Pde) => cond(Kind::Positivity, class, QT, TT, Some(Slot::Epsilon)),
        (Form::Q, _) => cond(Kind::Positivity, class, QT, I, Some(Slot::Epsilon)),
    }
}

fn bound(form: Form, class: Class) -> Condition {
    use Operand::*;
    match (form, class) {
        // T*PT ≼ ‖P‖ T*T for every bounded P
        (Form::P, _) => Condition {
            automatic: true,
            ..cond(Kind::Bound, Class::Pde, TPT, TT, Some(Slot::C))
        },
        // ⟨x, QTx⟩ ≤ ‖QT‖ ‖x‖² for every bounded Q
        (Form::Q, Class::Pie) => Condition { automatic: true, ..cond(Kind::Bound, class, QT, I, Some(Slot::C)) },
        (Form::Q, _) => cond(Kind::Bound, class, QT, TT, Some(Slot::C)),
    }
}

fn neg(form: Form, class: Class) -> Condition {
    use Operand::*;
    let lhs = if form == Form::P { PDeriv } else { QDeriv };
    match class {
        Class::Semidefinite => cond(Kind::Negativity, class, lhs, Zero, None),
        Class::Pde => cond(Kind::Negativity, class, lhs, TT, Some(Slot::Alpha)),
        Class::Pie => cond(Kind::Negativity, class, lhs, I, Some(Slot::Alpha)),
        Class::Lyapunov => {
            let v = if form == Form::P { TPT } else { QT };
            cond(Kind::Negativity, class, lhs, v, Some(Slot::Alpha))
        }
    }
}

/// The operator inequalities whose joint feasibility implies `notion` for a
/// candidate of the given form.
pub fn conditions_for(notion: Notion, form: Form) -> Result<Vec<Condition>> {
    use Class::*;
    use Direction as D;
    use Family as F;
    if form == Form::P && notion.direction != D::Pde {
        return Err(Error::UnsupportedPairing(format!(
            "{notion} has no P-form conditions (P-form is defined for the pde direction only); \
             use a Q-form candidate, e.g. Q = compose(adjoint(T), P)"
        )));
    }
    let (p, b, n) = match (notion.family, notion.direction, form, notion.variant) {
        (F::Lyapunov, D::Pie2Pde, _, _) => (Pde, Pie, Semidefinite),
        (F::Lyapunov, D::Pie, _, _) => (Pie, Pie, Semidefinite),
        (F::Lyapunov, D::Pde, _, _) => (Pde, Pde, Semidefinite),
        (F::Lyapunov, D::Pde2Pie, _, _) => (Pie, Pde, Semidefinite),

        (F::Exponential, D::Pie2Pde, _, Some(Variant::IdentityNegativity)) => (Pde, Pie, Pie),
        (F::Exponential, D::Pie, _, Some(Variant::IdentityNegativity)) => (Pie, Pie, Pie),
        (F::Exponential, D::Pde, _, Some(Variant::IdentityNegativity)) => (Pde, Pde, Pde),
        (F::Exponential, D::Pde2Pie, _, Some(Variant::IdentityNegativity)) => (Pie, Pde, Pde),
        (F::Exponential, D::Pie2Pde, _, _) => (Pde, Pde, Lyapunov),
        (F::Exponential, D::Pie, _, _) => (Pie, Pde, Lyapunov),
        (F::Exponential, D::Pde, _, _) => (Pde, Pde, Lyapunov),
        (F::Exponential, D::Pde2Pie, _, _) => (Pie, Pde, Lyapunov),

        (F::FiniteEnergy, D::Pie2Pde, _, _) => (Semidefinite, Pie, Pde),
        (F::FiniteEnergy, D::Pie, _, _) => (Semidefinite, Pie, Pie),
        (F::FiniteEnergy, D::Pde, _, _) => (Semidefinite, Pde, Pde),
        (F::FiniteEnergy, D::Pde2Pie, _, _) => (Semidefinite, Pde, Pie),
    };
    Ok(vec![pos(form, p), bound(form, b), neg(form, n)])
}

/// One row of the summary table: the positivity, bound and negativity
/// columns marked for a notion (`None` for an empty positivity column).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableRow {
    pub positivity: Option<Class>,
    pub bound: Class,
    pub negativity: Class,
}

/// Project a condition list onto the table's columns. Semidefinite
/// positivity leaves the column empty; Lyapunov negativity counts as the
/// norm class of the bound, since `V ≤ C‖·‖²` turns `V̇ ≤ −αV` into a decay
/// in that norm.
pub fn table_row(conds: &[Condition]) -> TableRow {
    let of = |k: Kind| conds.iter().find(|c| c.kind == k).map(|c| c.class);
    let positivity = of(Kind::Positivity).filter(|c| *c != Class::Semidefinite);
    let bound = of(Kind::Bound).unwrap_or(Class::Pie);
    let negativity = match of(Kind::Negativity).unwrap_or(Class::Semidefinite) {
        Class::Lyapunov => bound,
        c => c,
    };
    TableRow { positivity, bound, negativity }
}
