//! Problem specification files.
//!
//! A spec is a JSON object naming the domain, the state components with
//! their boundary conditions, the dynamics terms, candidate certificates and
//! analysis settings. Coefficients may name scalar parameters so one file
//! covers a family of systems.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certify::{Candidate, Form, Notion};
use crate::error::{Error, Result};
use crate::galerkin::{DEFAULT_NS, DEFAULT_TOL};
use crate::pde::{BcSpec, ComponentSpec, DynTerm, PdeSystem};
use crate::poly::{Domain, Poly1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub domain: [f64; 2],
    pub components: Vec<ComponentDef>,
    pub dynamics: Vec<DynamicsDef>,
    /// Named scalars referenced by dynamics coefficients.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateDef>,
    /// Standalone inequalities `lhs ≽ rhs` for the `check` command.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckDef>,
    #[serde(default)]
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDef {
    pub name: String,
    pub order: usize,
    #[serde(rename = "Na", default, skip_serializing_if = "Option::is_none")]
    pub na: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Nb", default, skip_serializing_if = "Option::is_none")]
    pub nb: Option<Vec<Vec<f64>>>,
}

/// A component given by name or by position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentRef {
    Index(usize),
    Name(String),
}

/// A polynomial coefficient: a number or a parameter name, optionally
/// negated with a leading `-`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coeff {
    Num(f64),
    Param(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsDef {
    pub target: ComponentRef,
    pub source: ComponentRef,
    pub k: usize,
    pub coeff: Vec<Coeff>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDef {
    pub name: String,
    pub form: Form,
    pub expr: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub grid: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDef {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub notions: Vec<Notion>,
    #[serde(rename = "Ns")]
    pub ns: Vec<usize>,
    /// Resolutions for empirical classification.
    #[serde(rename = "classify_Ns")]
    pub classify_ns: Vec<usize>,
    pub tol: f64,
    pub t_end: f64,
    pub trials: usize,
    pub seed: u64,
    /// Initial state for `simulate`: one coefficient list per component,
    /// lowest degree first. Seeded random coefficients when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<f64>>>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            notions: Vec::new(),
            ns: DEFAULT_NS.to_vec(),
            classify_ns: vec![8, 16],
            tol: DEFAULT_TOL,
            t_end: 4.0,
            trials: 8,
            seed: 0,
            initial: None,
        }
    }
}

fn spec_err(path: impl fmt::Display, msg: impl fmt::Display) -> Error {
    Error::Spec(format!("{path}: {msg}"))
}

impl ProblemSpec {
    /// Parses and validates spec text; `origin` prefixes error messages.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(src).map_err(|e| {
            let what = match e.classify() {
                serde_json::error::Category::Eof => "unexpected end of file",
                serde_json::error::Category::Syntax => "syntax error",
                _ => "schema violation",
            };
            Error::Spec(format!("{origin}:{}:{}: {what}: {e}", e.line(), e.column()))
        })?;
        spec.validate().map_err(|e| match e {
            Error::Spec(m) => Error::Spec(format!("{origin}: {m}")),
            other => other,
        })?;
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path)?;
        Self::parse(&src, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    fn component_index(&self, r: &ComponentRef, at: &str) -> Result<usize> {
        match r {
            ComponentRef::Index(i) if *i < self.components.len() => Ok(*i),
            ComponentRef::Index(i) => Err(spec_err(
                at,
                format!("component index {i} out of range ({} components)", self.components.len()),
            )),
            ComponentRef::Name(n) => self
                .components
                .iter()
                .position(|c| &c.name == n)
                .ok_or_else(|| spec_err(at, format!("unknown component '{n}'"))),
        }
    }

    fn coeff_value(&self, c: &Coeff, at: &str) -> Result<f64> {
        match c {
            Coeff::Num(v) => Ok(*v),
            Coeff::Param(name) => {
                let (sign, key) = match name.strip_prefix('-') {
                    Some(rest) => (-1.0, rest),
                    None => (1.0, name.as_str()),
                };
                self.params
                    .get(key)
                    .map(|v| sign * v)
                    .ok_or_else(|| spec_err(at, format!("unknown parameter '{key}'")))
            }
        }
    }

    /// Checks every structural invariant and cross-reference. Boundary
    /// well-posedness is left to assembly.
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(spec_err("domain", format!("need a < b, got [{a}, {b}]")));
        }
        if self.components.is_empty() {
            return Err(spec_err("components", "at least one component is required"));
        }
        for (i, c) in self.components.iter().enumerate() {
            let at = format!("components[{i}]");
            if c.name.is_empty() {
                return Err(spec_err(&at, "empty name"));
            }
            if self.components[..i].iter().any(|o| o.name == c.name) {
                return Err(spec_err(&at, format!("duplicate name '{}'", c.name)));
            }
            match (c.order, &c.na, &c.nb) {
                (0, None, None) => {}
                (0, _, _) => return Err(spec_err(&at, "order-0 components take no Na/Nb")),
                (n, Some(na), Some(nb)) => {
                    check_square(na, n, &format!("{at}.Na"))?;
                    check_square(nb, n, &format!("{at}.Nb"))?;
                }
                (_, None, _) => return Err(spec_err(format!("{at}.Na"), "required for order > 0")),
                (_, _, None) => return Err(spec_err(format!("{at}.Nb"), "required for order > 0")),
            }
        }
        for (i, d) in self.dynamics.iter().enumerate() {
            let at = format!("dynamics[{i}]");
            self.component_index(&d.target, &format!("{at}.target"))?;
            let src = self.component_index(&d.source, &format!("{at}.source"))?;
            let order = self.components[src].order;
            if d.k > order {
                return Err(spec_err(
                    format!("{at}.k"),
                    format!("D^{} of '{}' exceeds its order {order}", d.k, self.components[src].name),
                ));
            }
            for (j, c) in d.coeff.iter().enumerate() {
                let v = self.coeff_value(c, &format!("{at}.coeff[{j}]"))?;
                if !v.is_finite() {
                    return Err(spec_err(format!("{at}.coeff[{j}]"), "not finite"));
                }
            }
        }
        for (i, c) in self.candidates.iter().enumerate() {
            let at = format!("candidates[{i}]");
            if self.candidates[..i].iter().any(|o| o.name == c.name) {
                return Err(spec_err(&at, format!("duplicate candidate name '{}'", c.name)));
            }
            crate::certify::parse(&c.expr).map_err(|e| spec_err(format!("{at}.expr"), e))?;
            for (k, g) in &c.grid {
                if g.is_empty() {
                    return Err(spec_err(format!("{at}.grid.{k}"), "empty grid"));
                }
            }
        }
        for (i, c) in self.checks.iter().enumerate() {
            let at = format!("checks[{i}]");
            crate::certify::parse(&c.lhs).map_err(|e| spec_err(format!("{at}.lhs"), e))?;
            crate::certify::parse(&c.rhs).map_err(|e| spec_err(format!("{at}.rhs"), e))?;
        }
        let an = &self.analysis;
        if an.ns.is_empty() || an.ns.contains(&0) {
            return Err(spec_err("analysis.Ns", "need at least one positive resolution"));
        }
        if an.classify_ns.is_empty() || an.classify_ns.contains(&0) {
            return Err(spec_err("analysis.classify_Ns", "need at least one positive resolution"));
        }
        if an.tol.is_nan() || an.tol <= 0.0 {
            return Err(spec_err("analysis.tol", "must be positive"));
        }
        if !(an.t_end > 0.0 && an.t_end.is_finite()) {
            return Err(spec_err("analysis.t_end", "must be positive"));
        }
        if an.trials == 0 {
            return Err(spec_err("analysis.trials", "must be at least 1"));
        }
        if let Some(init) = &an.initial {
            if init.len() != self.components.len() {
                return Err(spec_err(
                    "analysis.initial",
                    format!("{} entries for {} components", init.len(), self.components.len()),
                ));
            }
        }
        Ok(())
    }

    /// Applies a `name=value` override to a system parameter, or failing
    /// that to every candidate fixing a parameter of that name.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<()> {
        if let Some(v) = self.params.get_mut(name) {
            *v = value;
            return Ok(());
        }
        let mut hit = false;
        for c in &mut self.candidates {
            if let Some(v) = c.params.get_mut(name) {
                *v = value;
                hit = true;
            }
        }
        if hit {
            Ok(())
        } else {
            Err(Error::Spec(format!("--set {name}: no parameter of that name")))
        }
    }

    pub fn pde_system(&self) -> Result<PdeSystem> {
        let domain = Domain::new(self.domain[0], self.domain[1])?;
        let components = self
            .components
            .iter()
            .map(|c| match (&c.na, &c.nb) {
                (Some(na), Some(nb)) => {
                    let bc = BcSpec::new(matrix(na), matrix(nb), domain)?;
                    Ok(ComponentSpec::with_bc(c.name.clone(), bc))
                }
                _ => Ok(ComponentSpec::undifferentiated(c.name.clone())),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut dynamics = Vec::with_capacity(self.dynamics.len());
        for (i, d) in self.dynamics.iter().enumerate() {
            let at = format!("dynamics[{i}]");
            let coeffs = d
                .coeff
                .iter()
                .enumerate()
                .map(|(j, c)| self.coeff_value(c, &format!("{at}.coeff[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            dynamics.push(DynTerm {
                target: self.component_index(&d.target, &at)?,
                source: self.component_index(&d.source, &at)?,
                k: d.k,
                coeff: Poly1::new(coeffs, domain),
            });
        }
        Ok(PdeSystem { domain, components, dynamics })
    }

    pub fn candidates(&self) -> Result<Vec<Candidate>> {
        self.candidates
            .iter()
            .map(|c| {
                let mut cand = Candidate::new(c.name.clone(), c.form, c.expr.clone())?;
                cand.params = c.params.clone();
                cand.grid = c.grid.clone();
                Ok(cand)
            })
            .collect()
    }
}

fn check_square(m: &[Vec<f64>], n: usize, at: &str) -> Result<()> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(spec_err(at, format!("expected a {n}x{n} matrix (row-major)")));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(spec_err(at, "entries must be finite"));
    }
    Ok(())
}

fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}
