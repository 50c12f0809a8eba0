//! Command-line driver: `pie-cert <command> <spec-file> [flags]`.
//!
//! Every run produces a [`RunReport`]; the process exit code is 0 when all
//! requested verdicts hold, 2 when one fails, 3 when one is inconclusive and
//! 1 on error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::certify::{
    implied_certified, scalar_search, verify_candidate, CertOptions, CertReport, CertVerdict, Form, Notion,
    SearchResult,
};
use crate::error::{Error, Result};
use crate::galerkin::{check_op_ineq, pencil_spectrum, Eigenvalue, IneqVerdict, Verdict};
use crate::pde::{assemble_pie, PieSystem};
use crate::pi::PiOp;
use crate::poly::Poly1;
use crate::simulate::{empirical_classify, fit_rate, integrate_with, project_initial, ClassifyOptions, SimOptions};
use crate::simulate::EmpiricalReport;
use crate::spec::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Convert,
    Check,
    Certify,
    Simulate,
    Classify,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "pie-cert", version, about = "PIE conversion and stability certification for 1D linear PDEs")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    pub spec: PathBuf,
    /// Stability notion, e.g. `exp-pde` or `lyap-pie2pde`; repeatable.
    #[arg(long = "notion", value_parser = parse_notion)]
    pub notions: Vec<Notion>,
    /// Parameter override `name=value`; repeatable.
    #[arg(long = "set", value_parser = parse_assignment)]
    pub sets: Vec<(String, f64)>,
    /// Shorthand for `--set lambda=<value>`.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Galerkin resolution; repeatable.
    #[arg(long = "N")]
    pub ns: Vec<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Trajectory samples as CSV (`simulate` only).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn parse_notion(s: &str) -> std::result::Result<Notion, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_assignment(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
    Error,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => 0,
            Outcome::Error => 1,
            Outcome::Fails => 2,
            Outcome::Inconclusive => 3,
        }
    }

    /// Worst of two outcomes: error, then fails, then inconclusive.
    fn and(self, other: Outcome) -> Outcome {
        let rank = |o: Outcome| match o {
            Outcome::Holds => 0,
            Outcome::Inconclusive => 1,
            Outcome::Fails => 2,
            Outcome::Error => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

impl From<CertVerdict> for Outcome {
    fn from(v: CertVerdict) -> Self {
        match v {
            CertVerdict::CertifiedEvidence => Outcome::Holds,
            CertVerdict::Refuted => Outcome::Fails,
            CertVerdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::HoldsEvidence => Outcome::Holds,
            Verdict::Violated => Outcome::Fails,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }
}

/// One kernel entry with coefficient arrays lowest degree first; `r1` and
/// `r2` are indexed `[power of s][power of θ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub row: usize,
    pub col: usize,
    pub r0: Vec<f64>,
    pub r1: Vec<Vec<f64>>,
    pub r2: Vec<Vec<f64>>,
}

fn kernel_entries(op: &PiOp) -> Vec<KernelEntry> {
    let rows2 = |p: &crate::poly::Poly2| -> Vec<Vec<f64>> {
        match p.degrees() {
            None => Vec::new(),
            Some((ds, dt)) => (0..=ds).map(|i| (0..=dt).map(|j| p.coeff(i, j)).collect()).collect(),
        }
    };
    let mut out = Vec::new();
    for i in 0..op.rows() {
        for j in 0..op.cols() {
            let (r0, r1, r2) = (op.r0(i, j), op.r1(i, j), op.r2(i, j));
            if r0.is_zero() && r1.is_zero() && r2.is_zero() {
                continue;
            }
            out.push(KernelEntry { row: i, col: j, r0: r0.coeffs().to_vec(), r1: rows2(r1), r2: rows2(r2) });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub name: String,
    pub order: usize,
    /// Boundary projector `(Na + Nb W)⁻¹ Nb W`, row-major.
    pub projector: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conversion {
    pub components: Vec<ComponentSummary>,
    pub t: Vec<KernelEntry>,
    pub a: Vec<KernelEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub result: IneqVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateOutcome {
    Report(CertReport),
    Search(SearchResult),
    Skipped { candidate: String, reason: String },
}

impl CandidateOutcome {
    fn report(&self) -> Option<&CertReport> {
        match self {
            CandidateOutcome::Report(r) => Some(r),
            CandidateOutcome::Search(s) => Some(&s.best),
            CandidateOutcome::Skipped { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionOutcome {
    pub notion: Notion,
    pub verdict: CertVerdict,
    /// Candidate behind the verdict.
    pub best: Option<String>,
    pub candidates: Vec<CandidateOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n: usize,
    pub t_end: f64,
    pub samples: usize,
    pub rate_x: Option<f64>,
    pub rate_tx: Option<f64>,
    pub initial_norm_x: f64,
    pub final_norm_x: f64,
    pub initial_norm_tx: f64,
    pub final_norm_tx: f64,
    /// Candidate whose quadratic form was recorded.
    pub lyapunov: Option<String>,
    /// Largest relative change of that quadratic form.
    pub v_drift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalVerdict {
    pub notion: Notion,
    pub holds: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: usize,
    /// Rightmost eigenvalues of the pencil `(A_N, T_N)`.
    pub rightmost: Vec<Eigenvalue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
}

/// The serialized name of a unit enum variant.
fn serde_label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// SHA-256 of the spec file bytes.
    pub input_digest: Option<String>,
    pub overrides: BTreeMap<String, f64>,
    pub outcome: Outcome,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conversion: Option<Conversion>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certify: Vec<NotionOutcome>,
    /// `(implied, certified)` pairs from the direction hierarchy.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub implied: Vec<(Notion, Notion)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub empirical_verdicts: Vec<EmpiricalVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<Spectrum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnostic>,
    pub timing: Timing,
}

impl RunReport {
    fn new(command: Command) -> Self {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            input_digest: None,
            overrides: BTreeMap::new(),
            outcome: Outcome::Holds,
            exit_code: 0,
            conversion: None,
            checks: Vec::new(),
            certify: Vec::new(),
            implied: Vec::new(),
            empirical: None,
            empirical_verdicts: Vec::new(),
            simulation: None,
            spectra: Vec::new(),
            error: None,
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// The report with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> RunReport {
        RunReport { timing: Timing::default(), ..self.clone() }
    }

    /// Human-readable summary lines.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} {}: {} (exit {})\n",
            self.tool,
            serde_label(&self.command),
            serde_label(&self.outcome),
            self.exit_code
        );
        if let Some(e) = &self.error {
            out.push_str(&format!("error ({}): {}\n", e.kind, e.message));
        }
        for c in &self.checks {
            out.push_str(&format!("check {}: {} ≽ {}: {}\n", c.name, c.lhs, c.rhs, c.result.verdict));
        }
        for n in &self.certify {
            out.push_str(&format!("{}: {}", n.notion, n.verdict));
            if let Some(b) = &n.best {
                out.push_str(&format!(" via {b}"));
            }
            out.push('\n');
            for r in n.candidates.iter().filter_map(CandidateOutcome::report) {
                for c in &r.conditions {
                    let val = c.value.map(|v| format!(" = {v:.6e}")).unwrap_or_default();
                    out.push_str(&format!("  [{}] {} {:?}{}\n", r.candidate, c.text, c.verdict, val));
                    for note in &c.notes {
                        out.push_str(&format!("    {note}\n"));
                    }
                }
            }
        }
        for v in &self.empirical_verdicts {
            out.push_str(&format!("{} (empirical): {}\n", v.notion, if v.holds { "holds" } else { "fails" }));
        }
        if let Some(e) = &self.empirical {
            for est in &e.estimates {
                out.push_str(&format!(
                    "  {:<13} {:<6} {}\n",
                    est.label(),
                    if est.holds { "holds" } else { "fails" },
                    est.reason
                ));
            }
        }
        if let Some(s) = &self.simulation {
            out.push_str(&format!(
                "simulated N = {} to t = {}: ‖x‖ {:.4e} → {:.4e}, ‖Tx‖ {:.4e} → {:.4e}\n",
                s.n, s.t_end, s.initial_norm_x, s.final_norm_x, s.initial_norm_tx, s.final_norm_tx
            ));
        }
        for s in &self.spectra {
            if let Some(e) = s.rightmost.first() {
                out.push_str(&format!("rightmost pencil eigenvalue at N = {}: {:.6} {:+.6}i\n", s.n, e.re, e.im));
            }
        }
        out
    }
}

fn diagnostic(e: &Error) -> Diagnostic {
    let kind = match e {
        Error::InvalidInput(_) => "invalid-input",
        Error::DomainMismatch(..) => "domain-mismatch",
        Error::DimensionMismatch(_) => "dimension-mismatch",
        Error::IllPosed { .. } => "ill-posed",
        Error::NotSelfAdjoint { .. } => "not-self-adjoint",
        Error::SingularMass { .. } => "singular-mass",
        Error::Integration { .. } => "integration",
        Error::UnsupportedPairing(_) => "unsupported-pairing",
        Error::Expr(_) => "expression",
        Error::Spec(_) => "spec",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    };
    Diagnostic { kind: kind.to_string(), message: e.to_string() }
}

const SPECTRUM_LEN: usize = 8;

fn spectrum(sys: &PieSystem, n: usize) -> Result<Spectrum> {
    let mut eig = pencil_spectrum(sys, n)?;
    eig.truncate(SPECTRUM_LEN);
    Ok(Spectrum { n, rightmost: eig })
}

/// Runs one command; errors are folded into the report.
pub fn run(args: &Args) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new(args.command);
    if let Err(e) = execute(args, &mut report) {
        report.outcome = Outcome::Error;
        report.error = Some(diagnostic(&e));
    }
    report.exit_code = report.outcome.exit_code();
    report.timing.total_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

fn execute(args: &Args, report: &mut RunReport) -> Result<()> {
    let bytes = std::fs::read(&args.spec)?;
    report.input_digest = Some(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect());
    let text = String::from_utf8(bytes).map_err(|_| Error::Spec("spec file is not UTF-8".into()))?;
    let mut spec = ProblemSpec::parse(&text, &args.spec.display().to_string())?;
    let mut overrides: Vec<(String, f64)> = args.sets.clone();
    if let Some(l) = args.lambda {
        overrides.push(("lambda".into(), l));
    }
    for (k, v) in overrides {
        spec.set_param(&k, v)?;
        report.overrides.insert(k, v);
    }
    if let Some(seed) = args.seed {
        spec.analysis.seed = seed;
    }
    if let Some(t) = args.t_end {
        spec.analysis.t_end = t;
    }
    spec.validate()?;
    let sys = assemble_pie(&spec.pde_system()?)?;
    let notions = if args.notions.is_empty() { spec.analysis.notions.clone() } else { args.notions.clone() };
    match args.command {
        Command::Convert => convert(&sys, report),
        Command::Check => check(&spec, &sys, args, report),
        Command::Certify => certify(&spec, &sys, &notions, args, report),
        Command::Simulate => simulate(&spec, &sys, args, report),
        Command::Classify => classify(&spec, &sys, &notions, args, report),
    }
}

fn convert(sys: &PieSystem, report: &mut RunReport) -> Result<()> {
    let components = sys
        .meta
        .iter()
        .map(|m| ComponentSummary {
            name: m.name.clone(),
            order: m.order,
            projector: m
                .projector
                .as_ref()
                .map(|p| (0..p.nrows()).map(|i| p.row(i).iter().copied().collect()).collect()),
        })
        .collect();
    report.conversion = Some(Conversion { components, t: kernel_entries(&sys.t), a: kernel_entries(&sys.a) });
    report.spectra.push(spectrum(sys, 16)?);
    report.outcome = Outcome::Holds;
    Ok(())
}

fn ladder(spec: &ProblemSpec, args: &Args) -> Vec<usize> {
    let mut ns = if args.ns.is_empty() { spec.analysis.ns.clone() } else { args.ns.clone() };
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn check(spec: &ProblemSpec, sys: &PieSystem, args: &Args, report: &mut RunReport) -> Result<()> {
    if spec.checks.is_empty() {
        return Err(Error::Spec("the check command needs a nonempty 'checks' list".into()));
    }
    let ns = ladder(spec, args);
    let env = crate::certify::expr::Env { t: &sys.t, a: &sys.a, params: &spec.params };
    let mut outcome = Outcome::Holds;
    for c in &spec.checks {
        let lhs = crate::certify::parse(&c.lhs)?.eval(&env)?.into_op()?;
        let rhs = crate::certify::parse(&c.rhs)?.eval(&env)?.into_op()?;
        let result = check_op_ineq(&lhs, &rhs, &ns, spec.analysis.tol)?;
        outcome = outcome.and(result.verdict.into());
        report.checks.push(CheckOutcome { name: c.name.clone(), lhs: c.lhs.clone(), rhs: c.rhs.clone(), result });
    }
    report.outcome = outcome;
    Ok(())
}

fn certify(spec: &ProblemSpec, sys: &PieSystem, notions: &[Notion], args: &Args, report: &mut RunReport) -> Result<()> {
    if notions.is_empty() {
        return Err(Error::Spec("no notions requested (use --notion or analysis.notions)".into()));
    }
    let cands = spec.candidates()?;
    if cands.is_empty() {
        return Err(Error::Spec("the certify command needs at least one candidate".into()));
    }
    let opts = CertOptions { ns: ladder(spec, args), tol: spec.analysis.tol };
    let mut outcome = Outcome::Holds;
    let mut certified = Vec::new();
    for &notion in notions {
        let mut results = Vec::new();
        for cand in &cands {
            if cand.form == Form::P && notion.direction != crate::certify::Direction::Pde {
                results.push(CandidateOutcome::Skipped {
                    candidate: cand.name.clone(),
                    reason: format!("P-form candidates only certify pde-direction notions, not {notion}"),
                });
                continue;
            }
            let res = if cand.grid.is_empty() {
                verify_candidate(sys, notion, cand, &opts).map(CandidateOutcome::Report)
            } else {
                scalar_search(sys, notion, cand, &BTreeMap::new(), &opts).map(CandidateOutcome::Search)
            };
            match res {
                Ok(r) => results.push(r),
                Err(Error::NotSelfAdjoint { asymmetry }) => results.push(CandidateOutcome::Skipped {
                    candidate: cand.name.clone(),
                    reason: Error::NotSelfAdjoint { asymmetry }.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }
        // first candidate wins ties
        let mut best: Option<&CertReport> = None;
        for r in results.iter().filter_map(CandidateOutcome::report) {
            if best.is_none_or(|b| r.verdict > b.verdict) {
                best = Some(r);
            }
        }
        let verdict = best.map_or(CertVerdict::Inconclusive, |b| b.verdict);
        if let Some(b) = best.filter(|b| b.verdict == CertVerdict::CertifiedEvidence) {
            certified.push(b.clone());
        }
        outcome = outcome.and(verdict.into());
        report.certify.push(NotionOutcome {
            notion,
            verdict,
            best: best.map(|b| b.candidate.clone()),
            candidates: results,
        });
    }
    report.implied = implied_certified(&certified)
        .into_iter()
        .filter(|(n, _)| !notions.iter().any(|m| m.base() == n.base()))
        .collect();
    let n_max = *opts.ns.last().expect("ladder is nonempty");
    report.spectra.push(spectrum(sys, n_max)?);
    report.outcome = outcome;
    Ok(())
}

fn initial_state(spec: &ProblemSpec, sys: &PieSystem, n: usize) -> Result<Vec<f64>> {
    match &spec.analysis.initial {
        Some(polys) => {
            let d = sys.domain();
            let ps: Vec<Poly1> = polys.iter().map(|c| Poly1::new(c.clone(), d)).collect();
            let fs: Vec<_> = ps.iter().map(|p| move |s: f64| p.eval(s)).collect();
            let refs: Vec<&dyn Fn(f64) -> f64> = fs.iter().map(|f| f as &dyn Fn(f64) -> f64).collect();
            project_initial(sys, n, &refs)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.analysis.seed);
            let x = DVector::from_fn(sys.dim() * n, |_, _| rng.random_range(-1.0f64..1.0));
            Ok((&x / x.norm()).as_slice().to_vec())
        }
    }
}

fn simulate(spec: &ProblemSpec, sys: &PieSystem, args: &Args, report: &mut RunReport) -> Result<()> {
    let n = args.ns.first().copied().unwrap_or(*spec.analysis.classify_ns.iter().max().expect("validated"));
    let x0 = initial_state(spec, sys, n)?;
    let mut lyapunov = None;
    for cand in spec.candidates()? {
        if !cand.free_params()?.is_empty() {
            continue;
        }
        let op = cand.operator(sys, &BTreeMap::new())?;
        let v = match cand.form {
            Form::Q => op.compose(&sys.t)?,
            Form::P => sys.t.adjoint().compose(&op)?.compose(&sys.t)?,
        };
        lyapunov = Some((cand.name.clone(), v));
        break;
    }
    let opts = SimOptions { samples: 401, lyapunov: lyapunov.as_ref().map(|l| l.1.clone()), ..Default::default() };
    let tr = integrate_with(sys, &x0, spec.analysis.t_end, n, &opts)?;
    if let Some(path) = &args.csv {
        std::fs::write(path, tr.to_csv())?;
    }
    let last = tr.times.len() - 1;
    let v_drift = tr.v_values.as_ref().map(|v| {
        let scale = v[0].abs().max(f64::MIN_POSITIVE);
        v.iter().map(|e| (e - v[0]).abs()).fold(0.0, f64::max) / scale
    });
    report.simulation = Some(SimulationSummary {
        n,
        t_end: spec.analysis.t_end,
        samples: tr.times.len(),
        rate_x: fit_rate(&tr.times, &tr.norms_x),
        rate_tx: fit_rate(&tr.times, &tr.norms_tx),
        initial_norm_x: tr.norms_x[0],
        final_norm_x: tr.norms_x[last],
        initial_norm_tx: tr.norms_tx[0],
        final_norm_tx: tr.norms_tx[last],
        lyapunov: lyapunov.map(|l| l.0),
        v_drift,
    });
    report.spectra.push(spectrum(sys, n)?);
    report.outcome = Outcome::Holds;
    Ok(())
}

fn classify(spec: &ProblemSpec, sys: &PieSystem, notions: &[Notion], args: &Args, report: &mut RunReport) -> Result<()> {
    let ns = if args.ns.is_empty() { spec.analysis.classify_ns.clone() } else { args.ns.clone() };
    let opts = ClassifyOptions {
        trials: spec.analysis.trials,
        t_end: spec.analysis.t_end,
        ns: ns.clone(),
        seed: spec.analysis.seed,
        ..Default::default()
    };
    let emp = empirical_classify(sys, &opts)?;
    let mut outcome = Outcome::Holds;
    for &notion in notions {
        let (f, d) = notion.base();
        let est = emp.get(f, d).expect("every family and direction is estimated");
        if !est.holds {
            outcome = Outcome::Fails;
        }
        report.empirical_verdicts.push(EmpiricalVerdict { notion, holds: est.holds, reason: est.reason.clone() });
    }
    report.empirical = Some(emp);
    report.spectra.push(spectrum(sys, *ns.iter().max().expect("nonempty"))?);
    report.outcome = outcome;
    Ok(())
}

/// Parses `argv`, runs, writes outputs and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let report = run(&args);
    let json = report.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &json) {
                eprintln!("cannot write {}: {e}", path.display());
                return 1;
            }
            print!("{}", report.summary());
        }
        None => println!("{json}"),
    }
    if report.outcome == Outcome::Error {
        if let Some(d) = &report.error {
            eprintln!("error: {}", d.message);
        }
    }
    report.exit_code
}
