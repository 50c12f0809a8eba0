//! Time integration of the discretized PIE and empirical stability estimates.
//!
//! The Galerkin system `T_N ċ = A_N c` is integrated with an adaptive
//! Dormand–Prince scheme. Empirical classification propagates the full
//! fundamental matrix `Φ(t)` so worst-case gains are exact for the
//! discretization rather than sampled from random initial states.

use nalgebra::{DMatrix, DMatrixView, DVector};
use ode_solvers::dopri5::Dopri5;
use ode_solvers::{OutputType, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{Direction, Family};
use crate::error::{Error, Result};
use crate::galerkin::{discretize, project, Discretization};
use crate::pde::PieSystem;
use crate::pi::PiOp;

pub const RTOL: f64 = 1e-9;
pub const MIN_SAMPLES: usize = 201;
const MAX_STEPS: u32 = 50_000_000;

/// Right-hand side `Ẏ = M Y` for a state stored column-major as `rows × cols`.
struct LinearFlow<'a> {
    m: &'a DMatrix<f64>,
    cols: usize,
}

type OdeVec = ode_solvers::DVector<f64>;

impl System<f64, OdeVec> for LinearFlow<'_> {
    fn system(&self, _t: f64, y: &OdeVec, dy: &mut OdeVec) {
        let rows = self.m.nrows();
        let ym = DMatrixView::from_slice(y.as_slice(), rows, self.cols);
        let out = self.m * ym;
        dy.as_mut_slice().copy_from_slice(out.as_slice());
    }
}

/// Solves `Ẏ = M Y` from `Y(0) = y0` and returns `Y` at `samples` uniformly
/// spaced times on `[0, t_end]`. Each interval is integrated separately so
/// sample values carry no interpolation error.
fn propagate(
    m: &DMatrix<f64>,
    y0: &DMatrix<f64>,
    t_end: f64,
    samples: usize,
    rtol: f64,
) -> Result<(Vec<f64>, Vec<DMatrix<f64>>)> {
    let (rows, cols) = y0.shape();
    let times: Vec<f64> = (0..samples)
        .map(|k| t_end * k as f64 / (samples - 1) as f64)
        .collect();
    let atol = rtol * 1e-3 * y0.abs().max().max(f64::MIN_POSITIVE);
    let mut states = Vec::with_capacity(samples);
    states.push(y0.clone());
    let mut y = OdeVec::from_column_slice(y0.as_slice());
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let flow = LinearFlow { m, cols };
        let mut solver = Dopri5::from_param(
            flow,
            t0,
            t1,
            t1 - t0,
            y,
            rtol,
            atol,
            0.9,
            0.04,
            0.2,
            10.0,
            t1 - t0,
            0.0,
            MAX_STEPS,
            u32::MAX,
            OutputType::Sparse,
        );
        solver.integrate().map_err(|e| {
            let t = match e {
                ode_solvers::dop_shared::IntegrationError::MaxNumStepReached { x, .. }
                | ode_solvers::dop_shared::IntegrationError::StepSizeUnderflow { x }
                | ode_solvers::dop_shared::IntegrationError::StiffnessDetected { x } => x,
            };
            Error::Integration { t, reason: e.to_string() }
        })?;
        let last = solver
            .y_out()
            .last()
            .cloned()
            .ok_or_else(|| Error::Integration { t: t0, reason: "solver produced no output".into() })?;
        if last.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration { t: t1, reason: "non-finite state".into() });
        }
        states.push(DMatrix::from_column_slice(rows, cols, last.as_slice()));
        y = last;
    }
    Ok((times, states))
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub samples: usize,
    pub rtol: f64,
    /// Operator whose quadratic form `⟨x, Vx⟩` is recorded along the path.
    pub lyapunov: Option<PiOp>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { samples: MIN_SAMPLES, rtol: RTOL, lyapunov: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub times: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
    pub norms_x: Vec<f64>,
    pub norms_tx: Vec<f64>,
    pub v_values: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,norm_x,norm_Tx,V\n");
        for k in 0..self.times.len() {
            let v = self
                .v_values
                .as_ref()
                .map(|v| format!("{:e}", v[k]))
                .unwrap_or_default();
            out.push_str(&format!(
                "{:e},{:e},{:e},{}\n",
                self.times[k], self.norms_x[k], self.norms_tx[k], v
            ));
        }
        out
    }
}

/// Projects one function per component onto the resolution-`n` basis,
/// returning coefficients in component-major order.
pub fn project_initial(sys: &PieSystem, n: usize, fs: &[&dyn Fn(f64) -> f64]) -> Result<Vec<f64>> {
    if fs.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} initial functions for {} components",
            fs.len(),
            sys.dim()
        )));
    }
    let basis = crate::basis::OrthoBasis::legendre(n, sys.domain().a, sys.domain().b)?;
    Ok(fs.iter().flat_map(|f| basis.project_fn(f, 4 * n + 8)).collect())
}

pub fn integrate(sys: &PieSystem, x0: &[f64], t_end: f64, n: usize) -> Result<Trajectory> {
    integrate_with(sys, x0, t_end, n, &SimOptions::default())
}

pub fn integrate_with(
    sys: &PieSystem,
    x0: &[f64],
    t_end: f64,
    n: usize,
    opts: &SimOptions,
) -> Result<Trajectory> {
    if x0.len() != sys.dim() * n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} coefficients, expected {}",
            x0.len(),
            sys.dim() * n
        )));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end must be positive and finite, got {t_end}")));
    }
    let disc = discretize(sys, n)?;
    let v = match &opts.lyapunov {
        Some(op) => Some(project(op, n)?.symmetric()),
        None => None,
    };
    let samples = opts.samples.max(MIN_SAMPLES);
    let y0 = DMatrix::from_column_slice(x0.len(), 1, x0);
    let (times, states) = propagate(&disc.generator, &y0, t_end, samples, opts.rtol)?;
    let mut traj = Trajectory {
        n,
        times,
        coeffs: Vec::with_capacity(samples),
        norms_x: Vec::with_capacity(samples),
        norms_tx: Vec::with_capacity(samples),
        v_values: v.as_ref().map(|_| Vec::with_capacity(samples)),
    };
    for s in states {
        let c = DVector::from_column_slice(s.as_slice());
        traj.norms_x.push(c.norm());
        traj.norms_tx.push((&disc.t * &c).norm());
        if let (Some(vm), Some(vals)) = (&v, traj.v_values.as_mut()) {
            vals.push(c.dot(&(vm * &c)));
        }
        traj.coeffs.push(c.as_slice().to_vec());
    }
    Ok(traj)
}

/// Least-squares slope of `ln y` against `t`, skipping non-positive values.
pub fn fit_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let tb = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let yb = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tb).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - tb) * (p.1 - yb)).sum::<f64>() / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub trials: usize,
    pub t_end: f64,
    pub ns: Vec<usize>,
    pub seed: u64,
    pub samples: usize,
    pub rtol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { trials: 8, t_end: 4.0, ns: vec![8, 16], seed: 0, samples: 401, rtol: RTOL }
    }
}

/// Growth of the second-half supremum over the first-half supremum that
/// still counts as bounded.
pub const GROWTH_SLACK: f64 = 1.25;
/// Exponential decay must shrink the envelope by at least `e` over the run.
pub const MIN_DECAY_SPAN: f64 = 1.0;
/// Fraction of the Gramian accumulated in the last tenth of the run.
pub const TAIL_FRACTION: f64 = 0.01;
/// Largest ratio between constants at consecutive resolutions.
pub const REFINE_RATIO: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionEstimate {
    pub n: usize,
    /// Worst-case constant over all initial states at this resolution.
    pub constant: f64,
    /// Largest constant observed among the random trials.
    pub trial_constant: f64,
    pub alpha: Option<f64>,
    pub tail_fraction: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionEstimate {
    pub family: Family,
    pub direction: Direction,
    pub per_n: Vec<ResolutionEstimate>,
    pub refined: bool,
    pub holds: bool,
    pub reason: String,
}

impl NotionEstimate {
    pub fn label(&self) -> String {
        let f = match self.family {
            Family::Lyapunov => "lyap",
            Family::Exponential => "exp",
            Family::FiniteEnergy => "fe",
        };
        let d = match self.direction {
            Direction::Pie2Pde => "pie2pde",
            Direction::Pie => "pie",
            Direction::Pde => "pde",
            Direction::Pde2Pie => "pde2pie",
        };
        format!("{f}-{d}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub options: ClassifyOptions,
    pub estimates: Vec<NotionEstimate>,
}

impl EmpiricalReport {
    pub fn get(&self, family: Family, direction: Direction) -> Option<&NotionEstimate> {
        self.estimates.iter().find(|e| e.family == family && e.direction == direction)
    }

    pub fn holds(&self, family: Family, direction: Direction) -> bool {
        self.get(family, direction).is_some_and(|e| e.holds)
    }
}

/// Weights `(target, source⁻¹)` turning `Φ` into the gain for a direction.
fn weights(disc: &Discretization, t_inv: &DMatrix<f64>, dir: Direction) -> (DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::identity(disc.t.nrows(), disc.t.ncols());
    match dir {
        Direction::Pie2Pde => (disc.t.clone(), id),
        Direction::Pie => (id.clone(), id),
        Direction::Pde => (disc.t.clone(), t_inv.clone()),
        Direction::Pde2Pie => (id, t_inv.clone()),
    }
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn sym_max_eig(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    max_of(s.symmetric_eigenvalues().as_slice())
}

struct Family3 {
    lyap: ResolutionEstimate,
    exp: ResolutionEstimate,
    fe: ResolutionEstimate,
}

fn estimate_direction(
    times: &[f64],
    maps: &[DMatrix<f64>],
    x0s: &[DVector<f64>],
    src_inv: &DMatrix<f64>,
    n: usize,
) -> Family3 {
    let t_end = *times.last().unwrap();
    let gains: Vec<f64> = maps
        .iter()
        .map(|g| g.singular_values().iter().copied().fold(0.0, f64::max))
        .collect();
    let mid = times.len() / 2;
    let first = max_of(&gains[..=mid]);
    let second = max_of(&gains[mid..]);
    let lyap_c = max_of(&gains);

    // Random initial states, normalized in the source norm.
    let src = src_inv
        .clone()
        .try_inverse()
        .unwrap_or_else(|| DMatrix::identity(src_inv.nrows(), src_inv.ncols()));
    let trial_constant = x0s
        .iter()
        .map(|x| {
            let z = &src * x;
            let denom = z.norm();
            if denom == 0.0 {
                return 0.0;
            }
            maps.iter().map(|g| (g * &z).norm() / denom).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    let lyap = ResolutionEstimate {
        n,
        constant: lyap_c,
        trial_constant,
        alpha: None,
        tail_fraction: None,
        flagged: second <= GROWTH_SLACK * first,
    };

    let alpha = -(second.ln() - first.ln()) / (t_end - times[mid]);
    let c_exp = times
        .iter()
        .zip(&gains)
        .map(|(t, g)| g * (alpha * t).exp())
        .fold(0.0, f64::max);
    let exp = ResolutionEstimate {
        n,
        constant: c_exp,
        trial_constant,
        alpha: Some(alpha),
        tail_fraction: None,
        flagged: alpha.is_finite() && alpha * t_end >= MIN_DECAY_SPAN,
    };

    // Trapezoidal observability-type Gramian of the weighted flow.
    let d = maps[0].ncols();
    let tail_start = times.iter().position(|t| *t >= 0.9 * t_end).unwrap_or(times.len() - 1);
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut head = None;
    for k in 1..times.len() {
        let dt = times[k] - times[k - 1];
        let a = maps[k - 1].transpose() * &maps[k - 1];
        let b = maps[k].transpose() * &maps[k];
        gram += (a + b) * (0.5 * dt);
        if k == tail_start {
            head = Some(sym_max_eig(&gram));
        }
    }
    let total = sym_max_eig(&gram);
    let head = head.unwrap_or(total);
    let tail = if total > 0.0 { (total - head) / total } else { 0.0 };
    let fe = ResolutionEstimate {
        n,
        constant: total.max(0.0).sqrt(),
        trial_constant,
        alpha: None,
        tail_fraction: Some(tail),
        flagged: tail < TAIL_FRACTION,
    };
    Family3 { lyap, exp, fe }
}

/// Empirical stability classification by direct simulation.
///
/// A notion holds when every resolution flags it and the estimated constant
/// changes by less than [`REFINE_RATIO`] between consecutive resolutions.
pub fn empirical_classify(sys: &PieSystem, opts: &ClassifyOptions) -> Result<EmpiricalReport> {
    if opts.ns.is_empty() {
        return Err(Error::invalid("at least one resolution is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut per: Vec<((Family, Direction), Vec<ResolutionEstimate>)> = Vec::new();
    for f in Family::ALL {
        for d in Direction::ALL {
            per.push(((f, d), Vec::new()));
        }
    }
    for &n in &opts.ns {
        let disc = discretize(sys, n)?;
        let dim = disc.t.nrows();
        let t_inv = disc
            .t
            .clone()
            .try_inverse()
            .ok_or(Error::SingularMass { cond: f64::INFINITY })?;
        let id = DMatrix::identity(dim, dim);
        let (times, phis) = propagate(
            &disc.generator,
            &id,
            opts.t_end,
            opts.samples.max(MIN_SAMPLES),
            opts.rtol,
        )?;
        let x0s: Vec<DVector<f64>> = (0..opts.trials)
            .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        for dir in Direction::ALL {
            let (tgt, src_inv) = weights(&disc, &t_inv, dir);
            let maps: Vec<DMatrix<f64>> = phis.iter().map(|p| &tgt * p * &src_inv).collect();
            let est = estimate_direction(&times, &maps, &x0s, &src_inv, n);
            for (key, list) in per.iter_mut() {
                if key.1 != dir {
                    continue;
                }
                list.push(match key.0 {
                    Family::Lyapunov => est.lyap.clone(),
                    Family::Exponential => est.exp.clone(),
                    Family::FiniteEnergy => est.fe.clone(),
                });
            }
        }
    }
    let estimates = per
        .into_iter()
        .map(|((family, direction), per_n)| {
            let all_flagged = per_n.iter().all(|e| e.flagged);
            let refined = per_n.windows(2).all(|w| {
                let r = w[1].constant / w[0].constant;
                r.is_finite() && r < REFINE_RATIO && r > 1.0 / REFINE_RATIO
            });
            let reason = if !all_flagged {
                let bad: Vec<String> =
                    per_n.iter().filter(|e| !e.flagged).map(|e| e.n.to_string()).collect();
                match family {
                    Family::Lyapunov => format!("gain still growing at N = {}", bad.join(", ")),
                    Family::Exponential => format!("no exponential decay at N = {}", bad.join(", ")),
                    Family::FiniteEnergy => format!("energy integral not settled at N = {}", bad.join(", ")),
                }
            } else if !refined {
                "constant not stable under refinement".to_string()
            } else {
                "bounded and refinement-stable".to_string()
            };
            NotionEstimate { family, direction, per_n, refined, holds: all_flagged && refined, reason }
        })
        .collect();
    Ok(EmpiricalReport { options: opts.clone(), estimates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{assemble_pie, heat_system, wave_system};
    use std::f64::consts::PI;

    fn sine_start(sys: &PieSystem, n: usize) -> Vec<f64> {
        // x = u_ss; u = sin(πs) gives x = -π² sin(πs).
        project_initial(sys, n, &[&|s: f64| -PI * PI * (PI * s).sin()]).unwrap()
    }

    #[test]
    fn heat_decays_at_first_mode_rate() {
        let sys = assemble_pie(&heat_system(0.0)).unwrap();
        let x0 = sine_start(&sys, 12);
        let tr = integrate(&sys, &x0, 0.5, 12).unwrap();
        let rate = fit_rate(&tr.times, &tr.norms_x).unwrap();
        assert!((rate + PI * PI).abs() < 0.02 * PI * PI, "{rate}");
        assert_eq!(tr.times.len(), MIN_SAMPLES);
    }

    #[test]
    fn unstable_heat_grows() {
        let sys = assemble_pie(&heat_system(11.0)).unwrap();
        let x0 = sine_start(&sys, 12);
        let tr = integrate(&sys, &x0, 1.0, 12).unwrap();
        let rate = fit_rate(&tr.times, &tr.norms_tx).unwrap();
        let expected = 11.0 - PI * PI;
        assert!((rate - expected).abs() < 0.05 * expected, "{rate}");
    }

    #[test]
    fn wave_energy_is_conserved() {
        let sys = assemble_pie(&wave_system()).unwrap();
        let n = 10;
        // u_t(0) = s(1 - s), u(0) = 0.
        let x0 = project_initial(&sys, n, &[&|s: f64| s * (1.0 - s), &|_| 0.0]).unwrap();
        // ‖u_t‖² + ‖u_s‖², with u_s = D¹T u_ss.
        let d1 = wave_system().components[1].dk(1, sys.domain()).unwrap();
        let energy =
            PiOp::block_diag(&[PiOp::identity(1, sys.domain()), d1.adjoint().compose(&d1).unwrap()]).unwrap();
        let opts = SimOptions { samples: 201, rtol: 1e-10, lyapunov: Some(energy) };
        let tr = integrate_with(&sys, &x0, 10.0, n, &opts).unwrap();
        let v = tr.v_values.unwrap();
        let drift = v.iter().map(|e| (e - v[0]).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-6 * v[0].max(1e-12), "{drift} vs {}", v[0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = assemble_pie(&heat_system(1.0)).unwrap();
        assert!(matches!(integrate(&sys, &[1.0; 3], 1.0, 4), Err(Error::DimensionMismatch(_))));
        assert!(integrate(&sys, &[1.0; 4], -1.0, 4).is_err());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let sys = assemble_pie(&heat_system(1.0)).unwrap();
        let tr = integrate(&sys, &[1.0, 0.0, 0.0, 0.0], 0.1, 4).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("time,norm_x,norm_Tx,V\n"));
        assert_eq!(csv.lines().count(), MIN_SAMPLES + 1);
    }

    #[test]
    fn fit_rate_recovers_exponent() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|t| 3.0 * (-2.5 * t).exp()).collect();
        assert!((fit_rate(&ts, &ys).unwrap() + 2.5).abs() < 1e-12);
        assert!(fit_rate(&[1.0], &[1.0]).is_none());
    }

    fn holding(sys: &PieSystem, t_end: f64) -> Vec<String> {
        let opts = ClassifyOptions { t_end, ..Default::default() };
        let r = empirical_classify(sys, &opts).unwrap();
        r.estimates.iter().filter(|e| e.holds).map(|e| e.label()).collect()
    }

    #[test]
    fn empirical_matrix_matches_known_behaviour() {
        let heat = assemble_pie(&heat_system(5.0)).unwrap();
        let mut expected = Vec::new();
        for f in ["lyap", "exp", "fe"] {
            for d in ["pie2pde", "pie", "pde"] {
                expected.push(format!("{f}-{d}"));
            }
        }
        assert_eq!(holding(&heat, 4.0), expected);
        let wave = assemble_pie(&wave_system()).unwrap();
        assert_eq!(holding(&wave, 10.0), vec!["lyap-pie2pde".to_string()]);
        let unstable = assemble_pie(&heat_system(11.0)).unwrap();
        assert!(holding(&unstable, 4.0).is_empty());
    }

    #[test]
    fn classification_is_seed_deterministic() {
        let sys = assemble_pie(&heat_system(5.0)).unwrap();
        let opts = ClassifyOptions { ns: vec![6], t_end: 1.0, seed: 7, ..Default::default() };
        let a = empirical_classify(&sys, &opts).unwrap();
        let b = empirical_classify(&sys, &opts).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(empirical_classify(&sys, &ClassifyOptions { ns: vec![], ..opts }).is_err());
    }
}
