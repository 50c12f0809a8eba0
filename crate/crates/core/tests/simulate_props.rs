//! Trajectory-level properties of the simulator.

use pie_cert::basis::{gauss_on, OrthoBasis};
use pie_cert::certify::{verify_candidate, Candidate, CertOptions, CertVerdict, Direction, Form, Notion, Variant};
use pie_cert::pde::{assemble_pie, heat_system, wave_system, PieSystem};
use pie_cert::simulate::{integrate, integrate_with, SimOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter().map(|v| v / norm).collect()
}

fn systems() -> Vec<(&'static str, PieSystem, f64)> {
    vec![
        ("heat", assemble_pie(&heat_system(5.0)).unwrap(), 1.0),
        ("wave", assemble_pie(&wave_system()).unwrap(), 5.0),
    ]
}

#[test]
fn tx_is_bounded_by_norm_bound_times_x() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, sys, t_end) in systems() {
        let bound = sys.t.norm_bound();
        let n = 12;
        for _ in 0..3 {
            let x0 = random_state(&mut rng, sys.dim() * n);
            let tr = integrate(&sys, &x0, t_end, n).unwrap();
            for (tx, x) in tr.norms_tx.iter().zip(&tr.norms_x) {
                assert!(*tx <= bound * x + 1e-8, "{name}: {tx} > {bound} * {x}");
            }
        }
    }
}

#[test]
fn coefficient_norms_match_reconstructed_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, sys, t_end) in systems() {
        let n = 10;
        let d = sys.domain();
        let basis = OrthoBasis::legendre(n, d.a, d.b).unwrap();
        let (xs, ws) = gauss_on(2 * n + 4, d.a, d.b);
        let x0 = random_state(&mut rng, sys.dim() * n);
        let tr = integrate(&sys, &x0, t_end, n).unwrap();
        for _ in 0..10 {
            let k = rng.random_range(0..tr.times.len());
            let c = &tr.coeffs[k];
            let sq: f64 = (0..sys.dim())
                .map(|comp| {
                    xs.iter()
                        .zip(&ws)
                        .map(|(&s, &w)| w * basis.eval_expansion(&c[comp * n..(comp + 1) * n], s).powi(2))
                        .sum::<f64>()
                })
                .sum();
            assert!((sq.sqrt() - tr.norms_x[k]).abs() <= 1e-8, "{name} at sample {k}");
        }
    }
}

#[test]
fn conserved_energy_stays_constant() {
    let sys = assemble_pie(&wave_system()).unwrap();
    let q = Candidate::new("energy", Form::Q, "blockdiag(I(1), -I(1))").unwrap();
    let v = q.operator(&sys, &Default::default()).unwrap().compose(&sys.t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 12;
    let x0 = random_state(&mut rng, sys.dim() * n);
    let opts = SimOptions { lyapunov: Some(v), rtol: 1e-11, ..Default::default() };
    let tr = integrate_with(&sys, &x0, 10.0, n, &opts).unwrap();
    let vals = tr.v_values.unwrap();
    let drift = vals.iter().map(|e| (e - vals[0]).abs()).fold(0.0, f64::max) / vals[0].abs();
    assert!(drift <= 1e-6, "relative drift {drift}");
}

#[test]
fn certified_decay_rate_bounds_trajectories() {
    let sys = assemble_pie(&heat_system(5.0)).unwrap();
    let cand = Candidate::new("p", Form::P, "I").unwrap();
    let notion = Notion::exponential(Direction::Pde, Variant::IdentityNegativity);
    let rep = verify_candidate(&sys, notion, &cand, &CertOptions::default()).unwrap();
    assert_eq!(rep.verdict, CertVerdict::CertifiedEvidence);
    let alpha = rep.alpha.unwrap();
    let (eps, c) = (rep.epsilon.unwrap(), rep.c.unwrap());
    // ε‖Tx‖² ≤ V ≤ C‖Tx‖² and V̇ ≤ −αV give ‖Tx(t)‖ ≤ √(C/ε) e^{−αt/2} ‖Tx(0)‖
    let gain = (c / eps).sqrt();
    let rate = alpha / 2.0 - 0.05 * alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..4 {
        let n = 12;
        let x0 = random_state(&mut rng, n);
        let tr = integrate(&sys, &x0, 1.5, n).unwrap();
        for (t, tx) in tr.times.iter().zip(&tr.norms_tx) {
            let envelope = gain * (-rate * t).exp() * tr.norms_tx[0];
            assert!(*tx <= envelope * (1.0 + 1e-9), "t = {t}: {tx} > {envelope}");
        }
    }
}
