use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thz_orient::field::PulseShape;
use thz_orient::orientation::{run_ensemble, CoherenceSeries, RunOptions};
use thz_orient::propagator::{free_evolve, propagate_basis_state, propagate_pulse, PropagationConfig};
use thz_orient::rotor::{cos_theta_coupling, BasisSpec, RotorState};
use thz_orient::units::ReducedParams;

/// Real symmetric `H(tau)` in `|J, M>` for `J = |M| ..= jmax`, built from the
/// closed-form coupling.
fn dense_hamiltonian(m: i32, jmax: u32, field: f64) -> DMatrix<f64> {
    let jmin = m.unsigned_abs();
    let n = (jmax - jmin + 1) as usize;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let j = jmin + i as u32;
        h[(i, i)] = (j * (j + 1)) as f64;
        if i + 1 < n {
            let jf = j as f64;
            let mf = m as f64;
            let c = (((jf + 1.0).powi(2) - mf * mf) / ((2.0 * jf + 1.0) * (2.0 * jf + 3.0))).sqrt();
            h[(i, i + 1)] = -field * c;
            h[(i + 1, i)] = -field * c;
        }
    }
    h
}

fn expm_i(h: &DMatrix<f64>, dt: f64) -> DMatrix<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(Complex64::from);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * dt)));
    &v * d * v.adjoint()
}

/// Midpoint product of exact exponentials on `n` steps.
fn ordered_product(m: i32, jmax: u32, pulse: &PulseShape, psi0: &DVector<Complex64>, n: usize) -> DVector<Complex64> {
    let (lo, hi) = pulse.support();
    let h = (hi - lo) / n as f64;
    let mut psi = psi0.clone();
    for k in 0..n {
        let t = lo + (k as f64 + 0.5) * h;
        psi = expm_i(&dense_hamiltonian(m, jmax, pulse.waveform(t)), h) * psi;
    }
    psi
}

/// Richardson-extrapolated time-ordered exponential (midpoint error is even in h).
fn dense_oracle(m: i32, jmax: u32, j0: u32, pulse: &PulseShape) -> DVector<Complex64> {
    let n = (jmax - m.unsigned_abs() + 1) as usize;
    let mut psi0 = DVector::zeros(n);
    psi0[(j0 - m.unsigned_abs()) as usize] = Complex64::from(1.0);
    let coarse = ordered_product(m, jmax, pulse, &psi0, 2000);
    let fine = ordered_product(m, jmax, pulse, &psi0, 4000);
    (fine * Complex64::from(4.0) - coarse) / Complex64::from(3.0)
}

fn lenient() -> PropagationConfig {
    PropagationConfig {
        truncation_tolerance: 1.0,
        ..PropagationConfig::default()
    }
}

#[test]
fn matches_dense_time_ordered_exponential() {
    let pulse = PulseShape::new(4.0, 2.0, 1.0).unwrap();
    for (m, jmax, j0) in [(0, 6, 0), (1, 8, 2), (-2, 8, 3)] {
        let expected = dense_oracle(m, jmax, j0, &pulse);
        let basis = BasisSpec::new(m, jmax).unwrap();
        let out = propagate_pulse(&RotorState::basis_state(basis, j0).unwrap(), &pulse, &lenient()).unwrap();
        let err = out
            .amplitudes
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "m={m} jmax={jmax} j0={j0}: error {err:e}");
    }
}

#[test]
fn norm_is_conserved() {
    for (a, f, d) in [(4.0, 2.0, 1.0), (4.0, 2.5, 3.0), (158.0, 1.97, 1.27), (117.8, 13.08, 0.19)] {
        let pulse = PulseShape::new(a, f, d).unwrap();
        for (j0, m0) in [(0, 0), (5, 3), (20, 0)] {
            let out = propagate_basis_state(j0, m0, &pulse, &PropagationConfig::default(), 0).unwrap();
            assert!(out.norm_drift <= 1e-8, "drift {:e}", out.norm_drift);
        }
    }
}

#[test]
fn weak_field_matches_first_order_theory() {
    // |c_1| = A |int f(tau) e^{2 i tau}| C(0,0); max <cos> = 2 |c_1| C(0,0)
    let (a, f, d) = (1e-3, 2.0, 1.0);
    let pulse = PulseShape::new(a, f, d).unwrap();
    let n = 20_000;
    let h = d / n as f64;
    let mut integral = Complex64::default();
    for k in 0..=n {
        let t = -0.5 * d + k as f64 * h;
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        integral += Complex64::from_polar(w * pulse.shape(t), 2.0 * t);
    }
    integral *= h / 3.0;
    let c00 = 1.0 / 3f64.sqrt();
    let expected = 2.0 * a * integral.norm() * c00 * c00;

    let out = propagate_basis_state(0, 0, &pulse, &PropagationConfig::default(), 0).unwrap();
    let got = CoherenceSeries::of_state(&out.state).max_abs().magnitude;
    assert!((got / expected - 1.0).abs() < 1e-5, "{got} vs {expected}");
}

#[test]
fn post_pulse_signal_revives() {
    let pulse = PulseShape::new(4.0, 2.0, 1.0).unwrap();
    for (j0, m0) in [(0, 0), (3, 1), (7, 7)] {
        let out = propagate_basis_state(j0, m0, &pulse, &PropagationConfig::default(), 0).unwrap();
        let series = CoherenceSeries::of_state(&out.state);
        for k in 0..50 {
            let s = 0.0631 * k as f64;
            assert!((series.eval(s + PI) - series.eval(s)).abs() < 1e-10);
        }
    }
}

#[test]
fn series_agrees_with_free_evolution() {
    let pulse = PulseShape::new(4.0, 2.0, 1.0).unwrap();
    let out = propagate_basis_state(2, 1, &pulse, &PropagationConfig::default(), 0).unwrap();
    let series = CoherenceSeries::of_state(&out.state);
    for s in [0.0, 0.3, 1.7, 2.9] {
        let evolved = free_evolve(&out.state, s).unwrap();
        assert!((evolved.expectation_cos_theta() - series.eval(s)).abs() < 1e-12);
    }
}

#[test]
fn opposite_m_give_identical_orientation() {
    let pulse = PulseShape::new(4.0, 2.0, 3.0).unwrap();
    for (j0, m0) in [(1, 1), (4, 2), (6, 6)] {
        let cfg = PropagationConfig::default();
        let plus = propagate_basis_state(j0, m0, &pulse, &cfg, 0).unwrap();
        let minus = propagate_basis_state(j0, -m0, &pulse, &cfg, 0).unwrap();
        let (sp, sm) = (CoherenceSeries::of_state(&plus.state), CoherenceSeries::of_state(&minus.state));
        for k in 0..40 {
            let s = 0.077 * k as f64;
            assert!((sp.eval(s) - sm.eval(s)).abs() < 1e-13);
        }
    }
}

#[test]
fn reversing_the_field_reverses_orientation() {
    let cfg = PropagationConfig::default();
    let up = propagate_basis_state(1, 0, &PulseShape::new(4.0, 2.0, 1.0).unwrap(), &cfg, 0).unwrap();
    let down = propagate_basis_state(1, 0, &PulseShape { a: -4.0, f: 2.0, d: 1.0 }, &cfg, 0).unwrap();
    let (su, sd) = (CoherenceSeries::of_state(&up.state), CoherenceSeries::of_state(&down.state));
    for k in 0..40 {
        let s = 0.077 * k as f64;
        assert!((su.eval(s) + sd.eval(s)).abs() < 1e-12);
    }
}

#[test]
fn step_halving_changes_little() {
    let p = ReducedParams::new(4.0, 2.0, 1.0, 50.0).unwrap();
    let cfg = PropagationConfig::default();
    let a = run_ensemble(&p, &cfg, &RunOptions::default()).unwrap().max_orientation();
    let b = run_ensemble(&p, &cfg.halved(), &RunOptions::default()).unwrap().max_orientation();
    assert!((a.total.magnitude - b.total.magnitude).abs() < 1e-7);
}

#[test]
fn tighter_ensemble_cutoff_changes_little() {
    let p = ReducedParams::new(4.0, 2.0, 1.0, 50.0).unwrap();
    let cfg = PropagationConfig::default();
    let coarse = run_ensemble(&p, &cfg, &RunOptions::default()).unwrap();
    let fine = run_ensemble(&p, &cfg, &RunOptions { cutoff: 1e-8, ..RunOptions::default() }).unwrap();
    assert!(fine.ensemble.j0max > coarse.ensemble.j0max);
    let (a, b) = (coarse.max_orientation(), fine.max_orientation());
    assert!((a.total.magnitude - b.total.magnitude).abs() < 1e-5);
}

#[test]
fn trace_decomposes_pointwise() {
    let p = ReducedParams::new(4.0, 2.0, 1.0, 50.0).unwrap();
    let run = run_ensemble(&p, &PropagationConfig::default(), &RunOptions { in_pulse: true, ..RunOptions::default() }).unwrap();
    let times: Vec<f64> = (0..300).map(|k| 0.021 * k as f64).collect();
    let trace = run.trace(&times);
    assert_eq!(trace.times.len(), trace.pulse_end + times.len());
    for k in 0..trace.times.len() {
        assert!((trace.total[k] - trace.zero_t[k] - trace.thermal[k]).abs() < 1e-12);
    }
    // in-pulse and post-pulse paths meet at the pulse end
    let (total, _, _) = run.series();
    assert!((trace.total[trace.pulse_end] - total.eval(0.0)).abs() < 1e-12);
}

#[test]
fn coupling_matches_closed_form_for_large_j() {
    // C(J, 0) -> 1/2 as J grows
    assert!((cos_theta_coupling(10_000, 0).unwrap() - 0.5).abs() < 1e-4);
}
