//! Time integration of a single rotor state through the pulse, and exact free
//! evolution afterwards.
//!
//! Each step applies the fourth-order Magnus exponential built from the two
//! Gauss points of the step. With `H(tau) = K - g(tau) C` the commutator is
//! `[H2, H1] = (g2 - g1) [K, C]`, which is again tridiagonal, so the effective
//! generator stays a Hermitian tridiagonal matrix and its exponential is
//! evaluated with a Chebyshev expansion. The scheme is unitary up to the
//! Chebyshev truncation (~1e-16 per step); no renormalization is performed.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{self, Tridiagonal, Workspace};
use crate::error::{Error, Result};
use crate::field::PulseShape;
use crate::rotor::{BasisSpec, RotorOperators, RotorState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    /// Hard upper bound on the step, if any.
    pub max_step: Option<f64>,
    /// Steps per carrier period `1/F`.
    pub samples_per_period: f64,
    /// Steps per period of the fastest retained line `2 pi / (2 Jmax)` and of
    /// the Rabi frequency `A`.
    pub steps_per_bohr_period: f64,
    /// Maximum tolerated `| |psi|^2 - 1 |` at pulse end.
    pub norm_tolerance: f64,
    /// Maximum population left in the two highest levels.
    pub truncation_tolerance: f64,
    /// How often the basis headroom may be doubled before giving up.
    pub max_headroom_doublings: u32,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            max_step: None,
            samples_per_period: 96.0,
            steps_per_bohr_period: 8.0,
            norm_tolerance: 1e-8,
            truncation_tolerance: 1e-10,
            max_headroom_doublings: 4,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::domain("max_step", h, "must be > 0"));
            }
        }
        if !(self.samples_per_period >= 64.0) {
            return Err(Error::domain(
                "samples_per_period",
                self.samples_per_period,
                "must be >= 64",
            ));
        }
        if !(self.steps_per_bohr_period > 0.0) {
            return Err(Error::domain(
                "steps_per_bohr_period",
                self.steps_per_bohr_period,
                "must be > 0",
            ));
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::domain("norm_tolerance", self.norm_tolerance, "must be > 0"));
        }
        if !(self.truncation_tolerance > 0.0) {
            return Err(Error::domain(
                "truncation_tolerance",
                self.truncation_tolerance,
                "must be > 0",
            ));
        }
        Ok(())
    }

    /// Same configuration with every step bound halved.
    pub fn halved(&self) -> Self {
        PropagationConfig {
            max_step: self.max_step.map(|h| 0.5 * h),
            samples_per_period: 2.0 * self.samples_per_period,
            steps_per_bohr_period: 2.0 * self.steps_per_bohr_period,
            ..*self
        }
    }

    /// Number of uniform steps across the pulse for a basis reaching `jmax`.
    pub fn step_count(&self, pulse: &PulseShape, jmax: u32) -> usize {
        let mut h = 1.0 / (self.samples_per_period * pulse.f);
        let fastest = (2.0 * jmax.max(1) as f64).max(pulse.a);
        h = h.min(2.0 * PI / (self.steps_per_bohr_period * fastest));
        if let Some(max) = self.max_step {
            h = h.min(max);
        }
        ((pulse.d / h).ceil() as usize).max(16)
    }
}

/// Levels kept above the initial `J0`: enough for the field to climb about
/// `sqrt(A)` levels and to reach the highest resonant line.
pub fn default_headroom(pulse: &PulseShape) -> u32 {
    let climb = (3.0 * pulse.a.sqrt()).ceil() as u32;
    let resonant = (2.0 * PI * pulse.f * pulse.d).ceil() as u32 + 10;
    20.max(climb).max(resonant)
}

/// Stepper state for one trajectory through one pulse.
pub(crate) struct Stepper<'a> {
    ops: &'a RotorOperators,
    pulse: &'a PulseShape,
    upper: Vec<Complex64>,
    ws: Workspace,
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6

impl<'a> Stepper<'a> {
    pub(crate) fn new(ops: &'a RotorOperators, pulse: &'a PulseShape) -> Self {
        Stepper {
            ops,
            pulse,
            upper: vec![Complex64::default(); ops.coupling.len()],
            ws: Workspace::default(),
        }
    }

    /// Advance `psi` from `tau` to `tau + h`.
    pub(crate) fn step(&mut self, psi: &mut [Complex64], tau: f64, h: f64) {
        let g1 = self.pulse.waveform(tau + h * (0.5 - GAUSS_OFFSET));
        let g2 = self.pulse.waveform(tau + h * (0.5 + GAUSS_OFFSET));
        let mean = 0.5 * (g1 + g2);
        // i sqrt(3)/6 h (g2 - g1) (J+1) C_J from the commutator term
        let comm = GAUSS_OFFSET * h * (g2 - g1);
        let jmin = self.ops.basis.jmin() as f64;
        for (i, (u, &c)) in self.upper.iter_mut().zip(&self.ops.coupling).enumerate() {
            let jp1 = jmin + i as f64 + 1.0;
            *u = Complex64::new(-mean * c, comm * jp1 * c);
        }
        let mat = Tridiagonal {
            diag: &self.ops.kinetic,
            upper: &self.upper,
        };
        chebyshev::propagate(&mat, h, psi, &mut self.ws);
    }
}

/// Result of driving one state through the pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseOutcome {
    pub state: RotorState,
    pub norm_drift: f64,
    pub steps: usize,
    /// `<cos theta>` at `samples + 1` uniform times across the pulse, if requested.
    pub samples: Vec<f64>,
}

/// Propagate with explicit operators; `samples > 0` records `<cos theta>` at
/// `samples + 1` uniform times including both pulse edges.
pub(crate) fn drive(
    ops: &RotorOperators,
    initial: &[Complex64],
    pulse: &PulseShape,
    cfg: &PropagationConfig,
    samples: usize,
) -> (Vec<Complex64>, usize, Vec<f64>) {
    let mut steps = cfg.step_count(pulse, ops.basis.jmax);
    let stride = if samples > 0 {
        let stride = steps.div_ceil(samples);
        steps = stride * samples;
        stride
    } else {
        usize::MAX
    };
    let h = pulse.d / steps as f64;
    let (lo, _) = pulse.support();
    let mut psi = initial.to_vec();
    let mut stepper = Stepper::new(ops, pulse);
    let mut recorded = Vec::with_capacity(samples + 1);
    if samples > 0 {
        recorded.push(ops.cos_theta(&psi));
    }
    for k in 0..steps {
        stepper.step(&mut psi, lo + k as f64 * h, h);
        if samples > 0 && (k + 1) % stride == 0 {
            recorded.push(ops.cos_theta(&psi));
        }
    }
    (psi, steps, recorded)
}

/// Propagate `initial` from `tau = -D/2` to `tau = +D/2` in its own basis.
pub fn propagate_pulse(
    initial: &RotorState,
    pulse: &PulseShape,
    cfg: &PropagationConfig,
) -> Result<RotorState> {
    Ok(propagate_pulse_sampled(initial, pulse, cfg, 0)?.state)
}

/// As [`propagate_pulse`], optionally recording `<cos theta>` inside the pulse.
pub fn propagate_pulse_sampled(
    initial: &RotorState,
    pulse: &PulseShape,
    cfg: &PropagationConfig,
    samples: usize,
) -> Result<PulseOutcome> {
    cfg.validate()?;
    let n0 = initial.norm_sqr();
    if (n0 - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "initial state must be normalized, |psi|^2 = {n0}"
        )));
    }
    let ops = RotorOperators::new(initial.basis);
    let (amplitudes, steps, samples) = drive(&ops, &initial.amplitudes, pulse, cfg, samples);
    let state = RotorState {
        basis: initial.basis,
        amplitudes,
    };
    let norm_drift = (state.norm_sqr() - n0).abs();
    if norm_drift > cfg.norm_tolerance {
        return Err(Error::Integration {
            drift: norm_drift,
            tolerance: cfg.norm_tolerance,
        });
    }
    let top = state.top_population();
    if top >= cfg.truncation_tolerance {
        return Err(Error::BasisEscape {
            population: top,
            jmax: initial.basis.jmax,
        });
    }
    Ok(PulseOutcome {
        state,
        norm_drift,
        steps,
        samples,
    })
}

/// Drive `|J0, M0>` through the pulse, enlarging the basis until the top
/// levels stay empty.
pub fn propagate_basis_state(
    j0: u32,
    m0: i32,
    pulse: &PulseShape,
    cfg: &PropagationConfig,
    samples: usize,
) -> Result<PulseOutcome> {
    let mut headroom = default_headroom(pulse);
    let mut attempt = 0;
    loop {
        let basis = BasisSpec::new(m0, j0 + headroom)?;
        let initial = RotorState::basis_state(basis, j0)?;
        match propagate_pulse_sampled(&initial, pulse, cfg, samples) {
            Err(Error::BasisEscape { .. }) if attempt < cfg.max_headroom_doublings => {
                headroom *= 2;
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Exact field-free evolution: `a_J -> a_J exp(-i J(J+1) dtau)`.
pub fn free_evolve(state: &RotorState, dtau: f64) -> Result<RotorState> {
    if !(dtau >= 0.0) {
        return Err(Error::domain("dtau", dtau, "must be >= 0"));
    }
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let j = state.basis.j_of(i) as f64;
            a * Complex64::from_polar(1.0, -j * (j + 1.0) * dtau)
        })
        .collect();
    Ok(RotorState {
        basis: state.basis,
        amplitudes,
    })
}
