//! Ensemble propagation and the orientation observables built from it:
//! time traces and the post-pulse maximum.
//!
//! After the pulse every member evolves freely, so the thermal average of
//! `<cos theta>` is a trigonometric polynomial
//!
//! ```text
//! <cos theta>(s) = Re sum_J S_J exp(-2 i (J+1) s)
//! ```
//!
//! in the time `s` elapsed since the pulse ended, where `S_J` collects
//! `2 w conj(a_J) a_{J+1} C(J, M)` over the members. All frequencies are even
//! integers, so the signal repeats with period `pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::PulseShape;
use crate::propagator::{propagate_basis_state, PropagationConfig};
use crate::rotor::{RotorOperators, RotorState};
use crate::thermal::{EnsembleSummary, ThermalEnsemble, DEFAULT_CUTOFF};
use crate::units::ReducedParams;

/// Number of uniform in-pulse samples for time traces.
pub const IN_PULSE_SAMPLES: usize = 512;

/// Minimum number of dense samples used to bracket the post-pulse extremum.
pub const MIN_SEARCH_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub cutoff: f64,
    /// Record in-pulse `<cos theta>` for traces.
    pub in_pulse: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            cutoff: DEFAULT_CUTOFF,
            in_pulse: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemberOutcome {
    pub state: RotorState,
    pub norm_drift: f64,
    pub steps: usize,
    pub samples: Vec<f64>,
}

/// Every ensemble member driven to the end of the pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub params: ReducedParams,
    pub ensemble: ThermalEnsemble,
    /// Aligned with `ensemble.members`.
    pub members: Vec<MemberOutcome>,
}

/// Convergence bookkeeping of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub ensemble: EnsembleSummary,
    pub max_norm_drift: f64,
    pub max_jmax: u32,
    pub max_steps: usize,
}

/// Propagate every member of the thermal ensemble at `params.t_tilde`.
///
/// Members run in parallel on the current rayon pool; the results come back
/// in `(J0, M0)` order regardless of scheduling.
pub fn run_ensemble(
    params: &ReducedParams,
    cfg: &PropagationConfig,
    opts: &RunOptions,
) -> Result<EnsembleRun> {
    params.validate()?;
    cfg.validate()?;
    let ensemble = ThermalEnsemble::with_cutoff(params.t_tilde, opts.cutoff)?;
    let pulse = PulseShape::from(params);
    let samples = if opts.in_pulse { IN_PULSE_SAMPLES } else { 0 };
    let members = ensemble
        .members
        .par_iter()
        .map(|m| {
            propagate_basis_state(m.id.j0, m.id.m0 as i32, &pulse, cfg, samples).map(|o| {
                MemberOutcome {
                    state: o.state,
                    norm_drift: o.norm_drift,
                    steps: o.steps,
                    samples: o.samples,
                }
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleRun {
        params: *params,
        ensemble,
        members,
    })
}

/// `Re sum_J coeffs[J] exp(-2 i (J+1) s)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CoherenceSeries {
    pub coeffs: Vec<Complex64>,
}

impl CoherenceSeries {
    fn accumulate(&mut self, state: &RotorState, weight: f64) {
        let ops = RotorOperators::new(state.basis);
        let jmin = state.basis.jmin() as usize;
        let needed = jmin + ops.coupling.len();
        if self.coeffs.len() < needed {
            self.coeffs.resize(needed, Complex64::default());
        }
        for (i, (w, c)) in state.amplitudes.windows(2).zip(&ops.coupling).enumerate() {
            self.coeffs[jmin + i] += w[0].conj() * w[1] * (2.0 * weight * c);
        }
    }

    /// Series of a single state.
    pub fn of_state(state: &RotorState) -> Self {
        let mut s = CoherenceSeries::default();
        s.accumulate(state, 1.0);
        s
    }

    pub fn eval(&self, s: f64) -> f64 {
        let step = Complex64::from_polar(1.0, -2.0 * s);
        let mut z = step;
        let mut acc = 0.0;
        for c in &self.coeffs {
            acc += (c * z).re;
            z *= step;
        }
        acc
    }

    fn eval_direct(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| (c * Complex64::from_polar(1.0, -2.0 * (j as f64 + 1.0) * s)).re)
            .sum()
    }

    /// Largest `|value|` over one revival period `[0, pi)`.
    pub fn max_abs(&self) -> Extremum {
        if self.coeffs.iter().all(|c| c.norm() == 0.0) {
            return Extremum::default();
        }
        let n = MIN_SEARCH_SAMPLES.max(16 * (self.coeffs.len() + 1));
        let ds = PI / n as f64;
        let (k, _) = (0..n)
            .map(|k| (k, self.eval(k as f64 * ds).abs()))
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });

        // golden-section refinement inside the neighbouring samples
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let f = |s: f64| self.eval_direct(s).abs();
        let (mut a, mut b) = ((k as f64 - 1.0) * ds, (k as f64 + 1.0) * ds);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let (mut f1, mut f2) = (f(x1), f(x2));
        while b - a > 1e-7 {
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = f(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = f(x2);
            }
        }
        let s = 0.5 * (a + b);
        let mut best = Extremum {
            value: self.eval_direct(s),
            magnitude: f(s),
            time: s.rem_euclid(PI),
        };
        let sampled = self.eval_direct(k as f64 * ds);
        if sampled.abs() > best.magnitude {
            best = Extremum {
                value: sampled,
                magnitude: sampled.abs(),
                time: k as f64 * ds,
            };
        }
        best
    }
}

/// Signed value, magnitude, and time since the pulse ended.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub magnitude: f64,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MaxOrientation {
    pub total: Extremum,
    pub zero_t: Extremum,
    pub thermal: Extremum,
}

/// `<cos theta>` and its split into the ground-state and thermal parts.
/// Times are shifted so that the pulse ends at `tau = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientationTrace {
    pub times: Vec<f64>,
    pub total: Vec<f64>,
    pub zero_t: Vec<f64>,
    pub thermal: Vec<f64>,
    /// Index of the sample where the field switches off.
    pub pulse_end: usize,
}

impl EnsembleRun {
    /// Post-pulse series of the full average, its `J0 = 0` part and the rest.
    pub fn series(&self) -> (CoherenceSeries, CoherenceSeries, CoherenceSeries) {
        let mut zero = CoherenceSeries::default();
        let mut thermal = CoherenceSeries::default();
        for (m, out) in self.ensemble.members.iter().zip(&self.members) {
            if m.id.j0 == 0 {
                zero.accumulate(&out.state, m.weight);
            } else {
                thermal.accumulate(&out.state, m.weight);
            }
        }
        let len = zero.coeffs.len().max(thermal.coeffs.len());
        let mut total = CoherenceSeries {
            coeffs: vec![Complex64::default(); len],
        };
        for (t, z) in total.coeffs.iter_mut().zip(&zero.coeffs) {
            *t += z;
        }
        for (t, z) in total.coeffs.iter_mut().zip(&thermal.coeffs) {
            *t += z;
        }
        (total, zero, thermal)
    }

    pub fn max_orientation(&self) -> MaxOrientation {
        let (total, zero, thermal) = self.series();
        MaxOrientation {
            total: total.max_abs(),
            zero_t: zero.max_abs(),
            thermal: thermal.max_abs(),
        }
    }

    /// Thermal trace on the given post-pulse times (`>= 0`), preceded by the
    /// in-pulse samples when they were recorded.
    pub fn trace(&self, post_times: &[f64]) -> OrientationTrace {
        let mut times = Vec::new();
        let mut total = Vec::new();
        let mut zero_t = Vec::new();
        let mut thermal = Vec::new();

        let recorded = self.members.first().map_or(0, |m| m.samples.len());
        if recorded > 1 {
            let d = self.params.d;
            let n = recorded - 1;
            // the last in-pulse sample coincides with s = 0
            for k in 0..n {
                let values: Vec<f64> = self.members.iter().map(|m| m.samples[k]).collect();
                let dec = self.ensemble.decompose_aligned(&values);
                times.push(-d + d * k as f64 / n as f64);
                total.push(dec.total);
                zero_t.push(dec.zero_t);
                thermal.push(dec.thermal);
            }
        }
        let pulse_end = times.len();

        let per_member: Vec<_> = self.members.iter().map(|m| CoherenceSeries::of_state(&m.state)).collect();
        for &s in post_times {
            let values: Vec<f64> = per_member.iter().map(|c| c.eval(s)).collect();
            let dec = self.ensemble.decompose_aligned(&values);
            times.push(s);
            total.push(dec.total);
            zero_t.push(dec.zero_t);
            thermal.push(dec.thermal);
        }
        OrientationTrace {
            times,
            total,
            zero_t,
            thermal,
            pulse_end,
        }
    }

    pub fn diagnostics(&self) -> RunDiagnostics {
        RunDiagnostics {
            ensemble: self.ensemble.summary(),
            max_norm_drift: self.members.iter().map(|m| m.norm_drift).fold(0.0, f64::max),
            max_jmax: self.members.iter().map(|m| m.state.basis.jmax).max().unwrap_or(0),
            max_steps: self.members.iter().map(|m| m.steps).max().unwrap_or(0),
        }
    }
}

/// `n` uniform post-pulse times over `[0, periods * pi)`.
pub fn post_pulse_grid(n: usize, periods: f64) -> Vec<f64> {
    (0..n).map(|k| periods * PI * k as f64 / n as f64).collect()
}

/// Convenience: run the ensemble and return the maximum post-pulse orientation.
pub fn max_post_pulse_orientation(
    params: &ReducedParams,
    cfg: &PropagationConfig,
) -> Result<(MaxOrientation, RunDiagnostics)> {
    let run = run_ensemble(params, cfg, &RunOptions::default())?;
    Ok((run.max_orientation(), run.diagnostics()))
}
