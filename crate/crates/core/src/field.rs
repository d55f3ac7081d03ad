//! The zero-area pulse `A cos^2(pi tau / D) sin(2 pi F tau)` on
//! `[-D/2, D/2]`, its Fourier magnitude, and the overlap of that spectrum with
//! the rotational lines.
//!
//! Frequencies in [`FieldSpectrum`] are ordinary (cycles per unit reduced
//! time), so the carrier sits near `nu = F`. Rotational lines have angular
//! frequency `omega_J = 2(J+1)`; the overlap report evaluates the spectrum at
//! `nu = omega_J / (2 pi)` so both live on one axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::ThermalEnsemble;
use crate::units::ReducedParams;

/// Minimum number of time samples per carrier period for spectra.
const SAMPLES_PER_PERIOD: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub a: f64,
    pub f: f64,
    pub d: f64,
}

impl From<&ReducedParams> for PulseShape {
    fn from(p: &ReducedParams) -> Self {
        PulseShape {
            a: p.a,
            f: p.f,
            d: p.d,
        }
    }
}

impl PulseShape {
    pub fn new(a: f64, f: f64, d: f64) -> Result<Self> {
        ReducedParams::new(a, f, d, 0.0)?;
        Ok(PulseShape { a, f, d })
    }

    /// Support `[-D/2, D/2]`.
    pub fn support(&self) -> (f64, f64) {
        (-0.5 * self.d, 0.5 * self.d)
    }

    /// Envelope times carrier, without the amplitude.
    #[inline]
    pub fn shape(&self, tau: f64) -> f64 {
        if tau.abs() > 0.5 * self.d {
            return 0.0;
        }
        let env = (PI * tau / self.d).cos();
        env * env * (2.0 * PI * self.f * tau).sin()
    }

    #[inline]
    pub fn waveform(&self, tau: f64) -> f64 {
        self.a * self.shape(tau)
    }

    /// Composite Simpson integral of the waveform over its support.
    pub fn area(&self, resolution: usize) -> Result<f64> {
        self.integrate(resolution, |t| self.waveform(t))
    }

    /// Integral of `|waveform|`.
    pub fn rectified_area(&self, resolution: usize) -> Result<f64> {
        self.integrate(resolution, |t| self.waveform(t).abs())
    }

    fn integrate(&self, resolution: usize, g: impl Fn(f64) -> f64) -> Result<f64> {
        if resolution < 1000 {
            return Err(Error::Precondition(format!(
                "quadrature needs at least 1000 samples, got {resolution}"
            )));
        }
        let n = resolution + resolution % 2;
        let (lo, _) = self.support();
        let h = self.d / n as f64;
        // pair samples symmetrically about tau = 0 so an odd integrand cancels
        // term by term
        let mut s = g(lo) + g(-lo);
        for k in 1..n / 2 {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            let t = lo + k as f64 * h;
            s += w * (g(t) + g(-t));
        }
        s += if (n / 2) % 2 == 1 { 4.0 } else { 2.0 } * g(0.0);
        Ok(s * h / 3.0)
    }

    fn time_samples(&self) -> usize {
        let per_carrier = (SAMPLES_PER_PERIOD * self.f * self.d).ceil() as usize;
        per_carrier.max(512)
    }

    /// `|integral waveform(tau) exp(-2 pi i nu tau) dtau|`, trapezoid rule on
    /// the same oversampled grid as [`spectrum`](Self::spectrum).
    pub fn fourier_magnitude(&self, nu: f64) -> f64 {
        let n = self.time_samples();
        let h = self.d / n as f64;
        let (lo, _) = self.support();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..n {
            let t = lo + k as f64 * h;
            acc += Complex64::from_polar(self.waveform(t), -2.0 * PI * nu * t);
        }
        (acc * h).norm()
    }

    /// Fourier magnitude on a uniform frequency grid via a zero-padded FFT.
    pub fn spectrum(&self, grid: &FrequencyGrid) -> Result<FieldSpectrum> {
        let max_resolution = 1.0 / (20.0 * self.d);
        if !(grid.resolution > 0.0) || grid.resolution > max_resolution {
            return Err(Error::Precondition(format!(
                "spectrum resolution {} is coarser than 1/(20 D) = {max_resolution}",
                grid.resolution
            )));
        }
        let n = self.time_samples();
        let h = self.d / n as f64;
        let (lo, _) = self.support();
        let fft_len = ((1.0 / (grid.resolution * h)).ceil() as usize)
            .max(n + 1)
            .next_power_of_two();
        let mut buf: Vec<Complex64> = (0..fft_len)
            .map(|k| {
                if k <= n {
                    Complex64::new(self.waveform(lo + k as f64 * h), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        FftPlanner::new().plan_fft_forward(fft_len).process(&mut buf);

        let resolution = 1.0 / (fft_len as f64 * h);
        let nu_max = grid.max.max(self.f + 10.0 / self.d);
        let bins = ((nu_max / resolution).ceil() as usize + 1).min(fft_len / 2);
        let frequencies = (0..bins).map(|k| k as f64 * resolution).collect();
        // shifting the time origin only changes the phase
        let magnitudes = buf[..bins].iter().map(|z| z.norm() * h).collect();
        Ok(FieldSpectrum {
            frequencies,
            magnitudes,
            resolution,
        })
    }

    /// Rotational lines `omega_J = 2(J+1)` for `J = 0 ..= jmax_lines`, weighted
    /// by the mean thermal population of `J` and `J+1`.
    pub fn overlap_report(&self, ensemble: &ThermalEnsemble, jmax_lines: u32) -> OverlapReport {
        let lines: Vec<SpectralLine> = (0..=jmax_lines)
            .map(|j| {
                let omega = 2.0 * (j as f64 + 1.0);
                SpectralLine {
                    j,
                    omega,
                    population: 0.5 * (ensemble.c(j) + ensemble.c(j + 1)),
                    magnitude: self.fourier_magnitude(omega / (2.0 * PI)),
                }
            })
            .collect();
        let score = lines.iter().map(|l| l.population * l.magnitude).sum();
        OverlapReport { lines, score }
    }
}

/// Requested frequency grid: spacing and upper edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub resolution: f64,
    pub max: f64,
}

impl FrequencyGrid {
    /// 40 points across `1/D` up to `F + 10/D`.
    pub fn for_pulse(pulse: &PulseShape) -> Self {
        FrequencyGrid {
            resolution: 1.0 / (40.0 * pulse.d),
            max: pulse.f + 10.0 / pulse.d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub resolution: f64,
}

impl FieldSpectrum {
    /// `(frequency, magnitude)` of the largest bin.
    pub fn peak(&self) -> (f64, f64) {
        let (k, m) = self
            .magnitudes
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (k, &m)| if m > best.1 { (k, m) } else { best });
        (self.frequencies[k], m)
    }

    /// Full width at half maximum around the peak, by linear interpolation.
    pub fn fwhm(&self) -> f64 {
        let (nu_peak, m) = self.peak();
        let k = (nu_peak / self.resolution).round() as usize;
        let half = 0.5 * m;
        let cross = |i: usize, j: usize| {
            let (m0, m1) = (self.magnitudes[i], self.magnitudes[j]);
            let (f0, f1) = (self.frequencies[i], self.frequencies[j]);
            f0 + (half - m0) * (f1 - f0) / (m1 - m0)
        };
        let lo = (1..=k)
            .rev()
            .find(|&i| self.magnitudes[i - 1] < half)
            .map(|i| cross(i - 1, i))
            .unwrap_or(0.0);
        let hi = (k..self.magnitudes.len() - 1)
            .find(|&i| self.magnitudes[i + 1] < half)
            .map(|i| cross(i, i + 1))
            .unwrap_or(*self.frequencies.last().unwrap());
        hi - lo
    }

    pub fn normalized(&self) -> Vec<f64> {
        let (_, m) = self.peak();
        self.magnitudes.iter().map(|x| if m > 0.0 { x / m } else { 0.0 }).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    pub j: u32,
    pub omega: f64,
    /// `(c_J + c_{J+1}) / 2`.
    pub population: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub lines: Vec<SpectralLine>,
    /// `sum_J P_J |spectrum(omega_J)|`.
    pub score: f64,
}
