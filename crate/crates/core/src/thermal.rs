//! Boltzmann ensemble of initial rotor states and the thermal average of
//! per-member expectation values.
//!
//! Each initial state `|J0, M0>` carries weight `c_J0 / Z` with
//! `c_J = exp(-J(J+1)/T~)` and `Z = sum_J (2J+1) c_J`. Since `cos(theta)`
//! depends on `|M|` only, `+M0` and `-M0` evolve identically and are folded
//! into one member of multiplicity 2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tail mass left out of the propagated ensemble.
pub const DEFAULT_CUTOFF: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemberId {
    pub j0: u32,
    pub m0: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub id: MemberId,
    /// 1 for `M0 = 0`, 2 otherwise.
    pub multiplicity: u32,
    /// `multiplicity * c_J0 / Z`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    pub t_tilde: f64,
    pub cutoff: f64,
    /// `c_J` for `J = 0 ..= j0max`.
    pub weights: Vec<f64>,
    pub z: f64,
    pub j0max: u32,
    /// Relative population of the levels above `j0max`.
    pub tail_mass: f64,
    /// Sorted by `(J0, M0)`.
    pub members: Vec<Member>,
}

/// Short description of an ensemble for result headers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub t_tilde: f64,
    pub j0max: u32,
    pub members: usize,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OrientationDecomposition {
    pub total: f64,
    pub zero_t: f64,
    pub thermal: f64,
}

/// `c_J = exp(-J(J+1)/T~)`, with `c_0 = 1` and `c_J = 0` for `J > 0` at `T~ = 0`.
pub fn boltzmann_weight(t_tilde: f64, j: u32) -> f64 {
    if j == 0 {
        1.0
    } else if t_tilde == 0.0 {
        0.0
    } else {
        let j = j as f64;
        (-j * (j + 1.0) / t_tilde).exp()
    }
}

/// `Z = sum_J (2J+1) c_J` summed to machine convergence.
pub fn partition_function(t_tilde: f64) -> f64 {
    if t_tilde == 0.0 {
        return 1.0;
    }
    let mut z = 0.0;
    let mut j = 0u32;
    loop {
        let term = (2 * j + 1) as f64 * boltzmann_weight(t_tilde, j);
        z += term;
        // terms decrease monotonically once past the maximum of (2J+1) c_J
        if (j as f64) > t_tilde.sqrt() && term < f64::EPSILON * 1e-3 * z {
            break;
        }
        j += 1;
    }
    z
}

impl ThermalEnsemble {
    pub fn new(t_tilde: f64) -> Result<Self> {
        Self::with_cutoff(t_tilde, DEFAULT_CUTOFF)
    }

    /// Build the ensemble keeping every `J0` until the relative population
    /// above it drops to `cutoff`.
    pub fn with_cutoff(t_tilde: f64, cutoff: f64) -> Result<Self> {
        if !(t_tilde >= 0.0) || !t_tilde.is_finite() {
            return Err(Error::domain("T_tilde", t_tilde, "temperature must be >= 0"));
        }
        if !(cutoff > 0.0 && cutoff < 1.0) {
            return Err(Error::domain("cutoff", cutoff, "tail mass must lie in (0, 1)"));
        }
        let z = partition_function(t_tilde);

        // populations (2J+1) c_J / Z until the remaining tail is below cutoff
        let mut j0max = 0u32;
        let mut kept = boltzmann_weight(t_tilde, 0) / z;
        let tail = |j0max: u32| -> f64 {
            let mut s = 0.0;
            let mut j = j0max + 1;
            loop {
                let term = (2 * j + 1) as f64 * boltzmann_weight(t_tilde, j) / z;
                s += term;
                if term == 0.0 || ((j as f64) > t_tilde.sqrt() && term < f64::EPSILON * 1e-3 * s) {
                    break;
                }
                j += 1;
            }
            s
        };
        let mut tail_mass = tail(0);
        while tail_mass > cutoff {
            j0max += 1;
            kept += (2 * j0max + 1) as f64 * boltzmann_weight(t_tilde, j0max) / z;
            tail_mass = tail(j0max);
        }
        debug_assert!(kept <= 1.0 + 1e-12);

        let weights: Vec<f64> = (0..=j0max).map(|j| boltzmann_weight(t_tilde, j)).collect();
        let members = (0..=j0max)
            .flat_map(|j0| (0..=j0).map(move |m0| (j0, m0)))
            .map(|(j0, m0)| {
                let multiplicity = if m0 == 0 { 1 } else { 2 };
                Member {
                    id: MemberId { j0, m0 },
                    multiplicity,
                    weight: multiplicity as f64 * weights[j0 as usize] / z,
                }
            })
            .collect();
        Ok(ThermalEnsemble {
            t_tilde,
            cutoff,
            weights,
            z,
            j0max,
            tail_mass,
            members,
        })
    }

    pub fn summary(&self) -> EnsembleSummary {
        EnsembleSummary {
            t_tilde: self.t_tilde,
            j0max: self.j0max,
            members: self.members.len(),
            tail_mass: self.tail_mass,
        }
    }

    /// `c_J` for any `J`, not only the propagated ones.
    pub fn c(&self, j: u32) -> f64 {
        boltzmann_weight(self.t_tilde, j)
    }

    fn aligned<'a>(&self, values: &'a BTreeMap<MemberId, f64>) -> Result<Vec<f64>> {
        self.members
            .iter()
            .map(|m| {
                values.get(&m.id).copied().ok_or(Error::IncompleteEnsemble {
                    j0: m.id.j0,
                    m0: m.id.m0,
                })
            })
            .collect()
    }

    /// Weighted sum of per-member values in `(J0, M0)` order.
    pub fn thermal_expectation(&self, values: &BTreeMap<MemberId, f64>) -> Result<f64> {
        Ok(self.decompose(values)?.total)
    }

    /// Split the thermal average into the `J0 = 0` term and the rest.
    pub fn decompose(&self, values: &BTreeMap<MemberId, f64>) -> Result<OrientationDecomposition> {
        let v = self.aligned(values)?;
        Ok(self.decompose_aligned(&v))
    }

    /// As [`decompose`](Self::decompose) with values already in member order.
    pub fn decompose_aligned(&self, values: &[f64]) -> OrientationDecomposition {
        assert_eq!(values.len(), self.members.len());
        let zero_t = self.members[0].weight * values[0];
        let thermal = self.members[1..]
            .iter()
            .zip(&values[1..])
            .fold(0.0, |acc, (m, v)| acc + m.weight * v);
        OrientationDecomposition {
            total: zero_t + thermal,
            zero_t,
            thermal,
        }
    }
}
