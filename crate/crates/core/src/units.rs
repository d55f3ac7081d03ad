//! Conversion between laboratory units and the dimensionless parameters that
//! drive the dynamics.
//!
//! Time is measured in units of the inverse rotational angular frequency
//! `omega_B = 2 pi c B`, so that the free rotor has period `pi`. With that
//! scale,
//!
//! ```text
//! A  = mu0 E / (hbar omega_B)
//! F  = f / omega_B
//! D  = omega_B delta
//! T~ = kB T / (hbar omega_B)
//! ```
//!
//! The field value entering `A` is whatever the caller puts in
//! [`PhysicalField::e_peak`]. The built-in molecule fixtures are paired with
//! [`PhysicalField::reference`], which carries 2 MV/cm.

use serde::{Deserialize, Serialize};

use crate::constants::{
    rotational_angular_frequency, BOLTZMANN, DEBYE, HBAR, MV_PER_CM, PICOSECOND, TERAHERTZ,
};
use crate::error::{Error, Result};

/// A linear polar molecule: rotational constant in cm^-1 and permanent
/// dipole moment in debye.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalMolecule {
    pub name: String,
    pub b: f64,
    pub mu0: f64,
}

impl PhysicalMolecule {
    pub fn new(name: impl Into<String>, b: f64, mu0: f64) -> Result<Self> {
        let m = PhysicalMolecule {
            name: name.into(),
            b,
            mu0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0) || !self.b.is_finite() {
            return Err(Error::domain("B", self.b, "rotational constant must be > 0"));
        }
        if !(self.mu0 >= 0.0) || !self.mu0.is_finite() {
            return Err(Error::domain("mu0", self.mu0, "dipole moment must be >= 0"));
        }
        Ok(())
    }

    /// Angular frequency `omega_B` in rad/s.
    pub fn omega(&self) -> f64 {
        rotational_angular_frequency(self.b)
    }
}

/// Pulse parameters in laboratory units: amplitude in MV/cm, duration in ps,
/// central frequency in THz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    pub e_peak: f64,
    pub delta: f64,
    pub f: f64,
}

impl PhysicalField {
    /// 2 MV/cm, 5 ps, 0.5 THz: the field used for the molecule table and the
    /// (B, T) maps.
    pub const fn reference() -> Self {
        PhysicalField {
            e_peak: 2.0,
            delta: 5.0,
            f: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_peak >= 0.0) || !self.e_peak.is_finite() {
            return Err(Error::domain("E_peak", self.e_peak, "amplitude must be >= 0"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::domain("delta", self.delta, "duration must be > 0"));
        }
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::domain("f", self.f, "frequency must be > 0"));
        }
        Ok(())
    }
}

/// Dimensionless amplitude, carrier frequency, duration and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub a: f64,
    pub f: f64,
    pub d: f64,
    pub t_tilde: f64,
}

impl ReducedParams {
    pub fn new(a: f64, f: f64, d: f64, t_tilde: f64) -> Result<Self> {
        let p = ReducedParams { a, f, d, t_tilde };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::domain("A", self.a, "amplitude must be >= 0"));
        }
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::domain("F", self.f, "frequency must be > 0"));
        }
        if !(self.d > 0.0) || !self.d.is_finite() {
            return Err(Error::domain("D", self.d, "duration must be > 0"));
        }
        if !(self.t_tilde >= 0.0) || !self.t_tilde.is_finite() {
            return Err(Error::domain("T_tilde", self.t_tilde, "temperature must be >= 0"));
        }
        Ok(())
    }
}

/// Reduce a molecule, a field and a temperature (K) to dimensionless form.
pub fn to_reduced(
    mol: &PhysicalMolecule,
    field: &PhysicalField,
    temperature: f64,
) -> Result<ReducedParams> {
    mol.validate()?;
    field.validate()?;
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::domain("T", temperature, "temperature must be >= 0"));
    }
    let omega = mol.omega();
    let energy = HBAR * omega;
    Ok(ReducedParams {
        a: mol.mu0 * DEBYE * field.e_peak * MV_PER_CM / energy,
        f: field.f * TERAHERTZ / omega,
        d: omega * field.delta * PICOSECOND,
        t_tilde: BOLTZMANN * temperature / energy,
    })
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(field, value, "must be > 0"))
    }
}

/// Pulse duration in ps for a reduced duration `d` at rotational constant `b` (cm^-1).
pub fn from_reduced_duration(b: f64, d: f64) -> Result<f64> {
    positive("B", b)?;
    positive("D", d)?;
    Ok(d / rotational_angular_frequency(b) / PICOSECOND)
}

/// Central frequency in THz for a reduced frequency `f`.
pub fn from_reduced_frequency(b: f64, f: f64) -> Result<f64> {
    positive("B", b)?;
    positive("F", f)?;
    Ok(f * rotational_angular_frequency(b) / TERAHERTZ)
}

/// Temperature in K for a reduced temperature.
pub fn from_reduced_temperature(b: f64, t_tilde: f64) -> Result<f64> {
    positive("B", b)?;
    if !(t_tilde >= 0.0) || !t_tilde.is_finite() {
        return Err(Error::domain("T_tilde", t_tilde, "must be >= 0"));
    }
    Ok(t_tilde * HBAR * rotational_angular_frequency(b) / BOLTZMANN)
}

/// Peak field in MV/cm giving reduced amplitude `a` for a molecule.
pub fn from_reduced_amplitude(mol: &PhysicalMolecule, a: f64) -> Result<f64> {
    mol.validate()?;
    positive("mu0", mol.mu0)?;
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain("A", a, "must be >= 0"));
    }
    Ok(a * HBAR * mol.omega() / (mol.mu0 * DEBYE * MV_PER_CM))
}

/// One row of the built-in molecule table, together with the published
/// reduced values at the reference field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoleculeEntry {
    pub name: &'static str,
    pub b: f64,
    pub mu0: f64,
    pub a: f64,
    pub f: f64,
    pub d: f64,
}

impl MoleculeEntry {
    pub fn molecule(&self) -> PhysicalMolecule {
        PhysicalMolecule {
            name: self.name.to_string(),
            b: self.b,
            mu0: self.mu0,
        }
    }
}

pub const MOLECULES: [MoleculeEntry; 5] = [
    MoleculeEntry { name: "OCS", b: 0.2029, mu0: 0.712, a: 117.8497, f: 13.0823, d: 0.1911 },
    MoleculeEntry { name: "HF", b: 20.956, mu0: 1.820, a: 2.9167, f: 0.1267, d: 19.7371 },
    MoleculeEntry { name: "LiH", b: 7.513, mu0: 5.88, a: 26.2842, f: 0.3533, d: 7.0760 },
    MoleculeEntry { name: "CO", b: 1.931, mu0: 0.112, a: 1.9479, f: 1.3746, d: 1.8187 },
    MoleculeEntry { name: "LiCl", b: 1.345, mu0: 6.33, a: 158.0563, f: 1.9735, d: 1.2668 },
];

/// Look a built-in molecule up by name (case-insensitive).
pub fn molecule(name: &str) -> Result<PhysicalMolecule> {
    MOLECULES
        .iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
        .map(MoleculeEntry::molecule)
        .ok_or_else(|| Error::UnknownMolecule {
            name: name.to_string(),
            available: MOLECULES.iter().map(|m| m.name).collect::<Vec<_>>().join(", "),
        })
}
