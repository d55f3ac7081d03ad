//! Physical constants (CODATA 2018, SI) and the unit factors used at the
//! physical interface.
//!
//! Every value below is exact by definition of the 2019 SI except where noted.

use std::f64::consts::PI;

/// speed of light in vacuum (m s^-1)
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Planck constant (J s)
pub const PLANCK: f64 = 6.626_070_15e-34;

/// reduced Planck constant (J s)
pub const HBAR: f64 = PLANCK / (2.0 * PI);

/// Boltzmann constant (J K^-1)
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// one debye in C m (1e-21 / c, exact given c)
pub const DEBYE: f64 = 1.0e-21 / SPEED_OF_LIGHT;

/// MV/cm -> V/m
pub const MV_PER_CM: f64 = 1.0e8;

/// cm^-1 -> m^-1
pub const PER_CM: f64 = 1.0e2;

/// ps -> s
pub const PICOSECOND: f64 = 1.0e-12;

/// THz -> Hz
pub const TERAHERTZ: f64 = 1.0e12;

/// Angular frequency (rad s^-1) of a rotational constant given in cm^-1.
///
/// This is the time scale of the reduced units: `tau = omega_B * t`.
#[inline]
pub fn rotational_angular_frequency(b_per_cm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT * PER_CM * b_per_cm
}
