//! Field-free orientation of linear polar molecules driven by zero-area THz
//! pulses.
//!
//! The crate reduces a molecule and a pulse to the dimensionless parameters
//! `(A, F, D, T~)`, propagates every thermally populated rotor state through
//! the pulse in the spectral `|J, M>` basis, and averages `<cos theta>` over
//! the Boltzmann ensemble. On top of that sit the spectral diagnostics and the
//! parameter scans.

mod chebyshev;
pub mod constants;
pub mod error;
pub mod field;
pub mod orientation;
pub mod propagator;
pub mod rotor;
pub mod scans;
pub mod thermal;
pub mod units;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/reduced-units.md")]
    mod reduced_units {}
    #[doc = include_str!("../../../book/src/rotor-basis.md")]
    mod rotor_basis {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/thermal-ensembles.md")]
    mod thermal_ensembles {}
    #[doc = include_str!("../../../book/src/pulse-spectrum.md")]
    mod pulse_spectrum {}
    #[doc = include_str!("../../../book/src/scans.md")]
    mod scans {}
    #[doc = include_str!("../../../book/src/command-line.md")]
    mod command_line {}
}
