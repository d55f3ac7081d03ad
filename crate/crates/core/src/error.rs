use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input parameter lies outside its physical domain.
    #[error("invalid {field}: {value} ({reason})")]
    Domain {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Norm of a trajectory drifted further than the configured tolerance.
    #[error("integration failure: norm drift {drift:.3e} exceeds tolerance {tolerance:.3e}")]
    Integration { drift: f64, tolerance: f64 },

    /// Population kept leaking into the top of the truncated basis.
    #[error("basis escape: top-level population {population:.3e} with Jmax = {jmax}")]
    BasisEscape { population: f64, jmax: u32 },

    #[error("incomplete ensemble: no value for member (J0 = {j0}, M0 = {m0})")]
    IncompleteEnsemble { j0: u32, m0: u32 },

    #[error("unknown molecule '{name}' (available: {available})")]
    UnknownMolecule { name: String, available: String },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn domain(field: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            field,
            value,
            reason,
        }
    }
}
