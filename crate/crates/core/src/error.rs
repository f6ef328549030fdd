use thiserror::Error;

/// Errors raised by the state, optics, matter and measurement layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register `{0}` is declared twice")]
    DuplicateRegister(String),

    #[error("register `{0}` is not part of the state")]
    MissingRegister(String),

    #[error("label `{label}` is not in the basis of register `{register}`")]
    UnknownLabel { register: String, label: String },

    #[error("label tuple has {got} entries but the state has {expected} registers")]
    TupleArity { expected: usize, got: usize },

    #[error("map does not match the basis of register `{register}`: {reason}")]
    LabelMismatch { register: String, reason: String },

    #[error("cannot normalize a state of norm {0:e}")]
    ZeroNorm(f64),

    #[error("state is not normalized (norm {0})")]
    Unnormalized(f64),

    #[error("keep set for partial trace is empty")]
    EmptyKeep,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("residual |g> population {0:e} on a matrix restricted to the metastable subspace")]
    GroundPopulation(f64),

    #[error("photon register is in the {found} basis, expected {expected}")]
    PhotonBasis {
        expected: &'static str,
        found: &'static str,
    },

    #[error("outcome has no posterior state")]
    NoPosterior,

    #[error("atomic preparation: {0}")]
    Preparation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
