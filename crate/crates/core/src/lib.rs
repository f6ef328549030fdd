//! Single-photon Mach-Zehnder simulator for interaction-free measurements on
//! multilevel atoms.
//!
//! A photon enters one port of a balanced interferometer, meets
//! polarization-selective absorbers in either arm, and is detected at the
//! upper (`Du`) or lower (`Dl`) output port, optionally behind a polarization
//! analyser. The crate tracks the full photon ⊗ atoms pure state, the outcome
//! probabilities, and the reduced atomic state left after each outcome.
//!
//! - [`state`]: labeled sparse states, linear maps, density matrices
//! - [`optics`]: photon input, beam splitter, polarization basis changes
//! - [`matter`]: atom models and the absorption rule
//! - [`measurement`]: detectors, post-selection, posteriors
//! - [`metrics`]: purity, coherence, fidelity, concurrence
//! - [`oracle`]: dense-matrix reference implementation
//! - [`scenario`]: config files, the end-to-end run, reports

pub mod error;
pub mod matter;
pub mod measurement;
pub mod metrics;
pub mod optics;
pub mod oracle;
pub mod scenario;
pub mod state;

pub use error::{Error, Result};
