#![no_std]
//! Markovian dynamics of periodically kicked open quantum systems.
//!
//! The crate is `no_std` and needs only `alloc`. Modules, bottom up:
//!
//! - [`operators`]: dense complex matrices, density matrices, superoperators.
//! - [`floquet`]: kicked models, Floquet operator, sawtooth propagator and
//!   harmonic decomposition of coupling operators.
//! - [`bath`]: spectral densities.
//! - [`lindblad`]: interaction-picture generator assembly and closed-form rates.
//! - [`dynamics`]: trajectories in the interaction, rotating and lab frames.
//! - [`echo`]: detuning ensembles, spin-echo signals, bath-time extraction.
//! - [`oracle`]: slow brute-force validators.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bath;
pub mod dynamics;
pub mod echo;
pub mod error;
pub mod floquet;
pub mod lindblad;
pub mod operators;
pub mod oracle;
pub mod tls;

pub use error::{Error, Result};
