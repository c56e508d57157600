//! Harmonic-measure spectra of Schramm–Loewner evolution: closed forms,
//! hypergeometric boundary solutions, Monte Carlo moment estimation and
//! residual checks of the governing equations.

pub mod error;
pub mod cli;
pub mod consistency;
pub mod exponents;
pub mod loewner;
pub mod moments;
pub mod pde;
pub mod rng;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
