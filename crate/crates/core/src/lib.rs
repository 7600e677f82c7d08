//! Quantum speed limits for few-level systems and interacting qubit arrays.
//!
//! All energies are angular frequencies in rad/ns (ħ = 1) and all times are
//! in ns. Inputs given in MHz are converted with [`units::mhz_to_angular`].

#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod freefermion;
pub mod hamiltonians;
pub mod hilbert;
pub mod par;
pub mod rootfind;
pub mod scenario;
pub mod spectral;
pub mod units;

pub(crate) mod serde_f64;

pub use error::{QslError, Result};
