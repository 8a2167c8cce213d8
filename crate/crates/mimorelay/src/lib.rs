//! Simulator and analysis library for a multi-pair two-way relay with
//! massive-antenna hybrid analog/digital zero-forcing under an RF-chain
//! constraint.
//!
//! The crate is organized by pipeline stage: [`channel`] draws fading
//! realizations with their MMSE estimate/error split, [`hybrid`] builds the
//! phase-only analog and low-dimensional digital ZF stages, [`rate`] turns
//! realizations into ergodic spectral efficiencies (Monte Carlo and closed
//! form), [`energy`] layers the power-consumption model and EE optimization
//! on top, and [`harness`] drives the named experiments behind the CLI.

pub mod channel;
pub mod energy;
pub mod error;
pub mod harness;
pub mod hybrid;
pub mod rate;
pub mod seedstream;

pub use error::{Error, Result};
