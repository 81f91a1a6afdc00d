//! Baseband simulation of OFDM receivers with IQ imbalance: a time-domain
//! least-squares channel and imbalance estimator driven by two pilot
//! symbols, a Gaussian-elimination equalizer, a per-bin least-squares
//! baseline, and the Monte-Carlo harness that compares them.

pub mod channel;
pub mod equalization;
mod error;
pub mod estimation;
pub mod harness;
pub mod iq;
pub mod ofdm;
pub mod pilot;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::C64;
