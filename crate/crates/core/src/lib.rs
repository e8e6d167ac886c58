//! Noise budgeting and classical-band placement for a DV-QKD channel
//! sharing fibre with DWDM classical channels.
//!
//! The model chain runs from the channel plan through spontaneous Raman
//! scattering ([`spectra`], [`link`]) and four-wave mixing ([`nonlinear`]) to
//! detector counts, then to QBER and key rate for a COW link ([`qkd`]).
//! [`planner`] sweeps spacing and power on top of that, and [`config`] /
//! [`cli`] drive it from JSON scenario documents.

pub mod cli;
pub mod config;
pub mod error;
pub mod link;
pub mod nonlinear;
pub mod planner;
pub mod presets;
pub mod qkd;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
