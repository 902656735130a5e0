//! Two-mode micromaser (mazer) pumped by ultracold three-level cascade atoms.

pub mod config;
pub mod error;
pub mod jc;
pub mod master;
pub mod scattering;
pub mod statistics;
pub mod sweep;
pub mod table;
pub mod units;

pub use error::{Error, Result};
