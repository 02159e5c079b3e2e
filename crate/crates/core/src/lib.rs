//! Reduced-order modeling toolkit for a moving Gaussian laser heat source.

pub mod campaign;
pub mod diff;
pub mod error;
pub mod heat_source;
pub mod jsonl;
pub mod rom;
pub mod seeds;
pub mod sensitivity;
pub mod thermal;
pub mod train;

pub use error::{Error, Result};
