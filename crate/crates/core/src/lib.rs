//! Deterministic simulator for staged universes: a seed pointed graph is
//! structurally unfolded into Kripke models, mirrored into proximity-space
//! models by bisimulation, embedded as codewords of the stage tree metric,
//! and spectrally decomposed into a preferred basis whose weights feed
//! Dempster-Shafer prediction and explanation.

pub mod bisim;
pub mod embedding;
pub mod emit;
pub mod error;
pub mod evidence;
pub mod formula;
pub mod kripke;
pub mod proximity;
pub mod seeds;
pub mod testutil;
pub mod unfolding;
pub mod universe;

pub use error::{Error, Result};
