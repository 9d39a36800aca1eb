//! Circularly symmetric watermarking in the DFT magnitude of the blue channel.
//!
//! Payload bits switch ring/sector cells of the mid-frequency band on or
//! off. Embedding adds a constant to the magnitude of every bin of a
//! 1-bit cell (digital path) or projects a sum of cosines as blue
//! illumination (analogue path). Detection is either a correlation against
//! the original or a blind decode of cell energies.

pub mod attack;
pub mod capture;
pub mod codec;
pub mod error;
pub mod io;
pub mod mask;
pub mod model;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use model::*;
