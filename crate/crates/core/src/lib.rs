//! Simulation and parameter fitting for the spin-photon interface of an
//! effective spin-1/2 lanthanide molecule.
//!
//! * [`model`]: g-tensors, optical level structure, thermal populations, hyperfine lines.
//! * [`spectra`]: PLE, powder and single-crystal ESR, two-site angle sweeps.
//! * [`holeburn`]: two-tone hole-burning patterns and their field maps.
//! * [`dynamics`]: four-level rate equations, pulsed-ESR traces, Orbach broadening.
//! * [`fitting`]: Levenberg-Marquardt fits recovering parameters from spectra.

pub mod constants;
pub mod dynamics;
mod error;
pub mod fitting;
pub mod holeburn;
pub mod model;
pub mod spectra;

pub use error::{Error, Result};
