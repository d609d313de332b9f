//! Shared physical vocabulary: g-tensors, optical level structure, thermal
//! populations and hyperfine satellites.

mod gtensor;
mod hyperfine;
mod optical;
mod thermal;

pub use gtensor::{FieldVector, GTensor, UNIT_TOLERANCE};
pub(crate) use gtensor::check_unit;
pub use hyperfine::{HyperfineModel, SatelliteLine};
pub use optical::{zeeman_frequency, OpticalSystem, Spin, Transition, TransitionFrequencies};
pub use thermal::{boltzmann_populations, spin_temperature_from_ratio, TwoLevelPopulations};

/// Placeholder for the unreported smallest principal g-value (g_x < g_y).
/// Not a measured value.
pub const DEFAULT_GX_PLACEHOLDER: f64 = 1.0;
