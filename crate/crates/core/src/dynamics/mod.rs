//! Time-domain physics: optical pumping rate equations, pulsed-ESR traces and
//! Orbach linewidth broadening.

mod orbach;
mod pulsed;
mod rates;

pub use orbach::{orbach_linewidth, OrbachParams};
pub use pulsed::{
    hahn_echo_trace, inversion_recovery_trace, larmor_frequency_mhz, rabi_trace, EseemNucleus, PulsedEsrParams,
    DEFAULT_RABI_DECAY_NS, GYROMAGNETIC_19F_MHZ_PER_T, GYROMAGNETIC_1H_MHZ_PER_T,
};
pub use rates::{pl_droop, pl_time_trace, propagator, two_tone_response, ProbeFeature, PumpSettings, RateModel, LEVELS};
