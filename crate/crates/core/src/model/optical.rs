use serde::{Deserialize, Serialize};

use crate::constants::MU_B_OVER_H_GHZ_PER_T;
use crate::error::{ensure, Result};

/// Zeeman splitting g·(μ_B/h)·B in GHz for a field in tesla.
pub fn zeeman_frequency(g_eff: f64, field_t: f64) -> Result<f64> {
    ensure(g_eff.is_finite() && g_eff >= 0.0, || format!("g_eff must be >= 0, got {g_eff}"))?;
    ensure(field_t.is_finite() && field_t >= 0.0, || format!("field must be >= 0 T, got {field_t}"))?;
    Ok(g_eff * MU_B_OVER_H_GHZ_PER_T * field_t)
}

/// Optical transition between a ground and an excited effective spin-1/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Transition {
    /// ↓g → ↓e, spin conserving.
    A,
    /// ↑g → ↑e, spin conserving.
    B,
    /// ↓g → ↑e, spin flip.
    C,
    /// ↑g → ↓e, spin flip.
    D,
}

/// Spin projection within a manifold; `Down` is the lower-energy sub-level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    fn sign(self) -> f64 {
        match self {
            Spin::Down => -0.5,
            Spin::Up => 0.5,
        }
    }
}

impl Transition {
    pub const ALL: [Transition; 4] = [Transition::A, Transition::B, Transition::C, Transition::D];

    pub fn ground(self) -> Spin {
        match self {
            Transition::A | Transition::C => Spin::Down,
            Transition::B | Transition::D => Spin::Up,
        }
    }

    pub fn excited(self) -> Spin {
        match self {
            Transition::A | Transition::D => Spin::Down,
            Transition::B | Transition::C => Spin::Up,
        }
    }

    pub fn is_spin_conserving(self) -> bool {
        self.ground() == self.excited()
    }

    pub fn label(self) -> &'static str {
        match self {
            Transition::A => "A",
            Transition::B => "B",
            Transition::C => "C",
            Transition::D => "D",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Ground and excited effective-spin optical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSystem {
    pub g_ground: f64,
    pub g_excited: f64,
    /// Zero-field optical frequency, THz.
    pub f0_thz: f64,
    /// Inhomogeneous FWHM, MHz.
    pub gamma_inh_mhz: f64,
    /// Homogeneous FWHM, MHz.
    pub gamma_hom_mhz: f64,
    /// Excited-state lifetime, µs.
    pub t_optical_us: f64,
}

impl OpticalSystem {
    pub fn validate(&self) -> Result<()> {
        ensure(self.g_ground >= 0.0 && self.g_excited >= 0.0, || "g-factors must be >= 0".into())?;
        ensure(self.f0_thz.is_finite() && self.f0_thz > 0.0, || "f0 must be > 0".into())?;
        ensure(self.gamma_hom_mhz > 0.0, || "gamma_hom must be > 0".into())?;
        ensure(self.gamma_inh_mhz > 0.0, || "gamma_inh must be > 0".into())?;
        ensure(self.t_optical_us > 0.0, || "optical lifetime must be > 0".into())?;
        ensure(self.gamma_hom_mhz <= self.gamma_inh_mhz, || {
            format!(
                "gamma_hom ({} MHz) exceeds gamma_inh ({} MHz)",
                self.gamma_hom_mhz, self.gamma_inh_mhz
            )
        })
    }

    /// |g_e − g_g|.
    pub fn delta_g(&self) -> f64 {
        (self.g_excited - self.g_ground).abs()
    }

    /// Excited-state decay rate in 1/s.
    pub fn optical_decay_rate(&self) -> f64 {
        1.0 / (self.t_optical_us * 1e-6)
    }

    pub fn transition_frequencies(&self, field_t: f64) -> Result<TransitionFrequencies> {
        self.validate()?;
        let zg = zeeman_frequency(self.g_ground, field_t)?;
        let ze = zeeman_frequency(self.g_excited, field_t)?;
        let mut offsets = [0.0; 4];
        for t in Transition::ALL {
            offsets[t.index()] = t.excited().sign() * ze - t.ground().sign() * zg;
        }
        Ok(TransitionFrequencies { f0_thz: self.f0_thz, offsets_ghz: offsets })
    }
}

/// The four optical lines, held as GHz offsets from the zero-field frequency
/// so that the pair midpoints are exactly `f0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionFrequencies {
    pub f0_thz: f64,
    offsets_ghz: [f64; 4],
}

impl TransitionFrequencies {
    pub fn offset_ghz(&self, t: Transition) -> f64 {
        self.offsets_ghz[t.index()]
    }

    pub fn absolute_thz(&self, t: Transition) -> f64 {
        self.f0_thz + self.offset_ghz(t) * 1e-3
    }

    pub fn iter(&self) -> impl Iterator<Item = (Transition, f64)> + '_ {
        Transition::ALL.into_iter().map(|t| (t, self.offset_ghz(t)))
    }

    /// |A − B| in GHz.
    pub fn conserving_separation_ghz(&self) -> f64 {
        (self.offset_ghz(Transition::A) - self.offset_ghz(Transition::B)).abs()
    }

    /// |C − D| in GHz.
    pub fn flip_separation_ghz(&self) -> f64 {
        (self.offset_ghz(Transition::C) - self.offset_ghz(Transition::D)).abs()
    }
}
