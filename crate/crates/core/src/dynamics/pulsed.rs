use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::spectra::{AxisKind, Grid, Spectrum};

/// ¹H gyromagnetic ratio γ/2π, MHz/T.
pub const GYROMAGNETIC_1H_MHZ_PER_T: f64 = 42.577_478;
/// ¹⁹F gyromagnetic ratio γ/2π, MHz/T.
pub const GYROMAGNETIC_19F_MHZ_PER_T: f64 = 40.052;

pub fn larmor_frequency_mhz(gyromagnetic_mhz_per_t: f64, field_t: f64) -> f64 {
    gyromagnetic_mhz_per_t * field_t
}

/// A weakly coupled nucleus modulating the echo at its Larmor frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EseemNucleus {
    /// Modulation depth k in [0, 1].
    pub depth: f64,
    pub larmor_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulsedEsrParams {
    /// Phase-memory time, ns.
    pub t_m_ns: f64,
    /// Spin-lattice relaxation time, ns.
    pub t_1_ns: f64,
    /// Rabi frequency at the reference power, MHz.
    pub rabi_max_mhz: f64,
    /// Damping time of Rabi oscillations, ns. Observed range is 80-100 ns.
    pub rabi_decay_ns: f64,
    #[serde(default)]
    pub nuclei: Vec<EseemNucleus>,
}

/// Default Rabi damping time, the middle of the observed 80-100 ns range.
pub const DEFAULT_RABI_DECAY_NS: f64 = 90.0;

impl PulsedEsrParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.t_m_ns > 0.0 && self.t_1_ns > 0.0, || "T_m and T_1 must be > 0".into())?;
        ensure(self.rabi_decay_ns > 0.0, || "Rabi decay time must be > 0".into())?;
        ensure(self.rabi_max_mhz >= 0.0, || "Rabi frequency must be >= 0".into())?;
        for n in &self.nuclei {
            ensure((0.0..=1.0).contains(&n.depth), || format!("ESEEM depth {} outside [0, 1]", n.depth))?;
            ensure(n.larmor_mhz >= 0.0, || "Larmor frequency must be >= 0".into())?;
        }
        Ok(())
    }

    pub fn rabi_frequency_mhz(&self, power_ratio: f64) -> f64 {
        self.rabi_max_mhz * power_ratio.sqrt()
    }

    /// Two-pulse echo modulation for free evolution τ (ns) with both ESEEM
    /// branch frequencies at the Larmor frequency:
    /// Π [1 − (k/4)(3 − 4 cos ωτ + cos 2ωτ)].
    pub fn eseem_factor(&self, tau_ns: f64) -> f64 {
        self.nuclei
            .iter()
            .map(|n| {
                let x = TAU * n.larmor_mhz * 1e-3 * tau_ns;
                1.0 - 0.25 * n.depth * (3.0 - 4.0 * x.cos() + (2.0 * x).cos())
            })
            .product()
    }
}

/// Echo signal vs pulse length θ (ns): cos(2πΩθ)·exp(−θ/τ_R), Ω = Ω₀·√(P/P₀).
pub fn rabi_trace(params: &PulsedEsrParams, power_ratio: f64, pulse_ns: &Grid) -> Result<Spectrum> {
    params.validate()?;
    pulse_ns.validate()?;
    ensure(power_ratio >= 0.0, || format!("power ratio must be >= 0, got {power_ratio}"))?;
    let f = params.rabi_frequency_mhz(power_ratio) * 1e-3;
    let y = pulse_ns
        .points()
        .map(|t| (TAU * f * t).cos() * (-t / params.rabi_decay_ns).exp())
        .collect();
    Ok(Spectrum::new(AxisKind::TimeNs, *pulse_ns, y)?
        .with_meta("model", "rabi")
        .with_meta("axis", "pulse length")
        .with_meta("power_ratio", power_ratio)
        .with_meta("rabi_MHz", f * 1e3))
}

/// Hahn-echo amplitude vs total free evolution 2τ (ns):
/// exp(−2τ/T_m) times the ESEEM product.
pub fn hahn_echo_trace(params: &PulsedEsrParams, two_tau_ns: &Grid) -> Result<Spectrum> {
    params.validate()?;
    two_tau_ns.validate()?;
    ensure(two_tau_ns.start > 0.0, || "2τ grid must be positive".into())?;
    let y = two_tau_ns
        .points()
        .map(|t2| (-t2 / params.t_m_ns).exp() * params.eseem_factor(0.5 * t2))
        .collect();
    Ok(Spectrum::new(AxisKind::TimeNs, *two_tau_ns, y)?
        .with_meta("model", "hahn_echo")
        .with_meta("axis", "2tau")
        .with_meta("T_m_ns", params.t_m_ns))
}

/// Inversion recovery M(T_D) = M_∞(1 − 2 exp(−T_D/T_1)) on a delay grid (ns).
pub fn inversion_recovery_trace(params: &PulsedEsrParams, m_inf: f64, delay_ns: &Grid) -> Result<Spectrum> {
    params.validate()?;
    delay_ns.validate()?;
    ensure(delay_ns.start >= 0.0, || "delay grid must be non-negative".into())?;
    let y = delay_ns.points().map(|t| m_inf * (1.0 - 2.0 * (-t / params.t_1_ns).exp())).collect();
    Ok(Spectrum::new(AxisKind::TimeNs, *delay_ns, y)?
        .with_meta("model", "inversion_recovery")
        .with_meta("axis", "T_D")
        .with_meta("T_1_ns", params.t_1_ns))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PulsedEsrParams {
        PulsedEsrParams {
            t_m_ns: 100.0,
            t_1_ns: 198.0,
            rabi_max_mhz: 10.0,
            rabi_decay_ns: DEFAULT_RABI_DECAY_NS,
            nuclei: vec![],
        }
    }

    #[test]
    fn sqrt_power_law() {
        let p = params();
        assert_eq!(p.rabi_frequency_mhz(1.0), 10.0);
        assert_eq!(p.rabi_frequency_mhz(0.25), 5.0);
    }

    #[test]
    fn rabi_starts_at_one_and_decays() {
        let grid = Grid::new(0.0, 400.0, 401).unwrap();
        let s = rabi_trace(&params(), 1.0, &grid).unwrap();
        assert_eq!(s.intensity[0], 1.0);
        // Full periods every 100 ns at 10 MHz.
        assert!((s.intensity[100] - (-100.0f64 / 90.0).exp()).abs() < 1e-12);
        assert!(rabi_trace(&params(), -1.0, &grid).is_err());
    }

    #[test]
    fn echo_without_eseem_is_exponential() {
        let grid = Grid::new(10.0, 100.0, 10).unwrap();
        let s = hahn_echo_trace(&params(), &grid).unwrap();
        assert!((s.intensity[9] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn larmor_defaults_at_270_mt() {
        assert!((larmor_frequency_mhz(GYROMAGNETIC_1H_MHZ_PER_T, 0.270) - 11.50).abs() < 0.005);
        assert!((larmor_frequency_mhz(GYROMAGNETIC_19F_MHZ_PER_T, 0.270) - 10.81).abs() < 0.005);
    }

    #[test]
    fn eseem_modulation_is_non_positive() {
        let mut p = params();
        p.nuclei = vec![EseemNucleus { depth: 0.3, larmor_mhz: 11.5 }];
        for i in 0..1000 {
            let f = p.eseem_factor(i as f64 * 0.37);
            assert!(f <= 1.0 + 1e-15 && f >= 1.0 - 2.0 * 0.3 - 1e-15);
        }
        // Equals 1 − (k/2)(1 − cos ωτ)².
        let tau = 13.0;
        let x = TAU * 11.5e-3 * tau;
        assert!((p.eseem_factor(tau) - (1.0 - 0.15 * (1.0 - x.cos()).powi(2))).abs() < 1e-14);
    }

    #[test]
    fn inversion_recovery_limits() {
        let grid = Grid::new(0.0, 5000.0, 5001).unwrap();
        let s = inversion_recovery_trace(&params(), 2.0, &grid).unwrap();
        assert_eq!(s.intensity[0], -2.0);
        assert!((s.intensity[5000] - 2.0).abs() < 1e-10);
        let zero = 198.0 * std::f64::consts::LN_2;
        assert!((zero - 137.24).abs() < 0.01);
        let g = Grid::new(zero, zero + 1.0, 2).unwrap();
        assert!(inversion_recovery_trace(&params(), 1.0, &g).unwrap().intensity[0].abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_depth() {
        let mut p = params();
        p.nuclei = vec![EseemNucleus { depth: 1.2, larmor_mhz: 11.5 }];
        assert!(p.validate().is_err());
    }
}
