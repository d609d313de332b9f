use crate::constants::H_OVER_KB_K_PER_GHZ;
use crate::error::{domain, ensure, Result};

/// Thermal occupation of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelPopulations {
    pub lower: f64,
    pub upper: f64,
}

impl TwoLevelPopulations {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

/// Boltzmann populations of a doublet split by `splitting_ghz` at `temperature_k`.
pub fn boltzmann_populations(splitting_ghz: f64, temperature_k: f64) -> Result<TwoLevelPopulations> {
    if !(temperature_k > 0.0) {
        return Err(domain(format!("temperature must be > 0 K, got {temperature_k}")));
    }
    ensure(splitting_ghz.is_finite() && splitting_ghz >= 0.0, || {
        format!("splitting must be >= 0 GHz, got {splitting_ghz}")
    })?;
    let r = (-H_OVER_KB_K_PER_GHZ * splitting_ghz / temperature_k).exp();
    Ok(TwoLevelPopulations { lower: 1.0 / (1.0 + r), upper: r / (1.0 + r) })
}

/// Inverse of [`boltzmann_populations`]: T = h·Δ / (k_B ln(1/ratio)).
///
/// A ratio of exactly 1 yields `f64::INFINITY` (unbounded temperature).
pub fn spin_temperature_from_ratio(ratio: f64, splitting_ghz: f64) -> Result<f64> {
    ensure(splitting_ghz.is_finite() && splitting_ghz > 0.0, || {
        format!("splitting must be > 0 GHz, got {splitting_ghz}")
    })?;
    if !(ratio > 0.0) {
        return Err(domain(format!("population ratio must be > 0, got {ratio}")));
    }
    if ratio > 1.0 {
        return Err(domain(format!(
            "population ratio {ratio} > 1 is an inversion, not a thermal state"
        )));
    }
    if ratio == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(H_OVER_KB_K_PER_GHZ * splitting_ghz / -ratio.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn degenerate_levels() {
        let p = boltzmann_populations(0.0, 1.0).unwrap();
        assert_eq!((p.lower, p.upper), (0.5, 0.5));
    }

    #[test]
    fn six_hundred_millikelvin() {
        let p = boltzmann_populations(30.232, 0.6).unwrap();
        assert_relative_eq!(H_OVER_KB_K_PER_GHZ * 30.232, 1.4510, epsilon = 1e-4);
        assert_relative_eq!(p.ratio(), (-2.4183f64).exp(), max_relative = 2e-4);
        assert!((p.ratio() - 0.0890).abs() < 1e-4);
        assert_relative_eq!(p.lower + p.upper, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn high_temperature_limit() {
        let p = boltzmann_populations(30.232, 1e6).unwrap();
        assert!((p.lower - 0.5).abs() < 1e-6 && (p.upper - 0.5).abs() < 1e-6);
    }

    #[test]
    fn non_positive_temperature() {
        assert!(matches!(boltzmann_populations(1.0, 0.0), Err(crate::Error::Domain(_))));
        assert!(matches!(boltzmann_populations(1.0, -2.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn temperature_examples() {
        assert!((spin_temperature_from_ratio(0.0890, 30.232).unwrap() - 0.600).abs() < 1e-3);
        assert_eq!(spin_temperature_from_ratio(1.0, 5.0).unwrap(), f64::INFINITY);
        let s = 7.0;
        assert_relative_eq!(
            spin_temperature_from_ratio((-1.0f64).exp(), s).unwrap(),
            H_OVER_KB_K_PER_GHZ * s,
            max_relative = 1e-15
        );
        assert!(matches!(spin_temperature_from_ratio(1.2, 5.0), Err(crate::Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn ratio_round_trip(ratio in 1e-6f64..0.999_999, s in 0.01f64..100.0) {
            let t = spin_temperature_from_ratio(ratio, s).unwrap();
            let back = boltzmann_populations(s, t).unwrap().ratio();
            prop_assert!(((back - ratio) / ratio).abs() < 1e-10);
        }
    }
}
