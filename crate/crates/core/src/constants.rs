//! CODATA 2018 physical constants.

/// Bohr magneton in J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Planck constant in J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant in J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// μ_B/h in GHz/T: the Zeeman frequency per unit g per tesla.
pub const MU_B_OVER_H_GHZ_PER_T: f64 = MU_B / PLANCK * 1e-9;

/// h/k_B in K/GHz: converts a frequency splitting to an equivalent temperature.
pub const H_OVER_KB_K_PER_GHZ: f64 = PLANCK / BOLTZMANN * 1e9;

/// Constants bundled as a value, for callers that want to record them with results.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysicalConstants {
    pub mu_b: f64,
    pub h: f64,
    pub k_b: f64,
    pub mu_b_over_h: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        mu_b: MU_B,
        h: PLANCK,
        k_b: BOLTZMANN,
        mu_b_over_h: MU_B_OVER_H_GHZ_PER_T,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_b_over_h_matches_codata() {
        let rel = (MU_B_OVER_H_GHZ_PER_T - 13.996_244_936).abs() / 13.996_244_936;
        assert!(rel < 5e-10, "{MU_B_OVER_H_GHZ_PER_T}");
    }

    #[test]
    fn struct_mirrors_consts() {
        let c = PhysicalConstants::default();
        assert_eq!(c.mu_b_over_h, c.mu_b / c.h * 1e-9);
    }
}
