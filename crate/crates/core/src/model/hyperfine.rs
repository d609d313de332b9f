use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// First-order isotropic hyperfine coupling to a single magnetic isotope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperfineModel {
    /// Isotropic coupling constant, MHz.
    pub a_iso_mhz: f64,
    /// Nuclear spin quantum number (integer or half-integer).
    pub nuclear_spin: f64,
    /// Natural abundance of the magnetic isotope, in [0, 1].
    pub abundance: f64,
}

/// One resolved line: offset from the unsplit resonance and its relative weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteLine {
    pub offset_mhz: f64,
    pub weight: f64,
}

impl HyperfineModel {
    /// ¹⁶⁷Er: I = 7/2 at 23 % natural abundance; the coupling is a free input.
    pub fn erbium_167(a_iso_mhz: f64) -> Self {
        Self { a_iso_mhz, nuclear_spin: 3.5, abundance: 0.23 }
    }

    pub fn validate(&self) -> Result<()> {
        let two_i = 2.0 * self.nuclear_spin;
        ensure(self.nuclear_spin >= 0.0 && (two_i - two_i.round()).abs() < 1e-12, || {
            format!("nuclear spin must be a non-negative multiple of 1/2, got {}", self.nuclear_spin)
        })?;
        ensure((0.0..=1.0).contains(&self.abundance), || {
            format!("abundance must lie in [0, 1], got {}", self.abundance)
        })?;
        ensure(self.a_iso_mhz.is_finite(), || "A_iso must be finite".into())
    }

    /// Number of nuclear sub-levels, 2I + 1.
    pub fn multiplicity(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 1
    }

    /// The central (spinless isotope) line plus 2I+1 satellites at A·m_I.
    /// Zero-weight lines are omitted.
    pub fn satellite_offsets(&self) -> Result<Vec<SatelliteLine>> {
        self.validate()?;
        let mult = self.multiplicity();
        let mut lines = Vec::with_capacity(mult + 1);
        if self.abundance > 0.0 {
            let w = self.abundance / mult as f64;
            for k in 0..mult {
                let m_i = -self.nuclear_spin + k as f64;
                lines.push(SatelliteLine { offset_mhz: self.a_iso_mhz * m_i, weight: w });
            }
        }
        if self.abundance < 1.0 {
            lines.push(SatelliteLine { offset_mhz: 0.0, weight: 1.0 - self.abundance });
        }
        lines.sort_by(|a, b| a.offset_mhz.total_cmp(&b.offset_mhz));
        Ok(lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn erbium_satellites() {
        let lines = HyperfineModel::erbium_167(120.0).satellite_offsets().unwrap();
        assert_eq!(lines.len(), 9);
        let central: Vec<_> = lines.iter().filter(|l| l.weight > 0.5).collect();
        assert_eq!(central.len(), 1);
        assert_relative_eq!(central[0].weight, 0.77, epsilon = 1e-15);
        let sats: Vec<_> = lines.iter().filter(|l| l.weight < 0.5).collect();
        assert_eq!(sats.len(), 8);
        for s in &sats {
            assert_relative_eq!(s.weight, 0.02875, epsilon = 1e-15);
        }
        let total: f64 = lines.iter().map(|l| l.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spinless_limit() {
        let hf = HyperfineModel { a_iso_mhz: 80.0, nuclear_spin: 3.5, abundance: 0.0 };
        assert_eq!(hf.satellite_offsets().unwrap(), vec![SatelliteLine { offset_mhz: 0.0, weight: 1.0 }]);
    }

    #[test]
    fn two_line_case() {
        let hf = HyperfineModel { a_iso_mhz: 100.0, nuclear_spin: 0.5, abundance: 1.0 };
        let lines = hf.satellite_offsets().unwrap();
        assert_eq!(
            lines,
            vec![
                SatelliteLine { offset_mhz: -50.0, weight: 0.5 },
                SatelliteLine { offset_mhz: 50.0, weight: 0.5 },
            ]
        );
    }

    #[test]
    fn symmetric_offsets() {
        let hf = HyperfineModel { a_iso_mhz: 37.0, nuclear_spin: 2.5, abundance: 0.4 };
        let lines = hf.satellite_offsets().unwrap();
        let sum: f64 = lines.iter().map(|l| l.offset_mhz * l.weight).sum();
        assert!(sum.abs() < 1e-12);
        assert!((lines.iter().map(|l| l.weight).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_spin() {
        let hf = HyperfineModel { a_iso_mhz: 1.0, nuclear_spin: 0.3, abundance: 0.4 };
        assert!(hf.validate().is_err());
    }
}
