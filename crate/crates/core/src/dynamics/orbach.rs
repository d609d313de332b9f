use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure, Result};

/// Linewidth broadening through an excited crystal-field level at `delta_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbachParams {
    /// Residual width as T → 0, MHz.
    pub gamma0_mhz: f64,
    /// MHz.
    pub prefactor_mhz: f64,
    /// Energy gap in kelvin.
    pub delta_k: f64,
}

/// γ(T) = γ₀ + C·exp(−Δ/T).
pub fn orbach_linewidth(p: &OrbachParams, temperature_k: f64) -> Result<f64> {
    ensure(p.gamma0_mhz >= 0.0 && p.prefactor_mhz >= 0.0 && p.delta_k >= 0.0, || {
        "Orbach parameters must be >= 0".into()
    })?;
    if !(temperature_k > 0.0) {
        return Err(domain(format!("temperature must be > 0 K, got {temperature_k}")));
    }
    Ok(p.gamma0_mhz + p.prefactor_mhz * (-p.delta_k / temperature_k).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: OrbachParams = OrbachParams { gamma0_mhz: 3.0, prefactor_mhz: 5e4, delta_k: 40.0 };

    #[test]
    fn low_temperature_limit() {
        assert_eq!(orbach_linewidth(&P, 1e-3).unwrap(), 3.0);
    }

    #[test]
    fn at_gap_temperature() {
        let w = orbach_linewidth(&P, 40.0).unwrap();
        assert!((w - (3.0 + 5e4 / std::f64::consts::E)).abs() < 1e-9);
    }

    #[test]
    fn arrhenius_slope() {
        // Least-squares line of ln(γ − γ₀) against 1/T.
        let pts: Vec<(f64, f64)> = (0..20)
            .map(|i| {
                let t = 4.0 + i as f64;
                (1.0 / t, (orbach_linewidth(&P, t).unwrap() - P.gamma0_mhz).ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        assert!((sxy / sxx + 40.0).abs() < 1e-9);
    }

    #[test]
    fn monotone_and_domain() {
        let mut last = 0.0;
        for i in 1..100 {
            let w = orbach_linewidth(&P, i as f64 * 0.5).unwrap();
            assert!(w >= last);
            last = w;
        }
        assert!(matches!(orbach_linewidth(&P, 0.0), Err(crate::Error::Domain(_))));
    }
}
