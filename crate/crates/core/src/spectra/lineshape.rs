use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineshapeKind {
    Gaussian,
    Lorentzian,
    /// Linear mix `mix·Lorentzian + (1 − mix)·Gaussian` sharing one FWHM.
    PseudoVoigt,
}

/// A symmetric line profile with full width at half maximum `fwhm`, in the
/// unit of whatever axis it is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineshapeSpec {
    pub kind: LineshapeKind,
    pub fwhm: f64,
    /// Lorentzian fraction; only read for `PseudoVoigt`.
    #[serde(default)]
    pub mix: f64,
}

/// Kernel support in units of FWHM for profiles with Lorentzian tails.
/// Beyond 20 FWHM a Lorentzian has dropped below 6.3e-4 of its peak.
pub const LORENTZIAN_CUTOFF_FWHM: f64 = 20.0;
/// Kernel support in units of FWHM for pure Gaussians.
pub const GAUSSIAN_CUTOFF_FWHM: f64 = 10.0;

const FOUR_LN2: f64 = 4.0 * LN_2;

impl LineshapeSpec {
    pub fn lorentzian(fwhm: f64) -> Self {
        Self { kind: LineshapeKind::Lorentzian, fwhm, mix: 1.0 }
    }

    pub fn gaussian(fwhm: f64) -> Self {
        Self { kind: LineshapeKind::Gaussian, fwhm, mix: 0.0 }
    }

    pub fn pseudo_voigt(fwhm: f64, mix: f64) -> Self {
        Self { kind: LineshapeKind::PseudoVoigt, fwhm, mix }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.fwhm.is_finite() && self.fwhm > 0.0, || format!("FWHM must be > 0, got {}", self.fwhm))?;
        if self.kind == LineshapeKind::PseudoVoigt {
            ensure((0.0..=1.0).contains(&self.mix), || {
                format!("pseudo-Voigt mix must lie in [0, 1], got {}", self.mix)
            })?;
        }
        Ok(())
    }

    pub fn with_fwhm(self, fwhm: f64) -> Self {
        Self { fwhm, ..self }
    }

    /// Lorentzian weight of the profile.
    pub fn lorentz_fraction(&self) -> f64 {
        match self.kind {
            LineshapeKind::Gaussian => 0.0,
            LineshapeKind::Lorentzian => 1.0,
            LineshapeKind::PseudoVoigt => self.mix,
        }
    }

    /// Half-width of the truncated evaluation kernel.
    pub fn cutoff(&self) -> f64 {
        let factor = if self.lorentz_fraction() > 0.0 { LORENTZIAN_CUTOFF_FWHM } else { GAUSSIAN_CUTOFF_FWHM };
        factor * self.fwhm
    }

    /// Profile with unit area on the infinite axis.
    pub fn area(&self, x: f64) -> f64 {
        let eta = self.lorentz_fraction();
        let g = self.fwhm;
        let mut v = 0.0;
        if eta > 0.0 {
            v += eta * 2.0 / (PI * g) * lorentz_height(x, g);
        }
        if eta < 1.0 {
            v += (1.0 - eta) * (FOUR_LN2 / PI).sqrt() / g * gauss_height(x, g);
        }
        v
    }

    /// Area profile truncated at `cutoff()` and shifted down by its value
    /// there, so the kernel reaches zero continuously.
    pub fn area_truncated(&self, x: f64) -> f64 {
        let c = self.cutoff();
        if x.abs() >= c {
            0.0
        } else {
            (self.area(x) - self.area(c)).max(0.0)
        }
    }

    /// Profile with unit peak height.
    pub fn height(&self, x: f64) -> f64 {
        let eta = self.lorentz_fraction();
        eta * lorentz_height(x, self.fwhm) + (1.0 - eta) * gauss_height(x, self.fwhm)
    }

    /// Height profile with its partial derivatives with respect to the
    /// displacement `x` and to the FWHM: `(h, dh/dx, dh/dfwhm)`.
    pub fn height_with_partials(&self, x: f64) -> (f64, f64, f64) {
        let eta = self.lorentz_fraction();
        let g = self.fwhm;
        let (mut h, mut dx, mut dg) = (0.0, 0.0, 0.0);
        if eta > 0.0 {
            let u = 2.0 * x / g;
            let den = 1.0 + u * u;
            let l = 1.0 / den;
            h += eta * l;
            dx += eta * (-4.0 * u / (g * den * den));
            dg += eta * (2.0 * u * u / (g * den * den));
        }
        if eta < 1.0 {
            let e = gauss_height(x, g);
            h += (1.0 - eta) * e;
            dx += (1.0 - eta) * e * (-2.0 * FOUR_LN2 * x / (g * g));
            dg += (1.0 - eta) * e * (2.0 * FOUR_LN2 * x * x / (g * g * g));
        }
        (h, dx, dg)
    }
}

fn lorentz_height(x: f64, fwhm: f64) -> f64 {
    let u = 2.0 * x / fwhm;
    1.0 / (1.0 + u * u)
}

fn gauss_height(x: f64, fwhm: f64) -> f64 {
    (-FOUR_LN2 * x * x / (fwhm * fwhm)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn unit_area() {
        for spec in [LineshapeSpec::gaussian(2.0), LineshapeSpec::pseudo_voigt(2.0, 0.3)] {
            let a = simpson(|x| spec.area(x), -400.0, 400.0, 400_000);
            let tail = spec.lorentz_fraction() * (1.0 - 2.0 / PI * 400f64.atan());
            assert!((a + tail - 1.0).abs() < 1e-6, "{spec:?}: {a}");
        }
        let l = LineshapeSpec::lorentzian(2.0);
        let a = simpson(|x| l.area(x), -1e3, 1e3, 2_000_000);
        let analytic = 2.0 / PI * (1e3f64).atan();
        assert!((a - analytic).abs() < 1e-8);
    }

    #[test]
    fn half_maximum_at_half_fwhm() {
        for spec in [LineshapeSpec::gaussian(3.0), LineshapeSpec::lorentzian(3.0), LineshapeSpec::pseudo_voigt(3.0, 0.5)] {
            assert!((spec.height(1.5) - 0.5).abs() < 1e-14);
            assert!((spec.height(0.0) - 1.0).abs() < 1e-14);
            assert!((spec.area(1.5) / spec.area(0.0) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn truncated_tail_below_bound() {
        let l = LineshapeSpec::lorentzian(1.0);
        let edge = l.height(l.cutoff());
        assert!(edge < 1e-3, "{edge}");
        assert_eq!(l.area_truncated(l.cutoff() * 1.01), 0.0);
    }

    #[test]
    fn partials_match_finite_differences() {
        for spec in [LineshapeSpec::gaussian(1.7), LineshapeSpec::lorentzian(1.7), LineshapeSpec::pseudo_voigt(1.7, 0.4)] {
            for x in [-3.0, -0.4, 0.0, 0.9, 2.5] {
                let (_, dx, dg) = spec.height_with_partials(x);
                let h = 1e-6;
                let fdx = (spec.height(x + h) - spec.height(x - h)) / (2.0 * h);
                let s1 = spec.with_fwhm(spec.fwhm + h);
                let s0 = spec.with_fwhm(spec.fwhm - h);
                let fdg = (s1.height(x) - s0.height(x)) / (2.0 * h);
                assert!((dx - fdx).abs() < 1e-8, "{spec:?} x={x}");
                assert!((dg - fdg).abs() < 1e-8, "{spec:?} x={x}");
            }
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(LineshapeSpec::lorentzian(0.0).validate().is_err());
        assert!(LineshapeSpec::pseudo_voigt(1.0, 1.5).validate().is_err());
    }
}
