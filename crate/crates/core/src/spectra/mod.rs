//! Forward synthesis of frequency- and field-domain spectra.

mod esr;
mod lineshape;
mod ple;
mod quadrature;
mod sites;
mod spectrum;

pub use esr::{central_difference, edfs_spectrum, powder_absorption, powder_esr_spectrum, resonance_field_mt};
pub use lineshape::{LineshapeKind, LineshapeSpec, GAUSSIAN_CUTOFF_FWHM, LORENTZIAN_CUTOFF_FWHM};
pub use ple::{ple_lines, ple_spectrum, PleLine};
pub use quadrature::{fibonacci_sphere, DEFAULT_ORIENTATIONS, MIN_ORIENTATIONS};
pub use sites::{angle_sweep_cd_splitting, RotationPlane, SitePair, TwoSiteSystem};
pub use spectrum::{AxisKind, Extremum, ExtremumKind, Grid, Spectrum};

/// Sum of area-normalized, truncated lines `(center, weight)` sampled on `grid`.
/// Lines are accumulated in input order, so the result does not depend on
/// anything but the inputs.
pub(crate) fn render_lines(grid: &Grid, lines: &[(f64, f64)], shape: &LineshapeSpec) -> Vec<f64> {
    let mut out = vec![0.0; grid.n];
    let h = grid.step();
    let reach = shape.cutoff();
    for &(center, weight) in lines {
        if weight == 0.0 {
            continue;
        }
        let lo = ((center - reach - grid.start) / h).floor().max(0.0) as usize;
        let hi_f = ((center + reach - grid.start) / h).ceil();
        if hi_f < 0.0 || lo >= grid.n {
            continue;
        }
        let hi = (hi_f as usize).min(grid.n - 1);
        for (i, slot) in out.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *slot += weight * shape.area_truncated(grid.at(i) - center);
        }
    }
    out
}
