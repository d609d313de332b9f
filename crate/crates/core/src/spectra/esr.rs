use nalgebra::Vector3;

use crate::constants::MU_B_OVER_H_GHZ_PER_T;
use crate::error::{domain, ensure, Result};
use crate::model::{check_unit, GTensor, HyperfineModel};

use super::lineshape::LineshapeSpec;
use super::quadrature::{fibonacci_sphere, MIN_ORIENTATIONS};
use super::spectrum::{AxisKind, Grid, Spectrum};
use super::render_lines;

/// Resonance field in mT for microwave frequency `mw_ghz` and effective g.
pub fn resonance_field_mt(mw_ghz: f64, g_eff: f64) -> f64 {
    mw_ghz / (g_eff * MU_B_OVER_H_GHZ_PER_T) * 1e3
}

fn check_common(g: &GTensor, mw_ghz: f64, line: &LineshapeSpec, grid: &Grid) -> Result<()> {
    ensure(mw_ghz.is_finite() && mw_ghz > 0.0, || format!("microwave frequency must be > 0, got {mw_ghz}"))?;
    line.validate()?;
    grid.validate()?;
    if g.min_principal() <= 0.0 {
        return Err(domain("a zero principal g-value puts the resonance field at infinity"));
    }
    Ok(())
}

/// Orientation-averaged absorption on a field grid (mT): every quadrature
/// direction contributes one line of shape `line` (FWHM in mT) at its
/// resonance field, with equal weights.
pub fn powder_absorption(
    g: &GTensor,
    mw_ghz: f64,
    line: &LineshapeSpec,
    grid: &Grid,
    orientations: usize,
) -> Result<Spectrum> {
    check_common(g, mw_ghz, line, grid)?;
    ensure(orientations >= MIN_ORIENTATIONS, || {
        format!("powder average needs at least {MIN_ORIENTATIONS} orientations, got {orientations}")
    })?;
    let w = 1.0 / orientations as f64;
    let sticks: Vec<(f64, f64)> = fibonacci_sphere(orientations)
        .iter()
        .map(|n| (resonance_field_mt(mw_ghz, g.effective_g_unchecked(n)), w))
        .collect();
    let s = Spectrum::new(AxisKind::FieldMt, *grid, render_lines(grid, &sticks, line))?;
    Ok(s.with_meta("model", "powder_absorption")
        .with_meta("mw_GHz", mw_ghz)
        .with_meta("orientations", orientations)
        .with_meta("quadrature", "fibonacci_sphere"))
}

/// Field-derivative (cw) powder spectrum, by central differences of
/// [`powder_absorption`].
pub fn powder_esr_spectrum(
    g: &GTensor,
    mw_ghz: f64,
    line: &LineshapeSpec,
    grid: &Grid,
    orientations: usize,
) -> Result<Spectrum> {
    let abs = powder_absorption(g, mw_ghz, line, grid, orientations)?;
    let mut out = Spectrum::new(AxisKind::FieldMt, *grid, central_difference(&abs.intensity, grid.step()))?;
    out.meta = abs.meta;
    out.meta.insert("model".into(), "powder_esr_derivative".into());
    let [gx, gy, gz] = g.principal();
    Ok(out.with_meta("g_principal", format!("{gx},{gy},{gz}")))
}

/// Central differences in the interior, one-sided at the two ends.
pub fn central_difference(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    if n < 2 {
        return d;
    }
    d[0] = (y[1] - y[0]) / h;
    d[n - 1] = (y[n - 1] - y[n - 2]) / h;
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    d
}

/// Echo-detected field sweep of a single crystal orientation: absorption-mode
/// line at the resonance field along `direction` plus first-order hyperfine
/// satellites mapped to field offsets.
pub fn edfs_spectrum(
    g: &GTensor,
    direction: &Vector3<f64>,
    mw_ghz: f64,
    hyperfine: &HyperfineModel,
    line: &LineshapeSpec,
    grid: &Grid,
) -> Result<Spectrum> {
    check_common(g, mw_ghz, line, grid)?;
    check_unit(direction)?;
    let g_eff = g.effective_g_unchecked(direction);
    let center = resonance_field_mt(mw_ghz, g_eff);
    // Field shift (mT) per MHz of hyperfine energy.
    let mt_per_mhz = 1.0 / (g_eff * MU_B_OVER_H_GHZ_PER_T);
    let sticks: Vec<(f64, f64)> = hyperfine
        .satellite_offsets()?
        .iter()
        .map(|l| (center - l.offset_mhz * mt_per_mhz, l.weight))
        .collect();
    let s = Spectrum::new(AxisKind::FieldMt, *grid, render_lines(grid, &sticks, line))?;
    Ok(s.with_meta("model", "edfs")
        .with_meta("mw_GHz", mw_ghz)
        .with_meta("g_eff", g_eff)
        .with_meta("resonance_mT", center)
        .with_meta("A_iso_MHz", hyperfine.a_iso_mhz))
}
