//! Two-tone spectral hole burning: closed-form hole/anti-hole patterns, their
//! rendering as differential-PL traces and magnetic-field maps.
//!
//! With the pump resonant with the spin-conserving transitions A and B, side
//! features appear at pump-probe detunings of ±|Δg|·kB, ±g_g·kB and ±g_e·kB
//! (k = μ_B/h). When ground-state spins relax quickly every feature is a hole;
//! under optical pumping the |Δg| and g_g features become anti-holes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::MU_B_OVER_H_GHZ_PER_T;
use crate::error::{ensure, invalid, Result};
use crate::model::{zeeman_frequency, FieldVector, OpticalSystem};
use crate::spectra::{AxisKind, ExtremumKind, Grid, LineshapeSpec, Spectrum, TwoSiteSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSign {
    Hole,
    Antihole,
}

impl FeatureSign {
    pub fn value(self) -> f64 {
        match self {
            FeatureSign::Hole => -1.0,
            FeatureSign::Antihole => 1.0,
        }
    }

    fn flip_if(self, cond: bool) -> Self {
        match (self, cond) {
            (s, false) => s,
            (FeatureSign::Hole, true) => FeatureSign::Antihole,
            (FeatureSign::Antihole, true) => FeatureSign::Hole,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationRegime {
    /// Ground-state spin relaxation outpaces optical pumping: holes only.
    FastSpinRelaxation,
    /// Slow spin relaxation relative to spin-flipping optical decay.
    OpticalPumping,
}

/// Which Zeeman splitting produced a side feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrigin {
    Central,
    DeltaG,
    Ground,
    Excited,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleFeature {
    pub detuning_mhz: f64,
    pub sign: FeatureSign,
    pub width_mhz: f64,
    pub amplitude: f64,
    pub origin: FeatureOrigin,
}

/// Broad Lorentzian removed from the rendered trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub fwhm_mhz: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolePattern {
    pub features: Vec<HoleFeature>,
    pub background: Option<Background>,
}

/// Presentation settings for [`hole_pattern_with`]. The depths are not
/// physical predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PatternOptions {
    pub central_amplitude: f64,
    pub side_amplitude: f64,
    /// Overrides the homogeneous linewidth as feature width.
    pub width_mhz: Option<f64>,
    pub background: Option<Background>,
    pub harmonics: Option<HarmonicArtifacts>,
}

impl Default for PatternOptions {
    fn default() -> Self {
        Self { central_amplitude: 1.0, side_amplitude: 0.5, width_mhz: None, background: None, harmonics: None }
    }
}

/// Spurious holes at half-integer multiples of a drive detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicArtifacts {
    pub drive_detuning_mhz: f64,
    /// Number of half-integer orders (1/2, 3/2, ...) on each side.
    pub orders: usize,
    pub amplitude: f64,
}

pub fn hole_pattern(sys: &OpticalSystem, field_t: f64, regime: RelaxationRegime) -> Result<HolePattern> {
    hole_pattern_with(sys, field_t, regime, &PatternOptions::default())
}

pub fn hole_pattern_with(
    sys: &OpticalSystem,
    field_t: f64,
    regime: RelaxationRegime,
    opts: &PatternOptions,
) -> Result<HolePattern> {
    sys.validate()?;
    let width = opts.width_mhz.unwrap_or(sys.gamma_hom_mhz);
    ensure(width > 0.0, || "feature width must be > 0".into())?;
    let pumping = regime == RelaxationRegime::OpticalPumping;
    let mut features = vec![HoleFeature {
        detuning_mhz: 0.0,
        sign: FeatureSign::Hole,
        width_mhz: width,
        amplitude: opts.central_amplitude,
        origin: FeatureOrigin::Central,
    }];
    let sides = [
        (FeatureOrigin::DeltaG, sys.delta_g(), true),
        (FeatureOrigin::Ground, sys.g_ground, true),
        (FeatureOrigin::Excited, sys.g_excited, false),
    ];
    for (origin, g, flips) in sides {
        let d = zeeman_frequency(g, field_t)? * 1e3;
        if d == 0.0 {
            continue;
        }
        let sign = FeatureSign::Hole.flip_if(pumping && flips);
        for s in [-1.0, 1.0] {
            features.push(HoleFeature {
                detuning_mhz: s * d,
                sign,
                width_mhz: width,
                amplitude: opts.side_amplitude,
                origin,
            });
        }
    }
    if let Some(h) = opts.harmonics {
        for k in 0..h.orders {
            let d = (k as f64 + 0.5) * h.drive_detuning_mhz;
            for s in [-1.0, 1.0] {
                features.push(HoleFeature {
                    detuning_mhz: s * d,
                    sign: FeatureSign::Hole,
                    width_mhz: width,
                    amplitude: h.amplitude,
                    origin: FeatureOrigin::Harmonic,
                });
            }
        }
    }
    features.sort_by(|a, b| a.detuning_mhz.total_cmp(&b.detuning_mhz));
    Ok(HolePattern { features, background: opts.background })
}

/// Differential PL versus pump-probe detuning (MHz): a signed Lorentzian of
/// unit height times `amplitude` per feature, minus the optional background.
///
/// The grid step must resolve the narrowest feature (step ≤ FWHM/4).
pub fn render_hole_spectrum(pattern: &HolePattern, grid: &Grid) -> Result<Spectrum> {
    grid.validate()?;
    let step = grid.step();
    if let Some(w) = pattern.features.iter().map(|f| f.width_mhz).min_by(f64::total_cmp) {
        ensure(w > 0.0, || "feature widths must be > 0".into())?;
        if step > w / 4.0 {
            return Err(invalid(format!(
                "grid step {step} MHz under-resolves the {w} MHz feature width (needs <= {})",
                w / 4.0
            )));
        }
    }
    let mut y = vec![0.0; grid.n];
    for f in &pattern.features {
        let shape = LineshapeSpec::lorentzian(f.width_mhz);
        let a = f.sign.value() * f.amplitude;
        for (slot, x) in y.iter_mut().zip(grid.points()) {
            *slot += a * shape.height(x - f.detuning_mhz);
        }
    }
    if let Some(bg) = pattern.background {
        ensure(bg.fwhm_mhz > 0.0, || "background FWHM must be > 0".into())?;
        let shape = LineshapeSpec::lorentzian(bg.fwhm_mhz);
        for (slot, x) in y.iter_mut().zip(grid.points()) {
            *slot -= bg.amplitude * shape.height(x);
        }
    }
    Ok(Spectrum::new(AxisKind::DetuningMhz, *grid, y)?
        .with_meta("model", "hole_burning")
        .with_meta("features", pattern.features.len()))
}

/// Differential PL over a (field × detuning) lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    pub fields_mt: Vec<f64>,
    pub detuning: Grid,
    /// One row per field, `detuning.n` samples each.
    pub rows: Vec<Vec<f64>>,
}

pub fn hole_field_map(
    sys: &OpticalSystem,
    fields_mt: &[f64],
    regime: RelaxationRegime,
    detuning: &Grid,
) -> Result<FieldMap> {
    hole_field_map_with(sys, fields_mt, regime, detuning, &PatternOptions::default())
}

pub fn hole_field_map_with(
    sys: &OpticalSystem,
    fields_mt: &[f64],
    regime: RelaxationRegime,
    detuning: &Grid,
    opts: &PatternOptions,
) -> Result<FieldMap> {
    ensure(!fields_mt.is_empty(), || "field list is empty".into())?;
    ensure(fields_mt.iter().all(|b| b.is_finite() && *b >= 0.0), || "fields must be >= 0".into())?;
    ensure(fields_mt.windows(2).all(|w| w[1] > w[0]), || "fields must be increasing".into())?;
    let rows = fields_mt
        .iter()
        .map(|b| {
            let p = hole_pattern_with(sys, b * 1e-3, regime, opts)?;
            Ok(render_hole_spectrum(&p, detuning)?.intensity)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldMap { fields_mt: fields_mt.to_vec(), detuning: *detuning, rows })
}

/// A straight ridge through the origin of a field map.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    /// MHz per mT.
    pub slope: f64,
    pub sign: FeatureSign,
    /// Tracked (field mT, detuning MHz) points.
    pub points: Vec<(f64, f64)>,
}

impl FieldMap {
    pub fn row_spectrum(&self, i: usize) -> Result<Spectrum> {
        Spectrum::new(AxisKind::DetuningMhz, self.detuning, self.rows[i].clone())
    }

    /// Long-format CSV: `field_mT,detuning_MHz,dPL`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# model: hole_field_map\nfield_mT,detuning_MHz,dPL\n");
        for (b, row) in self.fields_mt.iter().zip(&self.rows) {
            for (x, y) in self.detuning.points().zip(row) {
                let _ = writeln!(out, "{b},{x},{y}");
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Format(e.to_string()))
    }

    /// Tracks side features at positive detuning row by row; the central hole
    /// is not a ridge. Minima below
    /// `-threshold` (holes) and maxima above `threshold` (anti-holes) are
    /// candidates; only rows resolving the
    /// maximal number of candidates are used, and the k-th candidate of each
    /// row is assigned to ridge k. Slopes come from a least-squares line
    /// through the origin.
    pub fn track_ridges(&self, threshold: f64) -> Result<Vec<Ridge>> {
        let mut per_row = Vec::new();
        for (i, &b) in self.fields_mt.iter().enumerate() {
            if b <= 0.0 {
                continue;
            }
            let s = self.row_spectrum(i)?;
            let found: Vec<(f64, FeatureSign)> = s
                .local_extrema()
                .into_iter()
                .filter(|e| {
                    e.position > self.detuning.step()
                        && match e.kind {
                            ExtremumKind::Minimum => e.value < -threshold,
                            ExtremumKind::Maximum => e.value > threshold,
                        }
                })
                .map(|e| {
                    let sign = match e.kind {
                        ExtremumKind::Minimum => FeatureSign::Hole,
                        ExtremumKind::Maximum => FeatureSign::Antihole,
                    };
                    (e.position, sign)
                })
                .collect();
            per_row.push((b, found));
        }
        let count = per_row.iter().map(|(_, f)| f.len()).max().unwrap_or(0);
        let mut ridges: Vec<Ridge> = Vec::with_capacity(count);
        for k in 0..count {
            let mut points = Vec::new();
            let mut sign = FeatureSign::Hole;
            for (b, found) in per_row.iter().filter(|(_, f)| f.len() == count) {
                points.push((*b, found[k].0));
                sign = found[k].1;
            }
            let sxy: f64 = points.iter().map(|(b, d)| b * d).sum();
            let sxx: f64 = points.iter().map(|(b, _)| b * b).sum();
            ridges.push(Ridge { slope: sxy / sxx, sign, points });
        }
        Ok(ridges)
    }
}

/// Manifold whose spin splitting sets a side-hole detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    Ground,
    Excited,
}

/// The g_g·kB (or g_e·kB) side-hole detuning in MHz for each of two
/// inequivalent sites, using each site's effective g along the field.
pub fn two_site_hole_splitting(sites: &TwoSiteSystem, field: &FieldVector, which: Manifold) -> Result<(f64, f64)> {
    let pair = match which {
        Manifold::Ground => sites.ground_pair(),
        Manifold::Excited => sites.excited_pair(),
    };
    let (ga, gb) = pair.effective_g(field.direction())?;
    let k = MU_B_OVER_H_GHZ_PER_T * field.tesla() * 1e3;
    Ok((ga * k, gb * k))
}
