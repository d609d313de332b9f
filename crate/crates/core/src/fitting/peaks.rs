//! Multi-peak fits on a linear baseline, with a peak-picking initializer.

use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmConfig};
use super::models::{CurveFit, CurveModel, PeakSum};
use super::FitResult;
use crate::error::{ensure, Result};
use crate::spectra::{LineshapeKind, LineshapeSpec, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: f64,
    pub fwhm: f64,
    /// Signed height above the baseline; negative for holes.
    pub amplitude: f64,
}

/// `offset + slope·(x − origin)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Baseline {
    pub offset: f64,
    pub slope: f64,
    pub origin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakModel {
    pub shape: LineshapeKind,
    /// Lorentzian fraction for pseudo-Voigt peaks.
    #[serde(default)]
    pub mix: f64,
    pub peaks: Vec<Peak>,
    #[serde(default)]
    pub baseline: Baseline,
}

/// Which extrema the initializer looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Peaks,
    Dips,
    Either,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub model: PeakModel,
    pub result: FitResult,
}

impl PeakModel {
    pub fn lineshape(&self) -> LineshapeSpec {
        let mix = match self.shape {
            LineshapeKind::Lorentzian => 1.0,
            LineshapeKind::Gaussian => 0.0,
            LineshapeKind::PseudoVoigt => self.mix,
        };
        LineshapeSpec { kind: self.shape, fwhm: 1.0, mix }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.peaks.is_empty(), || "a peak model needs at least one peak".to_string())?;
        self.lineshape().validate()?;
        for (k, p) in self.peaks.iter().enumerate() {
            ensure(p.fwhm.is_finite() && p.fwhm > 0.0, || format!("peak {k}: fwhm must be > 0, got {}", p.fwhm))?;
            ensure(p.center.is_finite() && p.amplitude.is_finite(), || format!("peak {k}: non-finite parameter"))?;
        }
        ensure(self.baseline.offset.is_finite() && self.baseline.slope.is_finite(), || {
            "baseline must be finite".to_string()
        })
    }

    fn curve(&self) -> PeakSum {
        PeakSum { shape: self.lineshape(), n_peaks: self.peaks.len(), x_ref: self.baseline.origin }
    }

    fn to_params(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.peaks.iter().flat_map(|k| [k.center, k.fwhm, k.amplitude]).collect();
        p.push(self.baseline.offset);
        p.push(self.baseline.slope);
        p
    }

    fn with_params(&self, p: &[f64]) -> Self {
        let n = self.peaks.len();
        Self {
            shape: self.shape,
            mix: self.mix,
            peaks: (0..n)
                .map(|k| Peak { center: p[3 * k], fwhm: p[3 * k + 1].abs(), amplitude: p[3 * k + 2] })
                .collect(),
            baseline: Baseline { offset: p[3 * n], slope: p[3 * n + 1], origin: self.baseline.origin },
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.curve().value(x, &self.to_params())
    }

    pub fn centers(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.center).collect()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares straight line `(intercept at origin, slope)`.
fn line_fit(x: &[f64], y: &[f64], origin: f64) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().map(|v| v - origin).sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - origin - mx;
        sxy += dx * (yi - my);
        sxx += dx * dx;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Half-maximum width around sample `i` of `d` (baseline already removed),
/// linearly interpolated; `None` when a side never drops to half height.
fn half_max_width(x: &[f64], d: &[f64], i: usize) -> Option<f64> {
    let half = 0.5 * d[i].abs();
    let level = |k: usize| d[k].abs().min(d[i].abs()) * d[k].signum() * d[i].signum();
    let mut l = i;
    while l > 0 && level(l) > half {
        l -= 1;
    }
    let mut r = i;
    while r + 1 < d.len() && level(r) > half {
        r += 1;
    }
    if level(l) > half || level(r) > half {
        return None;
    }
    let interp = |a: usize, b: usize| {
        let (ya, yb) = (level(a), level(b));
        if ya == yb {
            x[a]
        } else {
            x[a] + (half - ya) / (yb - ya) * (x[b] - x[a])
        }
    };
    let left = if l < i { interp(l, l + 1) } else { x[i] };
    let right = if r > i { interp(r, r - 1) } else { x[i] };
    Some(right - left)
}

/// Picks up to `n_peaks` extrema of the detrended spectrum that exceed three
/// median absolute deviations, strongest first, skipping any that fall within
/// the half-max width of one already taken. Missing peaks are seeded at evenly spaced
/// quantiles of the grid with zero amplitude.
pub fn initial_peak_guess(spectrum: &Spectrum, n_peaks: usize, shape: LineshapeKind, polarity: Polarity) -> Result<PeakModel> {
    ensure(n_peaks >= 1, || "n_peaks must be ≥ 1".to_string())?;
    let x = spectrum.axis();
    let y = &spectrum.intensity;
    let origin = 0.5 * (spectrum.grid.start + spectrum.grid.stop);
    let (a, b) = line_fit(&x, y, origin);
    let d: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - a - b * (xi - origin)).collect();
    let mut tmp = d.clone();
    let med = median(&mut tmp);
    let mut dev: Vec<f64> = d.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&mut dev);
    let dmax = d.iter().fold(0.0_f64, |m, v| m.max((v - med).abs()));
    let threshold = (3.0 * mad).max(1e-9 * dmax);

    let mut candidates: Vec<usize> = (1..d.len() - 1)
        .filter(|&i| {
            let v = d[i] - med;
            let is_max = d[i] > d[i - 1] && d[i] >= d[i + 1];
            let is_min = d[i] < d[i - 1] && d[i] <= d[i + 1];
            let wanted = match polarity {
                Polarity::Peaks => is_max && v > 0.0,
                Polarity::Dips => is_min && v < 0.0,
                Polarity::Either => (is_max && v > 0.0) || (is_min && v < 0.0),
            };
            wanted && v.abs() > threshold
        })
        .collect();
    candidates.sort_by(|&i, &j| (d[j] - med).abs().total_cmp(&(d[i] - med).abs()).then(i.cmp(&j)));

    // Strongest first; a candidate within the half-max width of an accepted
    // peak is noise on that peak's flank.
    let step = spectrum.step();
    let rel: Vec<f64> = d.iter().map(|v| v - med).collect();
    let mut peaks: Vec<Peak> = Vec::with_capacity(n_peaks);
    for &i in &candidates {
        if peaks.len() == n_peaks {
            break;
        }
        if peaks.iter().any(|p| (x[i] - p.center).abs() < p.fwhm) {
            continue;
        }
        peaks.push(Peak {
            center: x[i],
            fwhm: half_max_width(&x, &rel, i).filter(|w| *w > 0.0).unwrap_or(4.0 * step).max(step),
            amplitude: rel[i],
        });
    }
    let missing = n_peaks - peaks.len();
    if missing > 0 {
        let mut widths: Vec<f64> = peaks.iter().map(|p| p.fwhm).collect();
        let span = spectrum.grid.stop - spectrum.grid.start;
        let fwhm = if widths.is_empty() { span / 20.0 } else { median(&mut widths) };
        for k in 0..missing {
            let q = (k + 1) as f64 / (missing + 1) as f64;
            peaks.push(Peak { center: spectrum.grid.start + q * span, fwhm, amplitude: 0.0 });
        }
    }
    peaks.sort_by(|p, q| p.center.total_cmp(&q.center));
    Ok(PeakModel {
        shape,
        mix: if shape == LineshapeKind::PseudoVoigt { 0.5 } else { 0.0 },
        peaks,
        baseline: Baseline { offset: a + med, slope: b, origin },
    })
}

/// Levenberg-Marquardt refinement of every peak and baseline parameter.
/// Bad data yields `converged = false` with the best parameters found.
pub fn fit_peaks(spectrum: &Spectrum, initial: &PeakModel) -> Result<PeakFit> {
    fit_peaks_with(spectrum, initial, &LmConfig::default())
}

pub fn fit_peaks_with(spectrum: &Spectrum, initial: &PeakModel, cfg: &LmConfig) -> Result<PeakFit> {
    initial.validate()?;
    for (k, p) in initial.peaks.iter().enumerate() {
        ensure(spectrum.grid.contains(p.center), || {
            format!("initial center of peak {k} ({}) lies outside the spectrum grid", p.center)
        })?;
    }
    let curve = initial.curve();
    let x = spectrum.axis();
    let problem = CurveFit::new(&curve, &x, &spectrum.intensity);
    let outcome = minimize(&problem, &initial.to_params(), cfg);
    let model = initial.with_params(&outcome.params);
    let mut result = FitResult::from_outcome(curve.param_names(), &outcome);
    for k in 0..model.peaks.len() {
        result.parameters[3 * k + 1].value = model.peaks[k].fwhm;
    }
    if model.peaks.iter().any(|p| p.fwhm == 0.0 || !p.fwhm.is_finite()) {
        result.converged = false;
        result.message = Some("a peak collapsed to zero width".into());
    }
    Ok(PeakFit { model, result })
}
