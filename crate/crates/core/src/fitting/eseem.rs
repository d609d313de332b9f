//! Nuclear modulation frequencies from a Hahn-echo trace.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::FitResult;
use crate::spectra::Spectrum;

/// Decay envelope `amplitude·exp(−t/tau)` fitted to the trace beforehand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub amplitude: f64,
    pub tau: f64,
}

impl Envelope {
    /// Reads `amplitude` and `tau` from an exponential-decay fit.
    pub fn from_fit(fit: &FitResult) -> Option<Self> {
        Some(Self { amplitude: fit.value("amplitude")?, tau: fit.value("tau")? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EseemOptions {
    /// Peaks below this fraction of the strongest one are dropped. The
    /// default sits above the 1/4 relative height of the 2ν harmonics.
    pub relative_threshold: f64,
    /// Absolute floor on the single-sided modulation amplitude.
    pub min_amplitude: f64,
    /// Zero-padding factor.
    pub padding: usize,
}

impl Default for EseemOptions {
    fn default() -> Self {
        Self { relative_threshold: 0.35, min_amplitude: 1e-3, padding: 4 }
    }
}

/// Divides out the envelope, removes a linear trend, applies a Hann window,
/// zero-pads and returns the frequencies (MHz) of magnitude maxima above the
/// thresholds. The trace axis is 2τ in ns; frequencies refer to τ, which is
/// what the modulation oscillates in.
pub fn fit_eseem_frequencies(trace: &Spectrum, envelope: &Envelope, opts: &EseemOptions) -> Vec<f64> {
    let n = trace.len();
    if n < 8 || envelope.amplitude == 0.0 || !envelope.tau.is_finite() || envelope.tau <= 0.0 {
        return Vec::new();
    }
    let t = trace.axis();
    let mut d: Vec<f64> = t
        .iter()
        .zip(&trace.intensity)
        .map(|(t, y)| y / (envelope.amplitude * (-t / envelope.tau).exp()))
        .collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Vec::new();
    }
    let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let line = |v: &[f64]| {
        let (mx, my) = ((n - 1) as f64 / 2.0, v.iter().sum::<f64>() / n as f64);
        let sxx: f64 = idx.iter().map(|i| (i - mx).powi(2)).sum();
        let sxy: f64 = idx.iter().zip(v).map(|(i, y)| (i - mx) * (y - my)).sum();
        (mx, my, sxy / sxx)
    };
    // An imperfect envelope leaves an exponential drift that grows along the
    // trace; a straight line through ln d removes it.
    if d.iter().all(|v| *v > 0.0) {
        let logs: Vec<f64> = d.iter().map(|v| v.ln()).collect();
        let (mx, my, slope) = line(&logs);
        for (i, v) in d.iter_mut().enumerate() {
            *v /= (my + slope * (i as f64 - mx)).exp();
        }
    }
    let (mx, my, slope) = line(&d);
    let window: Vec<f64> = (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()).collect();
    let wsum: f64 = window.iter().sum();
    for i in 0..n {
        d[i] = (d[i] - my - slope * (i as f64 - mx)) * window[i];
    }
    let m = n * opts.padding.max(1);
    let mut buf: Vec<Complex<f64>> = d.iter().map(|v| Complex::new(*v, 0.0)).collect();
    buf.resize(m, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let amp: Vec<f64> = buf[..m / 2].iter().map(|c| 2.0 * c.norm() / wsum).collect();

    // τ step is half the 2τ step; frequencies in MHz for ns axes.
    let dtau = 0.5 * trace.step();
    let df = 1e3 / (m as f64 * dtau);
    let tau_span = dtau * (n - 1) as f64;
    let f_min = 2.0e3 / tau_span;
    let mut peaks: Vec<(f64, f64)> = (1..amp.len() - 1)
        .filter(|&k| k as f64 * df > f_min && amp[k] > amp[k - 1] && amp[k] >= amp[k + 1])
        .map(|k| {
            let (a, b, c) = (amp[k - 1], amp[k], amp[k + 1]);
            let den = a - 2.0 * b + c;
            let shift = if den != 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
            ((k as f64 + shift) * df, b - 0.25 * (a - c) * shift)
        })
        .collect();
    let strongest = peaks.iter().fold(0.0_f64, |m, p| m.max(p.1));
    let floor = (opts.relative_threshold * strongest).max(opts.min_amplitude);
    peaks.retain(|p| p.1 >= floor);
    peaks.into_iter().map(|p| p.0).collect()
}
