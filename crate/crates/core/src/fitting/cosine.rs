//! Damped-cosine fits for Rabi oscillations, seeded from the dominant
//! Fourier component.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::lm::{minimize, LmConfig};
use super::models::{CurveFit, CurveModel, DampedCosine};
use super::FitResult;
use crate::error::{ensure, Result};
use crate::spectra::Spectrum;

const NAMES: [&str; 5] = ["amplitude", "frequency_mhz", "phase", "tau", "offset"];
const PAD: usize = 8;

/// Dominant non-DC bin of the zero-padded spectrum of `y`, as
/// `(frequency in cycles per unit of t, complex value)`.
fn dominant_bin(y: &[f64], dt: f64) -> Option<(f64, Complex<f64>, f64)> {
    let n = y.len() * PAD;
    let mut buf: Vec<Complex<f64>> = y.iter().map(|v| Complex::new(*v, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = &buf[..n / 2];
    let mags: Vec<f64> = half.iter().map(|c| c.norm()).collect();
    let (k, peak) = mags.iter().enumerate().skip(PAD).fold((0, 0.0), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
    if k == 0 || peak == 0.0 {
        return None;
    }
    let mut sorted = mags[PAD..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    Some((k as f64 / (n as f64 * dt), half[k], peak / median.max(f64::MIN_POSITIVE)))
}

/// Fits `a·cos(2πft + φ)·exp(−t/τ) + c` with t in ns and f in MHz. A trace
/// without a dominant Fourier component yields `converged = false`.
pub fn fit_damped_cosine(trace: &Spectrum) -> Result<FitResult> {
    ensure(trace.len() >= 8, || format!("damped-cosine fit needs ≥ 8 samples, got {}", trace.len()))?;
    let t = trace.axis();
    let y = &trace.intensity;
    let dt = trace.step();
    let span = trace.grid.stop - trace.grid.start;
    let q = y.len() / 4;
    let c0 = y[y.len() - q.max(1)..].iter().sum::<f64>() / q.max(1) as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - c0).collect();
    let Some((f_cycles_per_ns, x_k, dominance)) = dominant_bin(&centered, dt) else {
        return Ok(FitResult::failed(&NAMES, &[0.0, f64::NAN, 0.0, f64::NAN, c0], 0.0, "no oscillatory component"));
    };
    if dominance < 3.0 {
        return Ok(FitResult::failed(
            &NAMES,
            &[0.0, f64::NAN, 0.0, f64::NAN, c0],
            0.0,
            format!("no dominant Fourier peak (peak/median {dominance:.2})"),
        ));
    }
    let f0 = f_cycles_per_ns * 1e3;
    let phi0 = x_k.arg() - TAU * f_cycles_per_ns * t[0];
    let h = y.len() / 2;
    let env = |s: &[f64]| s.iter().map(|v| v.abs()).sum::<f64>() / s.len() as f64;
    let ratio = env(&centered[..h]) / env(&centered[h..]).max(f64::MIN_POSITIVE);
    let tau0 = if ratio > 1.05 { (0.5 * span / ratio.ln()).min(10.0 * span) } else { 10.0 * span };
    let a0 = centered.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * (t[0] / tau0).exp();

    let model = DampedCosine;
    let problem = CurveFit::new(&model, &t, y);
    let cfg = LmConfig::default();
    let bin = 1e3 / (y.len() as f64 * PAD as f64 * dt);
    let best = [0.0, -1.0, 1.0, -2.0, 2.0]
        .iter()
        .map(|k| minimize(&problem, &[a0, (f0 + k * bin).max(0.5 * bin), phi0, tau0, c0], &cfg))
        .min_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm))
        .expect("at least one start");
    let mut p = best.params.clone();
    // Canonical form: positive amplitude and frequency, phase in (−π, π].
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[2] = -p[2];
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] += std::f64::consts::PI;
    }
    p[2] = -(std::f64::consts::PI - p[2]).rem_euclid(TAU) + std::f64::consts::PI;
    let mut out = best.clone();
    out.params = p;
    let mut res = FitResult::from_outcome(model.param_names(), &out);
    if out.params[3] <= 0.0 {
        res.converged = false;
        res.message = Some(format!("non-positive damping time {}", out.params[3]));
    }
    Ok(res.with_provenance("initial_frequency_mhz", f0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rabi_trace, PulsedEsrParams};
    use crate::spectra::{AxisKind, Grid};

    fn params() -> PulsedEsrParams {
        PulsedEsrParams { t_m_ns: 100.0, t_1_ns: 198.0, rabi_max_mhz: 10.0, rabi_decay_ns: 90.0, nuclei: vec![] }
    }

    #[test]
    fn rabi_frequency_within_one_bin_and_refined() {
        let grid = Grid::new(0.0, 500.0, 501).unwrap();
        let fit = fit_damped_cosine(&rabi_trace(&params(), 1.0, &grid).unwrap()).unwrap();
        assert!(fit.converged, "{:?}", fit.message);
        let f0: f64 = fit.provenance["initial_frequency_mhz"].parse().unwrap();
        let bin = 1e3 / (501.0 * 8.0 * 1.0);
        assert!((f0 - 10.0).abs() <= bin * 8.0);
        assert!((fit.value("frequency_mhz").unwrap() - 10.0).abs() < 1e-8);
        assert!((fit.value("tau").unwrap() - 90.0).abs() < 1e-6);
    }

    #[test]
    fn square_root_power_law() {
        let grid = Grid::new(0.0, 1000.0, 1001).unwrap();
        let f: Vec<f64> = [1.0, 0.25, 0.0625]
            .iter()
            .map(|&p| fit_damped_cosine(&rabi_trace(&params(), p, &grid).unwrap()).unwrap().value("frequency_mhz").unwrap())
            .collect();
        assert!((f[1] / f[0] - 0.5).abs() < 1e-3, "{f:?}");
        assert!((f[2] / f[0] - 0.25).abs() < 1e-3, "{f:?}");
    }

    #[test]
    fn phase_shift_moves_only_phase() {
        let grid = Grid::new(0.0, 400.0, 401).unwrap();
        let make = |phi: f64| {
            let y = grid.points().map(|t| (TAU * 0.012 * t + phi).cos() * (-t / 150.0).exp() + 0.1).collect();
            Spectrum::new(AxisKind::TimeNs, grid, y).unwrap()
        };
        let a = fit_damped_cosine(&make(0.0)).unwrap();
        let b = fit_damped_cosine(&make(0.7)).unwrap();
        assert!((a.value("frequency_mhz").unwrap() - b.value("frequency_mhz").unwrap()).abs() < 1e-8);
        assert!((b.value("phase").unwrap() - a.value("phase").unwrap() - 0.7).abs() < 1e-8);
    }

    #[test]
    fn flat_trace_does_not_converge() {
        let grid = Grid::new(0.0, 100.0, 101).unwrap();
        let s = Spectrum::new(AxisKind::TimeNs, grid, vec![1.0; 101]).unwrap();
        assert!(!fit_damped_cosine(&s).unwrap().converged);
    }
}
