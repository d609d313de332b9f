//! Exponential decay and inversion-recovery fits on time traces.

use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmConfig};
use super::models::{CurveFit, CurveModel, ExpDecay, InversionRecovery};
use super::FitResult;
use crate::error::{ensure, Result};
use crate::spectra::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentialKind {
    /// `amplitude·exp(−t/tau) + offset`
    Decay,
    /// `m_inf·(1 − 2 exp(−t/t1))`
    InversionRecovery,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// First time at which `y` crosses `level`, linearly interpolated.
fn first_crossing(t: &[f64], y: &[f64], level: f64) -> Option<f64> {
    (1..y.len()).find_map(|i| {
        let (a, b) = (y[i - 1] - level, y[i] - level);
        (a * b <= 0.0 && a != b).then(|| t[i - 1] + a / (a - b) * (t[i] - t[i - 1]))
    })
}

pub fn fit_exponential(trace: &Spectrum, kind: ExponentialKind) -> Result<FitResult> {
    ensure(trace.len() >= 4, || format!("exponential fit needs ≥ 4 samples, got {}", trace.len()))?;
    let t = trace.axis();
    let y = &trace.intensity;
    let span = trace.grid.stop - trace.grid.start;
    let tail = &y[y.len() - (y.len() / 10).max(1)..];
    let scale = trace.max_abs();
    let spread = y.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - y.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let cfg = LmConfig::default();

    match kind {
        ExponentialKind::Decay => {
            let names = ["amplitude", "tau", "offset"];
            let c0 = mean(tail);
            if spread <= 1e-12 * scale || scale == 0.0 {
                return Ok(FitResult::failed(&names, &[0.0, f64::NAN, c0], 0.0, "constant trace: time constant unidentifiable"));
            }
            let y0 = y[0] - c0;
            let tau0 = first_crossing(&t, y, c0 + y0 / std::f64::consts::E)
                .map(|tc| tc - t[0])
                .filter(|v| *v > 0.0)
                .unwrap_or(span / 3.0);
            let a0 = y0 * (t[0] / tau0).exp();
            let model = ExpDecay;
            let out = minimize(&CurveFit::new(&model, &t, y), &[a0, tau0, c0], &cfg);
            let mut res = FitResult::from_outcome(model.param_names(), &out);
            if out.params[1] <= 0.0 {
                res.converged = false;
                res.message = Some(format!("non-positive time constant {}", out.params[1]));
            }
            Ok(res)
        }
        ExponentialKind::InversionRecovery => {
            let names = ["m_inf", "t1"];
            let m0 = mean(tail);
            if spread <= 1e-12 * scale || scale == 0.0 {
                return Ok(FitResult::failed(&names, &[m0, f64::NAN], 0.0, "constant trace: time constant unidentifiable"));
            }
            let t1_0 = first_crossing(&t, y, 0.0)
                .map(|tc| tc / std::f64::consts::LN_2)
                .filter(|v| *v > 0.0)
                .unwrap_or(span / 3.0);
            let model = InversionRecovery;
            let out = minimize(&CurveFit::new(&model, &t, y), &[m0, t1_0], &cfg);
            let mut res = FitResult::from_outcome(model.param_names(), &out);
            if out.params[1] <= 0.0 {
                res.converged = false;
                res.message = Some(format!("non-positive time constant {}", out.params[1]));
            }
            Ok(res)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{hahn_echo_trace, inversion_recovery_trace, PulsedEsrParams};
    use crate::spectra::{AxisKind, Grid};

    fn params() -> PulsedEsrParams {
        PulsedEsrParams { t_m_ns: 100.0, t_1_ns: 198.0, rabi_max_mhz: 10.0, rabi_decay_ns: 90.0, nuclei: vec![] }
    }

    #[test]
    fn hahn_decay_recovers_phase_memory_time() {
        let grid = Grid::new(20.0, 800.0, 391).unwrap();
        let trace = hahn_echo_trace(&params(), &grid).unwrap();
        let fit = fit_exponential(&trace, ExponentialKind::Decay).unwrap();
        assert!(fit.converged, "{:?}", fit.message);
        assert!((fit.value("tau").unwrap() - 100.0).abs() < 1e-6);
    }

    #[test]
    fn recovery_crosses_zero_at_ln2_t1() {
        let grid = Grid::new(0.0, 1500.0, 301).unwrap();
        let trace = inversion_recovery_trace(&params(), 1.0, &grid).unwrap();
        let fit = fit_exponential(&trace, ExponentialKind::InversionRecovery).unwrap();
        assert!(fit.converged);
        let t1 = fit.value("t1").unwrap();
        assert!((t1 - 198.0).abs() < 1e-6);
        assert!((t1 * std::f64::consts::LN_2 - 137.24).abs() < 0.01);
    }

    #[test]
    fn constant_trace_does_not_converge() {
        let grid = Grid::new(0.0, 100.0, 11).unwrap();
        let s = Spectrum::new(AxisKind::TimeNs, grid, vec![0.5; 11]).unwrap();
        let fit = fit_exponential(&s, ExponentialKind::Decay).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.value("amplitude"), Some(0.0));
        assert!(fit.parameters.iter().all(|p| p.sigma >= 0.0));
    }

    #[test]
    fn too_short_trace_rejected() {
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let s = Spectrum::new(AxisKind::TimeNs, grid, vec![1.0, 0.5, 0.2]).unwrap();
        assert!(fit_exponential(&s, ExponentialKind::Decay).is_err());
    }

    #[test]
    fn sigmas_shrink_with_replication() {
        // Same noisy data replicated N times as a longer trace of repeated
        // samples; the fit must report σ/√N.
        let n = 60;
        let t: Vec<f64> = (0..n).map(|i| 10.0 * i as f64).collect();
        let noise: Vec<f64> = (0..n).map(|i| 0.01 * (((i * 37 + 11) % 17) as f64 / 8.0 - 1.0)).collect();
        let y: Vec<f64> = t.iter().zip(&noise).map(|(t, e)| 2.0 * (-t / 120.0).exp() + 0.1 + e).collect();
        let model = ExpDecay;
        let fit = |reps: usize| {
            let tt: Vec<f64> = (0..reps).flat_map(|_| t.iter().copied()).collect();
            let yy: Vec<f64> = (0..reps).flat_map(|_| y.iter().copied()).collect();
            let out = minimize(&CurveFit::new(&model, &tt, &yy), &[2.0, 120.0, 0.1], &LmConfig::default());
            out.sigmas[1]
        };
        let s1 = fit(1);
        for reps in [4, 9] {
            let ratio = fit(reps) * (reps as f64).sqrt() / s1;
            assert!((ratio - 1.0).abs() < 0.1, "reps {reps}: ratio {ratio}");
        }
    }
}
