//! Closed-form curve models with analytic parameter gradients.

use std::f64::consts::TAU;

use nalgebra::DMatrix;

use super::lm::LeastSquaresProblem;
use crate::spectra::LineshapeSpec;

pub trait CurveModel {
    fn param_names(&self) -> Vec<String>;
    fn value(&self, x: f64, p: &[f64]) -> f64;
    /// ∂value/∂p_j written into `grad`.
    fn gradient(&self, x: f64, p: &[f64], grad: &mut [f64]);
}

/// Sum of height-normalized peaks on a linear baseline.
/// Layout: `[center, fwhm, amplitude]` per peak, then `offset, slope`; the
/// slope is taken relative to `x_ref`.
#[derive(Debug, Clone, Copy)]
pub struct PeakSum {
    pub shape: LineshapeSpec,
    pub n_peaks: usize,
    pub x_ref: f64,
}

impl CurveModel for PeakSum {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(3 * self.n_peaks + 2);
        for k in 0..self.n_peaks {
            names.push(format!("center_{k}"));
            names.push(format!("fwhm_{k}"));
            names.push(format!("amplitude_{k}"));
        }
        names.push("baseline_offset".into());
        names.push("baseline_slope".into());
        names
    }

    fn value(&self, x: f64, p: &[f64]) -> f64 {
        let nb = 3 * self.n_peaks;
        let mut v = p[nb] + p[nb + 1] * (x - self.x_ref);
        for k in 0..self.n_peaks {
            let (c, w, a) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            v += a * self.shape.with_fwhm(w).height(x - c);
        }
        v
    }

    fn gradient(&self, x: f64, p: &[f64], grad: &mut [f64]) {
        let nb = 3 * self.n_peaks;
        for k in 0..self.n_peaks {
            let (c, w, a) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            let (h, dx, dw) = self.shape.with_fwhm(w).height_with_partials(x - c);
            grad[3 * k] = -a * dx;
            grad[3 * k + 1] = a * dw;
            grad[3 * k + 2] = h;
        }
        grad[nb] = 1.0;
        grad[nb + 1] = x - self.x_ref;
    }
}

/// `amplitude·exp(−t/tau) + offset`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpDecay;

impl CurveModel for ExpDecay {
    fn param_names(&self) -> Vec<String> {
        vec!["amplitude".into(), "tau".into(), "offset".into()]
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-t / p[1]).exp() + p[2]
    }

    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let e = (-t / p[1]).exp();
        grad[0] = e;
        grad[1] = p[0] * e * t / (p[1] * p[1]);
        grad[2] = 1.0;
    }
}

/// `m_inf·(1 − 2 exp(−t/t1))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct InversionRecovery;

impl CurveModel for InversionRecovery {
    fn param_names(&self) -> Vec<String> {
        vec!["m_inf".into(), "t1".into()]
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (1.0 - 2.0 * (-t / p[1]).exp())
    }

    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let e = (-t / p[1]).exp();
        grad[0] = 1.0 - 2.0 * e;
        grad[1] = -2.0 * p[0] * e * t / (p[1] * p[1]);
    }
}

/// `amplitude·cos(2π·frequency·t + phase)·exp(−t/tau) + offset` with t in ns
/// and the frequency in MHz.
#[derive(Debug, Clone, Copy, Default)]
pub struct DampedCosine;

impl CurveModel for DampedCosine {
    fn param_names(&self) -> Vec<String> {
        vec!["amplitude".into(), "frequency_mhz".into(), "phase".into(), "tau".into(), "offset".into()]
    }

    fn value(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (TAU * p[1] * 1e-3 * t + p[2]).cos() * (-t / p[3]).exp() + p[4]
    }

    fn gradient(&self, t: f64, p: &[f64], grad: &mut [f64]) {
        let arg = TAU * p[1] * 1e-3 * t + p[2];
        let (s, c) = arg.sin_cos();
        let e = (-t / p[3]).exp();
        grad[0] = c * e;
        grad[1] = -p[0] * s * e * TAU * 1e-3 * t;
        grad[2] = -p[0] * s * e;
        grad[3] = p[0] * c * e * t / (p[3] * p[3]);
        grad[4] = 1.0;
    }
}

/// Residuals `w_i·(model(x_i) − y_i)` for a curve model on sampled data.
pub struct CurveFit<'a, M> {
    pub model: &'a M,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
    pub weights: Option<&'a [f64]>,
    n_params: usize,
}

impl<'a, M: CurveModel> CurveFit<'a, M> {
    pub fn new(model: &'a M, xs: &'a [f64], ys: &'a [f64]) -> Self {
        let n_params = model.param_names().len();
        Self { model, xs, ys, weights: None, n_params }
    }

    pub fn weighted(mut self, w: &'a [f64]) -> Self {
        self.weights = Some(w);
        self
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights.map_or(1.0, |w| w[i])
    }
}

impl<M: CurveModel> LeastSquaresProblem for CurveFit<'_, M> {
    fn n_params(&self) -> usize {
        self.n_params
    }

    fn n_residuals(&self) -> usize {
        self.xs.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = self.weight(i) * (self.model.value(self.xs[i], p) - self.ys[i]);
        }
    }

    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>) {
        let mut g = vec![0.0; self.n_params];
        for i in 0..self.xs.len() {
            self.model.gradient(self.xs[i], p, &mut g);
            let w = self.weight(i);
            for (j, gj) in g.iter().enumerate() {
                jac[(i, j)] = w * gj;
            }
        }
    }
}
