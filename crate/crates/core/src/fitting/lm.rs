//! Levenberg-Marquardt minimization of ½‖r(p)‖² with Marquardt's diagonal
//! scaling and a linearized covariance at the optimum.

use nalgebra::{DMatrix, DVector};

/// A residual vector with an analytic Jacobian.
pub trait LeastSquaresProblem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, p: &[f64], out: &mut [f64]);
    /// Row-major `n_residuals × n_params` derivatives ∂r_i/∂p_j.
    fn jacobian(&self, p: &[f64], jac: &mut DMatrix<f64>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iter: usize,
    /// Relative step tolerance ‖δ‖ ≤ xtol·(‖p‖ + xtol).
    pub xtol: f64,
    /// Tolerance on the scaled gradient ∞-norm.
    pub gtol: f64,
    pub lambda0: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { max_iter: 200, xtol: 1e-10, gtol: 1e-10, lambda0: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    SmallGradient,
    SmallStep,
    MaxIterations,
    /// Damping grew without bound and no downhill step exists at working precision.
    Stalled,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub initial_residual_norm: f64,
    pub n_iter: usize,
    pub termination: Termination,
    /// Scaled gradient ∞-norm at the returned parameters.
    pub gradient_norm: f64,
    /// 1σ from diag((JᵀJ)⁻¹)·s² with s² = ‖r‖²/(m − n); infinite when a
    /// parameter is not identifiable.
    pub sigmas: Vec<f64>,
}

impl LmOutcome {
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::SmallGradient | Termination::SmallStep)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// max_j |(Jᵀr)_j| / (‖J_j‖·‖r‖): the cosine between the residual and each
/// Jacobian column, so the test is independent of data and parameter scales.
fn scaled_gradient(jac: &DMatrix<f64>, r: &DVector<f64>) -> f64 {
    let rn = r.norm();
    if rn == 0.0 {
        return 0.0;
    }
    let g = jac.tr_mul(r);
    (0..jac.ncols())
        .map(|j| {
            let cn = jac.column(j).norm();
            if cn == 0.0 {
                0.0
            } else {
                (g[j] / (cn * rn)).abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn minimize<P: LeastSquaresProblem>(problem: &P, initial: &[f64], cfg: &LmConfig) -> LmOutcome {
    let n = problem.n_params();
    let m = problem.n_residuals();
    assert_eq!(initial.len(), n, "initial guess has wrong length");
    let mut p = initial.to_vec();
    let mut r = DVector::zeros(m);
    problem.residuals(&p, r.as_mut_slice());
    let initial_norm = r.norm();
    let mut jac = DMatrix::zeros(m, n);
    let mut lambda = cfg.lambda0;
    let mut termination = Termination::MaxIterations;
    let mut iter = 0;

    if !initial_norm.is_finite() {
        return finish(problem, p, r, jac, initial_norm, 0, Termination::NonFinite);
    }
    problem.jacobian(&p, &mut jac);
    let mut trial = vec![0.0; n];
    let mut r_trial = DVector::zeros(m);

    while iter < cfg.max_iter {
        if scaled_gradient(&jac, &r) < cfg.gtol {
            termination = Termination::SmallGradient;
            break;
        }
        iter += 1;
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        let diag: Vec<f64> = (0..n).map(|j| jtj[(j, j)].max(1e-300)).collect();
        loop {
            let mut a = jtj.clone();
            for j in 0..n {
                a[(j, j)] += lambda * diag[j];
            }
            let step = match a.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e20 {
                        termination = Termination::Stalled;
                        break;
                    }
                    continue;
                }
            };
            for j in 0..n {
                trial[j] = p[j] + step[j];
            }
            problem.residuals(&trial, r_trial.as_mut_slice());
            let new_norm = r_trial.norm();
            let small = step.norm() <= cfg.xtol * (norm(&p) + cfg.xtol);
            if new_norm.is_finite() && new_norm <= r.norm() {
                p.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut r_trial);
                problem.jacobian(&p, &mut jac);
                lambda = (lambda / 10.0).max(1e-15);
                if small {
                    termination = Termination::SmallStep;
                }
                break;
            }
            if small {
                termination = Termination::SmallStep;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                termination = Termination::Stalled;
                break;
            }
        }
        if termination != Termination::MaxIterations {
            break;
        }
    }
    finish(problem, p, r, jac, initial_norm, iter, termination)
}

fn finish<P: LeastSquaresProblem>(
    problem: &P,
    p: Vec<f64>,
    r: DVector<f64>,
    mut jac: DMatrix<f64>,
    initial_norm: f64,
    n_iter: usize,
    termination: Termination,
) -> LmOutcome {
    let m = r.len();
    let n = p.len();
    if p.iter().all(|v| v.is_finite()) {
        problem.jacobian(&p, &mut jac);
    }
    let residual_norm = r.norm();
    let dof = m.saturating_sub(n).max(1) as f64;
    let s2 = residual_norm * residual_norm / dof;
    let sigmas = covariance_diagonal(&jac)
        .into_iter()
        .map(|c| if c.is_finite() { (c * s2).max(0.0).sqrt() } else { f64::INFINITY })
        .collect();
    LmOutcome {
        gradient_norm: scaled_gradient(&jac, &r),
        params: p,
        residual_norm,
        initial_residual_norm: initial_norm,
        n_iter,
        termination: if residual_norm.is_finite() { termination } else { Termination::NonFinite },
        sigmas,
    }
}

/// diag((JᵀJ)⁻¹) via SVD of the column-normalized Jacobian; singular
/// directions map to infinity.
fn covariance_diagonal(jac: &DMatrix<f64>) -> Vec<f64> {
    let n = jac.ncols();
    let scales: Vec<f64> = (0..n).map(|j| jac.column(j).norm()).collect();
    let mut scaled = jac.clone();
    for j in 0..n {
        if scales[j] > 0.0 {
            scaled.column_mut(j).scale_mut(1.0 / scales[j]);
        }
    }
    let svd = scaled.svd(false, true);
    let v_t = match svd.v_t {
        Some(v) => v,
        None => return vec![f64::INFINITY; n],
    };
    let smax = svd.singular_values.max();
    let mut out = vec![0.0; n];
    for j in 0..n {
        if scales[j] == 0.0 {
            out[j] = f64::INFINITY;
            continue;
        }
        let mut acc = 0.0;
        for k in 0..svd.singular_values.len() {
            let s = svd.singular_values[k];
            let v = v_t[(k, j)];
            if s <= smax * 1e-12 {
                if v.abs() > 1e-8 {
                    acc = f64::INFINITY;
                    break;
                }
                continue;
            }
            acc += v * v / (s * s);
        }
        out[j] = acc / (scales[j] * scales[j]);
    }
    out
}

/// Central-difference Jacobian with step `rel_step·max(|p_j|, 1)`, used as a
/// test oracle for the analytic Jacobians.
pub fn finite_difference_jacobian<P: LeastSquaresProblem>(problem: &P, p: &[f64], rel_step: f64) -> DMatrix<f64> {
    let n = problem.n_params();
    let m = problem.n_residuals();
    let mut jac = DMatrix::zeros(m, n);
    let mut up = vec![0.0; m];
    let mut down = vec![0.0; m];
    let mut q = p.to_vec();
    for j in 0..n {
        let h = rel_step * p[j].abs().max(1.0);
        q[j] = p[j] + h;
        problem.residuals(&q, &mut up);
        q[j] = p[j] - h;
        problem.residuals(&q, &mut down);
        q[j] = p[j];
        for i in 0..m {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}
