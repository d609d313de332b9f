//! Inverse problems: Levenberg-Marquardt fits recovering physical parameters
//! from spectra and traces.

mod cosine;
mod eseem;
mod exponential;
mod gfactor;
pub mod lm;
pub mod models;
mod peaks;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cosine::fit_damped_cosine;
pub use eseem::{fit_eseem_frequencies, Envelope, EseemOptions};
pub use exponential::{fit_exponential, ExponentialKind};
pub use gfactor::{fit_gfactors, label_sorted_centers, FieldTransitions, GFactorFit};
pub use lm::{LmConfig, LmOutcome, Termination};
pub use peaks::{fit_peaks, initial_peak_guess, Baseline, Peak, PeakFit, PeakModel, Polarity};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    /// 1σ from the linearized covariance.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    pub residual_norm: f64,
    pub initial_residual_norm: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub gradient_norm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl FitResult {
    pub(crate) fn from_outcome(names: Vec<String>, out: &LmOutcome) -> Self {
        let parameters = names
            .into_iter()
            .zip(out.params.iter().zip(&out.sigmas))
            .map(|(name, (&value, &sigma))| FitParameter { name, value, sigma })
            .collect();
        Self {
            parameters,
            residual_norm: out.residual_norm,
            initial_residual_norm: out.initial_residual_norm,
            converged: out.converged(),
            n_iter: out.n_iter,
            gradient_norm: out.gradient_norm,
            message: (!out.converged()).then(|| format!("{:?}", out.termination)),
            provenance: BTreeMap::new(),
        }
    }

    pub(crate) fn failed(names: &[&str], values: &[f64], residual_norm: f64, message: impl Into<String>) -> Self {
        Self {
            parameters: names
                .iter()
                .zip(values)
                .map(|(n, v)| FitParameter { name: n.to_string(), value: *v, sigma: f64::INFINITY })
                .collect(),
            residual_norm,
            initial_residual_norm: residual_norm,
            converged: false,
            n_iter: 0,
            gradient_norm: f64::NAN,
            message: Some(message.into()),
            provenance: BTreeMap::new(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&FitParameter> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|p| p.value)
    }

    pub fn values(&self) -> Vec<f64> {
        self.parameters.iter().map(|p| p.value).collect()
    }

    pub fn with_provenance(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }

    pub fn to_json(&self) -> crate::Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Format(e.to_string()))
    }
}
