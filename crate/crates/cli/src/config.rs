//! Scenario configuration: strict JSON parsing that reports every problem at
//! once, each with a dotted path into the document.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use spinphoton_core::dynamics::{PulsedEsrParams, PumpSettings};
use spinphoton_core::fitting::{EseemOptions, PeakModel, Polarity};
use spinphoton_core::holeburn::{PatternOptions, RelaxationRegime};
use spinphoton_core::model::{HyperfineModel, OpticalSystem, Transition};
use spinphoton_core::spectra::{AxisKind, LineshapeKind, DEFAULT_ORIENTATIONS};

use crate::error::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Ple,
    Powder,
    Edfs,
    Holes,
    HoleMap,
    PumpTrace,
    Rabi,
    Echo,
    Recovery,
    AngleSweep,
    FitPeaks,
    FitG,
    FitDecay,
    Boltzmann,
}

impl Scenario {
    pub fn is_fit(self) -> bool {
        matches!(self, Scenario::FitPeaks | Scenario::FitG | Scenario::FitDecay)
    }

    /// Axis of the `grid` section, or `None` when the scenario takes no grid.
    pub fn grid_axis(self) -> Option<AxisKind> {
        match self {
            Scenario::Ple => Some(AxisKind::FrequencyGhz),
            Scenario::Powder | Scenario::Edfs => Some(AxisKind::FieldMt),
            Scenario::Holes | Scenario::HoleMap => Some(AxisKind::DetuningMhz),
            Scenario::PumpTrace | Scenario::Rabi | Scenario::Echo | Scenario::Recovery => Some(AxisKind::TimeNs),
            Scenario::AngleSweep => Some(AxisKind::AngleDeg),
            Scenario::FitPeaks | Scenario::FitG | Scenario::FitDecay | Scenario::Boltzmann => None,
        }
    }

    pub fn name(self) -> String {
        serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Standard deviation relative to max |intensity|.
    #[serde(default)]
    pub sigma_rel: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Relative paths resolve against the output directory (or the config's
    /// directory when none is set).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_orientations() -> usize {
    DEFAULT_ORIENTATIONS
}

fn peaks() -> Polarity {
    Polarity::Peaks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlePhysics {
    pub optical: OpticalSystem,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    #[serde(rename = "spin_temperature_K")]
    pub spin_temperature_k: f64,
    pub lineshape: LineshapeKind,
    /// Lorentzian fraction; required for pseudo-Voigt lines only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowderPhysics {
    pub g_principal: [f64; 3],
    #[serde(rename = "mw_GHz")]
    pub mw_ghz: f64,
    #[serde(rename = "linewidth_mT")]
    pub linewidth_mt: f64,
    pub lineshape: LineshapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<f64>,
    #[serde(default = "default_orientations")]
    pub orientations: usize,
    /// Field derivative (cw) instead of absorption.
    #[serde(default = "yes")]
    pub derivative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdfsPhysics {
    pub g_principal: [f64; 3],
    /// Field direction in the g-tensor frame; normalized on use.
    pub field_direction: [f64; 3],
    #[serde(rename = "mw_GHz")]
    pub mw_ghz: f64,
    #[serde(rename = "linewidth_mT")]
    pub linewidth_mt: f64,
    pub lineshape: LineshapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<f64>,
    pub hyperfine: HyperfineModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolesPhysics {
    pub optical: OpticalSystem,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    pub regime: RelaxationRegime,
    #[serde(default)]
    pub presentation: PatternOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleMapPhysics {
    pub optical: OpticalSystem,
    #[serde(rename = "fields_mT")]
    pub fields_mt: GridSpec,
    pub regime: RelaxationRegime,
    #[serde(default)]
    pub presentation: PatternOptions,
    /// When set, ridges are tracked at this |dPL| level and reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpTracePhysics {
    pub optical: OpticalSystem,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    pub transition: Transition,
    pub pump: PumpSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RabiPhysics {
    pub pulsed: PulsedEsrParams,
    pub power_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoPhysics {
    pub pulsed: PulsedEsrParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPhysics {
    pub pulsed: PulsedEsrParams,
    #[serde(default = "one")]
    pub m_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub normal: [f64; 3],
    pub reference: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSweepPhysics {
    pub ground_principal: [f64; 3],
    pub excited_principal: [f64; 3],
    /// Common lab-frame orientation of both site-A tensors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_orientation: Option<AxisAngle>,
    /// Rotation taking site A onto site B.
    pub relation: AxisAngle,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    pub plane: PlaneSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoltzmannPhysics {
    pub g: f64,
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    /// Forward direction: populations at this temperature.
    #[serde(default, rename = "temperature_K", skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    /// Inverse direction: spin temperature from an upper/lower ratio.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPeaksPhysics {
    pub input: PathBuf,
    pub n_peaks: usize,
    pub lineshape: LineshapeKind,
    #[serde(default = "peaks")]
    pub polarity: Polarity,
    /// Explicit starting point; otherwise peaks are picked from the data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<PeakModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpectrum {
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCenters {
    #[serde(rename = "field_mT")]
    pub field_mt: f64,
    /// A, B, C, D.
    #[serde(rename = "centers_GHz")]
    pub centers_ghz: [f64; 4],
    #[serde(default, rename = "sigmas_GHz", skip_serializing_if = "Option::is_none")]
    pub sigmas_ghz: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitGPhysics {
    /// PLE spectra, fitted with four peaks each.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectra: Vec<FieldSpectrum>,
    /// Already-labelled transition frequencies.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<FieldCenters>,
    pub lineshape: LineshapeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Decay,
    InversionRecovery,
    DampedCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDecayPhysics {
    pub input: PathBuf,
    pub model: DecayModel,
    /// With `decay`, also extract modulation frequencies from the trace.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eseem: Option<EseemOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Physics {
    Ple(PlePhysics),
    Powder(PowderPhysics),
    Edfs(EdfsPhysics),
    Holes(HolesPhysics),
    HoleMap(HoleMapPhysics),
    PumpTrace(PumpTracePhysics),
    Rabi(RabiPhysics),
    Echo(EchoPhysics),
    Recovery(RecoveryPhysics),
    AngleSweep(AngleSweepPhysics),
    FitPeaks(FitPeaksPhysics),
    FitG(FitGPhysics),
    FitDecay(FitDecayPhysics),
    Boltzmann(BoltzmannPhysics),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub physics: Physics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub noise: NoiseSpec,
    pub output: OutputSpec,
}

const TOP_LEVEL: [&str; 5] = ["scenario", "physics", "grid", "noise", "output"];

/// Deserializes one section, recording unknown keys and type errors.
fn section<T: DeserializeOwned>(value: &Value, prefix: &str, diags: &mut Vec<Diagnostic>) -> Option<T> {
    let mut unknown = Vec::new();
    let parsed: Result<T, _> = serde_ignored::deserialize(value.clone(), |p| unknown.push(p.to_string()));
    for key in unknown {
        diags.push(Diagnostic::new(format!("{prefix}.{key}"), "unknown field"));
    }
    match parsed {
        Ok(v) => Some(v),
        Err(e) => {
            let msg = e.to_string();
            let path = msg
                .strip_prefix("missing field `")
                .and_then(|rest| rest.split('`').next())
                .map_or_else(|| prefix.to_string(), |field| format!("{prefix}.{field}"));
            diags.push(Diagnostic::new(path, msg));
            None
        }
    }
}

fn physics_for(scenario: Scenario, v: &Value, diags: &mut Vec<Diagnostic>) -> Option<Physics> {
    let p = "physics";
    Some(match scenario {
        Scenario::Ple => Physics::Ple(section(v, p, diags)?),
        Scenario::Powder => Physics::Powder(section(v, p, diags)?),
        Scenario::Edfs => Physics::Edfs(section(v, p, diags)?),
        Scenario::Holes => Physics::Holes(section(v, p, diags)?),
        Scenario::HoleMap => Physics::HoleMap(section(v, p, diags)?),
        Scenario::PumpTrace => Physics::PumpTrace(section(v, p, diags)?),
        Scenario::Rabi => Physics::Rabi(section(v, p, diags)?),
        Scenario::Echo => Physics::Echo(section(v, p, diags)?),
        Scenario::Recovery => Physics::Recovery(section(v, p, diags)?),
        Scenario::AngleSweep => Physics::AngleSweep(section(v, p, diags)?),
        Scenario::FitPeaks => Physics::FitPeaks(section(v, p, diags)?),
        Scenario::FitG => Physics::FitG(section(v, p, diags)?),
        Scenario::FitDecay => Physics::FitDecay(section(v, p, diags)?),
        Scenario::Boltzmann => Physics::Boltzmann(section(v, p, diags)?),
    })
}

impl ScenarioConfig {
    /// Parses and validates a config document, returning every violation.
    pub fn parse(text: &str) -> Result<Self, Vec<Diagnostic>> {
        let root: Value = serde_json::from_str(text).map_err(|e| vec![Diagnostic::new("$", format!("invalid JSON: {e}"))])?;
        let Some(obj) = root.as_object() else {
            return Err(vec![Diagnostic::new("$", "config must be a JSON object")]);
        };
        let mut diags = Vec::new();
        for key in obj.keys().filter(|k| !TOP_LEVEL.contains(&k.as_str())) {
            diags.push(Diagnostic::new(key.clone(), "unknown field"));
        }
        let required = |name: &str, diags: &mut Vec<Diagnostic>| {
            let v = obj.get(name);
            if v.is_none() {
                diags.push(Diagnostic::new(name, format!("missing field `{name}`")));
            }
            v
        };
        let scenario: Option<Scenario> = required("scenario", &mut diags).and_then(|v| section(v, "scenario", &mut diags));
        let physics_value = required("physics", &mut diags);
        let output: Option<OutputSpec> = required("output", &mut diags).and_then(|v| section(v, "output", &mut diags));
        let grid: Option<GridSpec> = obj.get("grid").and_then(|v| section(v, "grid", &mut diags));
        let noise: NoiseSpec = obj.get("noise").and_then(|v| section(v, "noise", &mut diags)).unwrap_or_default();
        let physics = match (scenario, physics_value) {
            (Some(s), Some(v)) => physics_for(s, v, &mut diags),
            _ => None,
        };

        if let Some(s) = scenario {
            match (s.grid_axis(), obj.get("grid")) {
                (Some(_), None) => diags.push(Diagnostic::new("grid", format!("scenario `{}` needs a grid", s.name()))),
                (None, Some(_)) => diags.push(Diagnostic::new("grid", format!("scenario `{}` takes no grid", s.name()))),
                _ => {}
            }
        }
        if let Some(g) = &grid {
            check_grid(g, "grid", &mut diags);
        }
        if !(noise.sigma_rel.is_finite() && noise.sigma_rel >= 0.0) {
            diags.push(Diagnostic::new("noise.sigma_rel", format!("must be >= 0, got {}", noise.sigma_rel)));
        }
        if let Some(p) = &physics {
            check_physics(p, noise.sigma_rel, &mut diags);
        }
        match (scenario, physics, output) {
            (Some(scenario), Some(physics), Some(output)) if diags.is_empty() => {
                Ok(Self { scenario, physics, grid, noise, output })
            }
            _ => Err(diags),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn check_grid(g: &GridSpec, path: &str, diags: &mut Vec<Diagnostic>) {
    if g.n < 2 {
        diags.push(Diagnostic::new(format!("{path}.n"), format!("must be >= 2, got {}", g.n)));
    }
    if !(g.start.is_finite() && g.stop.is_finite()) {
        diags.push(Diagnostic::new(path, "start and stop must be finite"));
    } else if g.stop <= g.start {
        diags.push(Diagnostic::new(format!("{path}.stop"), format!("must exceed start ({} <= {})", g.stop, g.start)));
    }
}

fn check_nonneg(v: f64, path: &str, diags: &mut Vec<Diagnostic>) {
    if !(v.is_finite() && v >= 0.0) {
        diags.push(Diagnostic::new(path, format!("must be >= 0, got {v}")));
    }
}

fn check_positive(v: f64, path: &str, diags: &mut Vec<Diagnostic>) {
    if !(v.is_finite() && v > 0.0) {
        diags.push(Diagnostic::new(path, format!("must be > 0, got {v}")));
    }
}

fn check_core(r: spinphoton_core::Result<()>, path: &str, diags: &mut Vec<Diagnostic>) {
    if let Err(e) = r {
        diags.push(Diagnostic::new(path, e.to_string()));
    }
}

fn check_mix(kind: LineshapeKind, mix: Option<f64>, diags: &mut Vec<Diagnostic>) {
    match (kind, mix) {
        (LineshapeKind::PseudoVoigt, None) => diags.push(Diagnostic::new("physics.mix", "required for pseudo_voigt")),
        (LineshapeKind::PseudoVoigt, Some(m)) if !(0.0..=1.0).contains(&m) => {
            diags.push(Diagnostic::new("physics.mix", format!("must lie in [0, 1], got {m}")))
        }
        (LineshapeKind::PseudoVoigt, Some(_)) | (_, None) => {}
        (_, Some(_)) => diags.push(Diagnostic::new("physics.mix", "only used by pseudo_voigt")),
    }
}

fn check_vector(v: &[f64; 3], path: &str, diags: &mut Vec<Diagnostic>) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n.is_finite() && n > 0.0) {
        diags.push(Diagnostic::new(path, "must be a finite non-zero vector"));
    }
}

fn check_principal(g: &[f64; 3], path: &str, diags: &mut Vec<Diagnostic>) {
    if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        diags.push(Diagnostic::new(path, format!("principal values must be >= 0, got {g:?}")));
    }
}

fn check_physics(p: &Physics, sigma_rel: f64, diags: &mut Vec<Diagnostic>) {
    match p {
        Physics::Ple(p) => {
            check_core(p.optical.validate(), "physics.optical", diags);
            check_nonneg(p.field_mt, "physics.field_mT", diags);
            check_positive(p.spin_temperature_k, "physics.spin_temperature_K", diags);
            check_mix(p.lineshape, p.mix, diags);
        }
        Physics::Powder(p) => {
            check_principal(&p.g_principal, "physics.g_principal", diags);
            check_positive(p.mw_ghz, "physics.mw_GHz", diags);
            check_positive(p.linewidth_mt, "physics.linewidth_mT", diags);
            check_mix(p.lineshape, p.mix, diags);
            if p.orientations < spinphoton_core::spectra::MIN_ORIENTATIONS {
                diags.push(Diagnostic::new(
                    "physics.orientations",
                    format!("must be >= {}, got {}", spinphoton_core::spectra::MIN_ORIENTATIONS, p.orientations),
                ));
            }
        }
        Physics::Edfs(p) => {
            check_principal(&p.g_principal, "physics.g_principal", diags);
            check_vector(&p.field_direction, "physics.field_direction", diags);
            check_positive(p.mw_ghz, "physics.mw_GHz", diags);
            check_positive(p.linewidth_mt, "physics.linewidth_mT", diags);
            check_mix(p.lineshape, p.mix, diags);
            check_core(p.hyperfine.validate(), "physics.hyperfine", diags);
        }
        Physics::Holes(p) => {
            check_core(p.optical.validate(), "physics.optical", diags);
            check_nonneg(p.field_mt, "physics.field_mT", diags);
        }
        Physics::HoleMap(p) => {
            check_core(p.optical.validate(), "physics.optical", diags);
            check_grid(&p.fields_mt, "physics.fields_mT", diags);
            check_nonneg(p.fields_mt.start, "physics.fields_mT.start", diags);
            if let Some(t) = p.ridge_threshold {
                check_positive(t, "physics.ridge_threshold", diags);
            }
        }
        Physics::PumpTrace(p) => {
            check_core(p.optical.validate(), "physics.optical", diags);
            check_nonneg(p.field_mt, "physics.field_mT", diags);
            check_nonneg(p.pump.pump_rate, "physics.pump.pump_rate", diags);
            check_nonneg(p.pump.spin_relax_ground, "physics.pump.spin_relax_ground", diags);
            check_nonneg(p.pump.spin_relax_excited, "physics.pump.spin_relax_excited", diags);
            check_positive(p.pump.spin_temperature_k, "physics.pump.spin_temperature_k", diags);
            if !(0.0..=1.0).contains(&p.pump.branching) {
                diags.push(Diagnostic::new("physics.pump.branching", format!("must lie in [0, 1], got {}", p.pump.branching)));
            }
        }
        Physics::Rabi(p) => {
            check_core(p.pulsed.validate(), "physics.pulsed", diags);
            check_nonneg(p.power_ratio, "physics.power_ratio", diags);
        }
        Physics::Echo(p) => check_core(p.pulsed.validate(), "physics.pulsed", diags),
        Physics::Recovery(p) => {
            check_core(p.pulsed.validate(), "physics.pulsed", diags);
            if !p.m_inf.is_finite() {
                diags.push(Diagnostic::new("physics.m_inf", "must be finite"));
            }
        }
        Physics::AngleSweep(p) => {
            check_principal(&p.ground_principal, "physics.ground_principal", diags);
            check_principal(&p.excited_principal, "physics.excited_principal", diags);
            check_vector(&p.relation.axis, "physics.relation.axis", diags);
            if let Some(o) = &p.site_orientation {
                check_vector(&o.axis, "physics.site_orientation.axis", diags);
            }
            check_vector(&p.plane.normal, "physics.plane.normal", diags);
            check_vector(&p.plane.reference, "physics.plane.reference", diags);
            check_nonneg(p.field_mt, "physics.field_mT", diags);
        }
        Physics::Boltzmann(p) => {
            check_nonneg(p.g, "physics.g", diags);
            check_nonneg(p.field_mt, "physics.field_mT", diags);
            match (p.temperature_k, p.ratio) {
                (Some(t), None) => check_positive(t, "physics.temperature_K", diags),
                (None, Some(r)) => check_positive(r, "physics.ratio", diags),
                _ => diags.push(Diagnostic::new("physics", "give exactly one of `temperature_K` or `ratio`")),
            }
            if sigma_rel > 0.0 {
                diags.push(Diagnostic::new("noise.sigma_rel", "scenario `boltzmann` produces no samples to add noise to"));
            }
        }
        Physics::FitPeaks(p) => {
            if p.n_peaks == 0 {
                diags.push(Diagnostic::new("physics.n_peaks", "must be >= 1"));
            }
            if let Some(m) = &p.initial {
                check_core(m.validate(), "physics.initial", diags);
                if m.shape != p.lineshape {
                    diags.push(Diagnostic::new("physics.initial.shape", "must match physics.lineshape"));
                }
                if m.peaks.len() != p.n_peaks {
                    diags.push(Diagnostic::new(
                        "physics.initial.peaks",
                        format!("has {} peaks but n_peaks is {}", m.peaks.len(), p.n_peaks),
                    ));
                }
            }
        }
        Physics::FitG(p) => {
            match (p.spectra.is_empty(), p.transitions.is_empty()) {
                (false, false) | (true, true) => {
                    diags.push(Diagnostic::new("physics", "give exactly one of `spectra` or `transitions`"))
                }
                _ => {}
            }
            let mut fields: Vec<f64> =
                p.spectra.iter().map(|s| s.field_mt).chain(p.transitions.iter().map(|t| t.field_mt)).collect();
            fields.sort_by(f64::total_cmp);
            fields.dedup();
            if fields.len() < 2 {
                diags.push(Diagnostic::new("physics", "need at least 2 distinct fields"));
            }
            if !p.transitions.is_empty() && sigma_rel > 0.0 {
                diags.push(Diagnostic::new("noise.sigma_rel", "noise applies to spectra, not to given transition frequencies"));
            }
        }
        Physics::FitDecay(p) => {
            if p.eseem.is_some() && p.model != DecayModel::Decay {
                diags.push(Diagnostic::new("physics.eseem", "ESEEM extraction needs model `decay`"));
            }
        }
    }
}
