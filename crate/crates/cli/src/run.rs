//! Scenario dispatch: turns a validated config into rendered output text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::{Unit, UnitQuaternion, Vector3};
use serde_json::json;

use spinphoton_core::dynamics::{
    hahn_echo_trace, inversion_recovery_trace, pl_time_trace, rabi_trace, RateModel,
};
use spinphoton_core::fitting::{
    fit_damped_cosine, fit_eseem_frequencies, fit_exponential, fit_gfactors, fit_peaks, initial_peak_guess,
    label_sorted_centers, Envelope, ExponentialKind, FieldTransitions, FitResult, Polarity,
};
use spinphoton_core::holeburn::{hole_field_map_with, hole_pattern_with, render_hole_spectrum};
use spinphoton_core::model::{boltzmann_populations, spin_temperature_from_ratio, zeeman_frequency, GTensor};
use spinphoton_core::spectra::{
    angle_sweep_cd_splitting, edfs_spectrum, ple_spectrum, powder_absorption, powder_esr_spectrum, Grid,
    LineshapeKind, LineshapeSpec, RotationPlane, Spectrum, TwoSiteSystem,
};

use crate::config::{
    AxisAngle, DecayModel, FitDecayPhysics, FitGPhysics, FitPeaksPhysics, GridSpec, OutputFormat, Physics,
    ScenarioConfig,
};
use crate::error::{from_core, CliError};
use crate::noise::add_noise;

/// Rendered output of one scenario.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub body: String,
    /// Data files read by fit scenarios, as resolved.
    pub inputs: Vec<PathBuf>,
    /// Non-fatal problems worth telling the user about.
    pub warnings: Vec<String>,
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    base_dir: &'a Path,
    format: OutputFormat,
    inputs: Vec<PathBuf>,
    warnings: Vec<String>,
}

type Res<T> = Result<T, CliError>;

fn core<T>(r: spinphoton_core::Result<T>, path: &str) -> Res<T> {
    r.map_err(|e| from_core(e, path))
}

fn grid(spec: &GridSpec, path: &str) -> Res<Grid> {
    core(Grid::new(spec.start, spec.stop, spec.n), path)
}

fn unit(v: [f64; 3]) -> Vector3<f64> {
    Vector3::from(v).normalize()
}

fn rotation(a: &AxisAngle) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Unit::new_normalize(Vector3::from(a.axis)), a.angle_deg.to_radians())
}

fn line(kind: LineshapeKind, fwhm: f64, mix: Option<f64>) -> LineshapeSpec {
    LineshapeSpec { kind, fwhm, mix: mix.unwrap_or(0.0) }
}

/// Runs `cfg`, resolving relative input paths against `base_dir`.
pub fn execute(cfg: &ScenarioConfig, format: OutputFormat, base_dir: &Path) -> Res<RunOutput> {
    let mut ctx = Ctx { cfg, base_dir, format, inputs: Vec::new(), warnings: Vec::new() };
    let body = ctx.dispatch()?;
    Ok(RunOutput { body, inputs: ctx.inputs, warnings: ctx.warnings })
}

impl Ctx<'_> {
    fn grid(&self) -> Res<Grid> {
        let spec = self.cfg.grid.as_ref().ok_or_else(|| CliError::schema("grid", "missing"))?;
        grid(spec, "grid")
    }

    fn noisy(&self, mut s: Spectrum) -> Spectrum {
        self.noisy_seeded(&mut s, 0);
        s
    }

    /// Noise for the `k`-th data set of a run uses `seed + k`.
    fn noisy_seeded(&self, s: &mut Spectrum, k: u64) {
        let n = self.cfg.noise;
        if n.sigma_rel > 0.0 {
            add_noise(&mut [&mut s.intensity], n.sigma_rel, n.seed.wrapping_add(k));
            s.meta.insert("noise_sigma_rel".into(), n.sigma_rel.to_string());
            s.meta.insert("noise_seed".into(), n.seed.wrapping_add(k).to_string());
        }
    }

    fn spectrum_out(&self, s: &Spectrum) -> Res<String> {
        match self.format {
            OutputFormat::Csv => Ok(s.to_csv()),
            OutputFormat::Json => core(s.to_json(), "output").map(|t| t + "\n"),
        }
    }

    fn load(&mut self, path: &Path, pointer: &str) -> Res<Spectrum> {
        let full = if path.is_absolute() { path.to_path_buf() } else { self.base_dir.join(path) };
        let text = std::fs::read_to_string(&full).map_err(|e| CliError::io(&full, e))?;
        let parsed = if full.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Spectrum::from_json(&text)
        } else {
            Spectrum::from_csv(&text)
        };
        let s = parsed.map_err(|e| CliError::io(&full, format!("{pointer}: {e}")))?;
        self.inputs.push(full);
        Ok(s)
    }

    fn dispatch(&mut self) -> Res<String> {
        let cfg = self.cfg;
        match &cfg.physics {
            Physics::Ple(p) => {
                let s = core(
                    ple_spectrum(
                        &p.optical,
                        p.field_mt * 1e-3,
                        p.spin_temperature_k,
                        &line(p.lineshape, 1.0, p.mix),
                        &self.grid()?,
                    ),
                    "physics",
                )?;
                if let Some(w) = s.meta.get("warning") {
                    self.warnings.push(w.clone());
                }
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Powder(p) => {
                let g = core(GTensor::aligned(p.g_principal), "physics.g_principal")?;
                let l = line(p.lineshape, p.linewidth_mt, p.mix);
                let grid = self.grid()?;
                let s = if p.derivative {
                    powder_esr_spectrum(&g, p.mw_ghz, &l, &grid, p.orientations)
                } else {
                    powder_absorption(&g, p.mw_ghz, &l, &grid, p.orientations)
                };
                let s = core(s, "physics")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Edfs(p) => {
                let g = core(GTensor::aligned(p.g_principal), "physics.g_principal")?;
                let s = core(
                    edfs_spectrum(
                        &g,
                        &unit(p.field_direction),
                        p.mw_ghz,
                        &p.hyperfine,
                        &line(p.lineshape, p.linewidth_mt, p.mix),
                        &self.grid()?,
                    ),
                    "physics",
                )?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Holes(p) => {
                let pattern = core(hole_pattern_with(&p.optical, p.field_mt * 1e-3, p.regime, &p.presentation), "physics")?;
                let s = core(render_hole_spectrum(&pattern, &self.grid()?), "grid")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::HoleMap(p) => {
                let fields = grid(&p.fields_mt, "physics.fields_mT")?.to_vec();
                let mut map =
                    core(hole_field_map_with(&p.optical, &fields, p.regime, &self.grid()?, &p.presentation), "physics")?;
                {
                    let mut rows: Vec<&mut [f64]> = map.rows.iter_mut().map(|r| r.as_mut_slice()).collect();
                    add_noise(&mut rows, cfg.noise.sigma_rel, cfg.noise.seed);
                }
                let ridges = match p.ridge_threshold {
                    Some(t) => core(map.track_ridges(t), "physics.ridge_threshold")?,
                    None => Vec::new(),
                };
                match self.format {
                    OutputFormat::Csv => {
                        let mut out = String::new();
                        for (k, r) in ridges.iter().enumerate() {
                            let sign = serde_json::to_value(r.sign).expect("sign serializes");
                            let _ = writeln!(
                                out,
                                "# ridge_{k}: slope_MHz_per_mT={} sign={} rows={}",
                                r.slope,
                                sign.as_str().unwrap_or_default(),
                                r.points.len()
                            );
                        }
                        Ok(out + &map.to_csv())
                    }
                    OutputFormat::Json => {
                        let ridges: Vec<_> = ridges
                            .iter()
                            .map(|r| json!({"slope_MHz_per_mT": r.slope, "sign": r.sign, "points": r.points}))
                            .collect();
                        Ok(pretty(&json!({"map": map, "ridges": ridges})))
                    }
                }
            }
            Physics::PumpTrace(p) => {
                let model = core(RateModel::for_system(&p.optical, p.field_mt * 1e-3, p.transition, &p.pump), "physics")?;
                let s = core(pl_time_trace(&model, &self.grid()?), "physics")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Rabi(p) => {
                let s = core(rabi_trace(&p.pulsed, p.power_ratio, &self.grid()?), "physics")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Echo(p) => {
                let s = core(hahn_echo_trace(&p.pulsed, &self.grid()?), "physics")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::Recovery(p) => {
                let s = core(inversion_recovery_trace(&p.pulsed, p.m_inf, &self.grid()?), "physics")?;
                self.spectrum_out(&self.noisy(s))
            }
            Physics::AngleSweep(p) => {
                let orient = p.site_orientation.as_ref().map_or_else(UnitQuaternion::identity, rotation);
                let sites = TwoSiteSystem {
                    ground: core(GTensor::new(p.ground_principal, orient), "physics.ground_principal")?,
                    excited: core(GTensor::new(p.excited_principal, orient), "physics.excited_principal")?,
                    relation: rotation(&p.relation),
                };
                let plane = core(RotationPlane::new(unit(p.plane.normal), unit(p.plane.reference)), "physics.plane")?;
                let (mut a, mut b) = core(angle_sweep_cd_splitting(&sites, p.field_mt * 1e-3, &plane, &self.grid()?), "physics")?;
                add_noise(&mut [&mut a.intensity, &mut b.intensity], cfg.noise.sigma_rel, cfg.noise.seed);
                match self.format {
                    OutputFormat::Csv => {
                        let mut out = String::from("# model: angle_sweep_cd_splitting\n# unit: GHz\n");
                        out.push_str("angle_deg,site_a,site_b\n");
                        for ((x, ya), yb) in a.grid.points().zip(&a.intensity).zip(&b.intensity) {
                            let _ = writeln!(out, "{x},{ya},{yb}");
                        }
                        Ok(out)
                    }
                    OutputFormat::Json => Ok(pretty(&json!({"site_a": a, "site_b": b}))),
                }
            }
            Physics::Boltzmann(p) => {
                let splitting = core(zeeman_frequency(p.g, p.field_mt * 1e-3), "physics")?;
                let (t, pops) = match (p.temperature_k, p.ratio) {
                    (Some(t), _) => (t, core(boltzmann_populations(splitting, t), "physics.temperature_K")?),
                    (None, Some(r)) => {
                        let t = core(spin_temperature_from_ratio(r, splitting), "physics.ratio")?;
                        (t, core(boltzmann_populations(splitting, t), "physics.ratio")?)
                    }
                    (None, None) => return Err(CliError::schema("physics", "give `temperature_K` or `ratio`")),
                };
                let rows = [
                    ("splitting_GHz", splitting),
                    ("temperature_K", t),
                    ("lower", pops.lower),
                    ("upper", pops.upper),
                    ("ratio", pops.ratio()),
                ];
                match self.format {
                    OutputFormat::Csv => {
                        let mut out = String::from("# model: boltzmann\nquantity,value\n");
                        for (k, v) in rows {
                            let _ = writeln!(out, "{k},{v}");
                        }
                        Ok(out)
                    }
                    OutputFormat::Json => {
                        let map: serde_json::Map<String, serde_json::Value> =
                            rows.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
                        Ok(pretty(&serde_json::Value::Object(map)))
                    }
                }
            }
            Physics::FitPeaks(p) => self.fit_peaks(p),
            Physics::FitG(p) => self.fit_g(p),
            Physics::FitDecay(p) => self.fit_decay(p),
        }
    }

    fn check_fit(&mut self, r: &FitResult, what: &str) -> Res<()> {
        if r.parameters.iter().any(|p| !p.value.is_finite()) {
            return Err(CliError::Numerical(format!("{what}: fit produced non-finite parameters")));
        }
        if !r.converged {
            let why = r.message.clone().unwrap_or_else(|| "did not converge".into());
            self.warnings.push(format!("{what}: {why}"));
        }
        Ok(())
    }

    fn fit_peaks(&mut self, p: &FitPeaksPhysics) -> Res<String> {
        let mut s = self.load(&p.input, "physics.input")?;
        self.noisy_seeded(&mut s, 0);
        let initial = match &p.initial {
            Some(m) => m.clone(),
            None => core(initial_peak_guess(&s, p.n_peaks, p.lineshape, p.polarity), "physics")?,
        };
        let fit = core(fit_peaks(&s, &initial), "physics.initial")?;
        self.check_fit(&fit.result, "fit_peaks")?;
        let result = fit.result.clone().with_provenance("input", p.input.display());
        match self.format {
            OutputFormat::Csv => Ok(fit_csv("fit_peaks", &result, &[])),
            OutputFormat::Json => Ok(pretty(&json!({"fit": result, "model": fit.model}))),
        }
    }

    fn fit_g(&mut self, p: &FitGPhysics) -> Res<String> {
        let mut data = Vec::new();
        let mut peak_fits = Vec::new();
        for (k, item) in p.spectra.iter().enumerate() {
            let pointer = format!("physics.spectra[{k}].input");
            let mut s = self.load(&item.input, &pointer)?;
            self.noisy_seeded(&mut s, k as u64);
            let guess = core(initial_peak_guess(&s, 4, p.lineshape, Polarity::Peaks), &pointer)?;
            let fit = core(fit_peaks(&s, &guess), &pointer)?;
            self.check_fit(&fit.result, &pointer)?;
            let mut order: Vec<usize> = (0..4).collect();
            order.sort_by(|&a, &b| fit.model.peaks[a].center.total_cmp(&fit.model.peaks[b].center));
            let centers = [0, 1, 2, 3].map(|j| fit.model.peaks[order[j]].center);
            let sigmas = [0, 1, 2, 3].map(|j| fit.result.parameters[3 * order[j]].sigma);
            data.push(FieldTransitions {
                field_t: item.field_mt * 1e-3,
                centers_ghz: label_sorted_centers(centers),
                sigmas_ghz: sigmas.iter().all(|s| s.is_finite() && *s > 0.0).then(|| label_sorted_centers(sigmas)),
            });
            peak_fits.push(json!({"field_mT": item.field_mt, "input": item.input, "model": fit.model}));
        }
        for t in &p.transitions {
            data.push(FieldTransitions { field_t: t.field_mt * 1e-3, centers_ghz: t.centers_ghz, sigmas_ghz: t.sigmas_ghz });
        }
        let g = core(fit_gfactors(&data), "physics")?;
        match self.format {
            OutputFormat::Csv => {
                let rows = [
                    ("g_ground", g.g_ground, g.sigma_ground),
                    ("g_excited", g.g_excited, g.sigma_excited),
                    ("slope_conserving_GHz_per_T", g.slope_conserving, g.sigma_slope_conserving),
                    ("slope_flip_GHz_per_T", g.slope_flip, g.sigma_slope_flip),
                ];
                let mut out = format!("# model: fit_g\n# fields: {}\nname,value,sigma\n", data.len());
                for (k, v, s) in rows {
                    let _ = writeln!(out, "{k},{v},{s}");
                }
                Ok(out)
            }
            OutputFormat::Json => Ok(pretty(&json!({"g": g, "transitions": data, "peak_fits": peak_fits}))),
        }
    }

    fn fit_decay(&mut self, p: &FitDecayPhysics) -> Res<String> {
        let mut s = self.load(&p.input, "physics.input")?;
        self.noisy_seeded(&mut s, 0);
        let result = match p.model {
            DecayModel::Decay => fit_exponential(&s, ExponentialKind::Decay),
            DecayModel::InversionRecovery => fit_exponential(&s, ExponentialKind::InversionRecovery),
            DecayModel::DampedCosine => fit_damped_cosine(&s),
        };
        let result = core(result, "physics.input")?;
        self.check_fit(&result, "fit_decay")?;
        let eseem = match (&p.eseem, Envelope::from_fit(&result)) {
            (Some(opts), Some(env)) => Some(fit_eseem_frequencies(&s, &env, opts)),
            (Some(_), None) => {
                self.warnings.push("fit_decay: no usable envelope for ESEEM extraction".into());
                Some(Vec::new())
            }
            (None, _) => None,
        };
        let result = result.with_provenance("input", p.input.display());
        match self.format {
            OutputFormat::Csv => Ok(fit_csv("fit_decay", &result, eseem.as_deref().unwrap_or_default())),
            OutputFormat::Json => {
                let mut v = json!({"fit": result});
                if let Some(f) = eseem {
                    v["eseem_MHz"] = json!(f);
                }
                Ok(pretty(&v))
            }
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

/// `#` summary lines, then `name,value,sigma` rows.
fn fit_csv(model: &str, r: &FitResult, eseem_mhz: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# model: {model}");
    let _ = writeln!(out, "# converged: {}", r.converged);
    let _ = writeln!(out, "# n_iter: {}", r.n_iter);
    let _ = writeln!(out, "# residual_norm: {}", r.residual_norm);
    let _ = writeln!(out, "# initial_residual_norm: {}", r.initial_residual_norm);
    if let Some(m) = &r.message {
        let _ = writeln!(out, "# message: {m}");
    }
    for (k, v) in &r.provenance {
        let _ = writeln!(out, "# {k}: {v}");
    }
    if !eseem_mhz.is_empty() {
        let list: Vec<String> = eseem_mhz.iter().map(f64::to_string).collect();
        let _ = writeln!(out, "# eseem_MHz: {}", list.join(" "));
    }
    out.push_str("name,value,sigma\n");
    for p in &r.parameters {
        let _ = writeln!(out, "{},{},{}", p.name, p.value, p.sigma);
    }
    out
}
