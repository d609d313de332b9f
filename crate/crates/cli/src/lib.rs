//! Batch front end: parse a scenario config, run it, write the output and a
//! provenance manifest.

pub mod config;
pub mod error;
pub mod manifest;
pub mod noise;
pub mod run;

use std::path::{Path, PathBuf};

use config::{OutputFormat, ScenarioConfig};
use error::{CliError, Diagnostic};
use manifest::{manifest_path, sha256_hex, RunManifest};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "SPINPHOTON_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Fit,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Fit => "fit",
        }
    }
}

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Completed {
    pub output: PathBuf,
    pub manifest: PathBuf,
    pub warnings: Vec<String>,
}

fn config_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

type Parsed = Result<ScenarioConfig, Vec<Diagnostic>>;

/// Reads a config file and returns its raw bytes with the parse outcome.
fn read_config(path: &Path) -> Result<(Vec<u8>, Parsed), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let parsed = match std::str::from_utf8(&bytes) {
        Ok(text) => ScenarioConfig::parse(text),
        Err(e) => Err(vec![Diagnostic::new("$", format!("config is not UTF-8: {e}"))]),
    };
    Ok((bytes, parsed))
}

/// Every schema violation in the file; empty when the config is valid.
pub fn validate_file(path: &Path) -> Result<Vec<Diagnostic>, CliError> {
    Ok(read_config(path)?.1.err().unwrap_or_default())
}

fn output_path(cfg: &ScenarioConfig, config_path: &Path, format: OutputFormat, o: &Overrides) -> PathBuf {
    if let Some(p) = &o.output {
        return p.clone();
    }
    let base = o.output_dir.clone().unwrap_or_else(|| config_dir(config_path));
    match &cfg.output.path {
        Some(p) => {
            // A format override also swaps a conventional extension.
            let p = match p.extension().and_then(|e| e.to_str()) {
                Some("csv" | "json") => p.with_extension(format.extension()),
                _ => p.clone(),
            };
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        }
        None => {
            let stem = config_path.file_stem().map_or_else(|| "output".into(), |s| s.to_string_lossy().into_owned());
            base.join(format!("{stem}.{}", format.extension()))
        }
    }
}

/// Runs the config at `path` and writes the output plus its manifest.
pub fn run_file(mode: Mode, path: &Path, o: &Overrides) -> Result<Completed, CliError> {
    let (bytes, parsed) = read_config(path)?;
    let mut cfg = parsed.map_err(CliError::Schema)?;
    match (mode, cfg.scenario.is_fit()) {
        (Mode::Simulate, true) => {
            return Err(CliError::schema("scenario", format!("`{}` is a fit scenario; use `fit`", cfg.scenario.name())))
        }
        (Mode::Fit, false) => {
            return Err(CliError::schema(
                "scenario",
                format!("`{}` is a simulation scenario; use `simulate`", cfg.scenario.name()),
            ))
        }
        _ => {}
    }
    if let Some(seed) = o.seed {
        cfg.noise.seed = seed;
    }
    let format = o.format.unwrap_or(cfg.output.format);
    let out = run::execute(&cfg, format, &config_dir(path))?;
    let output = output_path(&cfg, path, format, o);
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&output, &out.body).map_err(|e| CliError::io(&output, e))?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: mode.name().to_string(),
        scenario: cfg.scenario.name(),
        config_path: path.to_path_buf(),
        config_sha256: sha256_hex(&bytes),
        inputs: out.inputs,
        output_path: output.clone(),
        format: format.extension().to_string(),
        noise: RunManifest::noise(cfg.noise.seed, cfg.noise.sigma_rel),
        timestamp: RunManifest::now(),
    };
    let mpath = manifest_path(&output);
    std::fs::write(&mpath, manifest.to_json()).map_err(|e| CliError::io(&mpath, e))?;
    Ok(Completed { output, manifest: mpath, warnings: out.warnings })
}
