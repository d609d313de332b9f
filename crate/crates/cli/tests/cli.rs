use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spinphoton_cli::config::ScenarioConfig;
use spinphoton_cli::manifest::sha256_hex;
use spinphoton_core::model::{OpticalSystem, Transition};
use spinphoton_core::spectra::Spectrum;
use tempfile::TempDir;

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn example(name: &str) -> PathBuf {
    examples().join(name)
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spinphoton"));
    c.env_remove("SPINPHOTON_OUTPUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn mode_for(config: &Path) -> &'static str {
    let text = fs::read_to_string(config).unwrap();
    if ScenarioConfig::parse(&text).unwrap().scenario.is_fit() {
        "fit"
    } else {
        "simulate"
    }
}

fn example_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(examples())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn run_example(name: &str, dir: &Path) -> PathBuf {
    let cfg = example(name);
    let out = run(&[mode_for(&cfg), s(&cfg), "--quiet", "--output-dir", s(dir)]);
    assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&cfg).unwrap();
    let parsed = ScenarioConfig::parse(&text).unwrap();
    dir.join(parsed.output.path.unwrap())
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn load_example(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(example(name)).unwrap()).unwrap()
}

#[test]
fn every_example_runs_and_writes_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let configs = example_configs();
    assert!(configs.len() >= 20);
    for cfg in &configs {
        let name = cfg.file_name().unwrap().to_str().unwrap();
        let out = run_example(name, tmp.path());
        assert!(out.exists(), "{name}");
        let manifest: Value =
            serde_json::from_str(&fs::read_to_string(format!("{}.manifest.json", out.display())).unwrap()).unwrap();
        assert_eq!(manifest["config_sha256"], sha256_hex(&fs::read(cfg).unwrap()));
    }
}

#[test]
fn shipped_data_files_are_reproducible() {
    let tmp = TempDir::new().unwrap();
    for cfg in example_configs() {
        let v: Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
        let Some(path) = v["output"]["path"].as_str().filter(|p| p.starts_with("data/")) else { continue };
        let name = cfg.file_name().unwrap().to_str().unwrap();
        let fresh = run_example(name, tmp.path());
        assert_eq!(fs::read(&fresh).unwrap(), fs::read(examples().join(path)).unwrap(), "{path} drifted");
    }
}

#[test]
fn ple_peak_separations_match_transition_frequencies() {
    let tmp = TempDir::new().unwrap();
    let out = run_example("fig3a_ple_4K.json", tmp.path());
    let spec = Spectrum::from_csv(&fs::read_to_string(out).unwrap()).unwrap();
    let x = spec.axis();
    let y = &spec.intensity;
    let h = spec.step();
    let mut peaks: Vec<f64> = (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .map(|i| {
            let d = y[i - 1] - 2.0 * y[i] + y[i + 1];
            x[i] + 0.5 * h * (y[i - 1] - y[i + 1]) / d
        })
        .collect();
    peaks.sort_by(f64::total_cmp);
    assert_eq!(peaks.len(), 4, "{peaks:?}");

    let cfg = load_example("fig3a_ple_4K.json");
    let sys: OpticalSystem = serde_json::from_value(cfg["physics"]["optical"].clone()).unwrap();
    let f = sys.transition_frequencies(cfg["physics"]["field_mT"].as_f64().unwrap() * 1e-3).unwrap();
    let mut expected: Vec<f64> = Transition::ALL.iter().map(|t| f.offset_ghz(*t)).collect();
    expected.sort_by(f64::total_cmp);
    for k in 1..4 {
        let got = peaks[k] - peaks[k - 1];
        let want = expected[k] - expected[k - 1];
        assert!((got - want).abs() < 0.02, "separation {k}: {got} vs {want}");
    }
}

#[test]
fn noiseless_output_ignores_the_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = example("fig2a_powder.json");
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    for (p, seed) in [(&a, "1"), (&b, "2")] {
        assert!(run(&["simulate", s(&cfg), "-q", "--output", s(p), "--seed", seed]).status.success());
    }
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn noisy_output_follows_the_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = example("fig3c_ple_050mT.json");
    let a = tmp.path().join("a.csv");
    let b = tmp.path().join("b.csv");
    assert!(run(&["simulate", s(&cfg), "-q", "--output", s(&a)]).status.success());
    assert!(run(&["simulate", s(&cfg), "-q", "--output", s(&b), "--seed", "7"]).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let m: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("b.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["noise"]["seed"], 7);
}

#[test]
fn reruns_are_byte_identical_apart_from_the_timestamp() {
    let tmp = TempDir::new().unwrap();
    for name in ["fig3c_ple_100mT.json", "fig3d_fit_g.json", "fig4f_angle_sweep.json"] {
        let cfg = example(name);
        let mode = mode_for(&cfg);
        let a = tmp.path().join(format!("{name}.a"));
        let b = tmp.path().join(format!("{name}.b"));
        assert!(run(&[mode, s(&cfg), "-q", "--output", s(&a)]).status.success());
        assert!(run(&[mode, s(&cfg), "-q", "--output", s(&b)]).status.success());
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{name}");
        let strip = |p: &Path| {
            let mut v: Value =
                serde_json::from_str(&fs::read_to_string(format!("{}.manifest.json", p.display())).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("timestamp");
            v.as_object_mut().unwrap().remove("output_path");
            v
        };
        assert_eq!(strip(&a), strip(&b), "{name}");
    }
}

#[test]
fn g_factor_fit_from_shipped_spectra() {
    let tmp = TempDir::new().unwrap();
    let out = run_example("fig3d_fit_g.json", tmp.path());
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let gg = v["g"]["g_ground"].as_f64().unwrap();
    let ge = v["g"]["g_excited"].as_f64().unwrap();
    assert!((gg - 10.8).abs() < 0.1 && (ge - 12.9).abs() < 0.1, "{gg} {ge}");
}

#[test]
fn hole_width_and_ridges_from_examples() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(run_example("fig4b_fit_hole.json", tmp.path())).unwrap();
    let fwhm: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("fwhm_0,"))
        .and_then(|r| r.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((fwhm / 10.9 - 1.0).abs() < 0.02, "{fwhm}");

    let map = fs::read_to_string(run_example("fig4c_hole_map.json", tmp.path())).unwrap();
    let slopes: Vec<f64> = map
        .lines()
        .filter_map(|l| l.strip_prefix("# ridge_"))
        .map(|l| l.split("slope_MHz_per_mT=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(slopes.len(), 3);
    for (s, e) in slopes.iter().zip([29.4, 151.2, 180.6]) {
        assert!((s / e - 1.0).abs() < 0.01, "{s} vs {e}");
    }
}

#[test]
fn eseem_example_resolves_both_nuclei() {
    let tmp = TempDir::new().unwrap();
    let v: Value = serde_json::from_str(&fs::read_to_string(run_example("fit_eseem_270mT.json", tmp.path())).unwrap()).unwrap();
    let f: Vec<f64> = v["eseem_MHz"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(f.len(), 2, "{f:?}");
    assert!((f[0] - 10.81).abs() < 0.2 && (f[1] - 11.50).abs() < 0.2, "{f:?}");
}

#[test]
fn validate_reports_diagnostics() {
    let tmp = TempDir::new().unwrap();
    let ok = run(&["validate", s(&example("fig3a_ple_4K.json"))]);
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["diagnostics"].as_array().unwrap().len(), 0);

    let mut cfg = load_example("fig3a_ple_4K.json");
    cfg["grid"]["n"] = 1.into();
    let bad = run(&["validate", s(&write_config(tmp.path(), "n1.json", &cfg))]);
    assert_eq!(bad.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    let d = v["diagnostics"].as_array().unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0]["path"], "grid.n");

    let mut cfg = load_example("fig2a_powder.json");
    cfg["physics"]["gx_guess"] = 1.0.into();
    let bad = run(&["validate", s(&write_config(tmp.path(), "gx.json", &cfg))]);
    let v: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(v["diagnostics"][0]["path"], "physics.gx_guess");
    assert_eq!(v["diagnostics"][0]["message"], "unknown field");
}

#[test]
fn examples_round_trip() {
    for cfg in example_configs() {
        let a = ScenarioConfig::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
        let b = ScenarioConfig::parse(&a.to_json()).unwrap();
        assert_eq!(a, b, "{}", cfg.display());
    }
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn exit_codes_and_error_json() {
    let tmp = TempDir::new().unwrap();

    let mut cfg = load_example("fig2a_powder.json");
    cfg["noise"] = serde_json::json!({"sigma_rel": -0.5, "seed": 1});
    let out = run(&["simulate", s(&write_config(tmp.path(), "neg.json", &cfg))]);
    assert_eq!(out.status.code(), Some(2));
    let e = stderr_json(&out);
    assert_eq!(e["error"]["kind"], "schema");
    assert_eq!(e["error"]["diagnostics"][0]["path"], "noise.sigma_rel");

    let out = run(&["simulate", s(&example("fig3d_fit_g.json"))]);
    assert_eq!(out.status.code(), Some(2));

    let flat = tmp.path().join("flat.csv");
    fs::write(&flat, "time_ns,intensity\n0,1\n1,1\n2,1\n3,1\n4,1\n5,1\n").unwrap();
    let cfg = serde_json::json!({
        "scenario": "fit_decay",
        "physics": {"input": "flat.csv", "model": "decay"},
        "output": {"format": "csv"}
    });
    let out = run(&["fit", s(&write_config(tmp.path(), "flat.json", &cfg))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stderr_json(&out)["error"]["kind"], "numerical");

    let cfg = serde_json::json!({
        "scenario": "fit_decay",
        "physics": {"input": "missing.csv", "model": "decay"},
        "output": {"format": "csv"}
    });
    let out = run(&["fit", s(&write_config(tmp.path(), "missing.json", &cfg))]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");

    let out = run(&["validate", s(&tmp.path().join("nope.json"))]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let out = bin()
        .args(["simulate", s(&example("thermometry.json")), "-q", "--format", "json"])
        .env("SPINPHOTON_OUTPUT_DIR", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written = tmp.path().join("out/thermometry.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(written).unwrap()).unwrap();
    assert!((v["ratio"].as_f64().unwrap() - 0.03).abs() < 1e-12);
}
