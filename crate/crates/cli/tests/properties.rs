use proptest::prelude::*;
use serde_json::json;
use spinphoton_cli::config::ScenarioConfig;
use spinphoton_cli::noise::add_noise;

fn ple_config(start: f64, width: f64, n: usize, sigma: f64, seed: u64, field: f64, temp: f64) -> String {
    json!({
        "scenario": "ple",
        "physics": {
            "optical": {"g_ground": 10.8, "g_excited": 12.9, "f0_thz": 195.0,
                        "gamma_inh_mhz": 945.0, "gamma_hom_mhz": 10.9, "t_optical_us": 8.66},
            "field_mT": field,
            "spin_temperature_K": temp,
            "lineshape": "pseudo_voigt",
            "mix": 0.3
        },
        "grid": {"start": start, "stop": start + width, "n": n},
        "noise": {"sigma_rel": sigma, "seed": seed},
        "output": {"format": "json"}
    })
    .to_string()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parse_serialize_parse_is_identity(
        start in -1e3f64..1e3,
        width in 1e-3f64..1e3,
        n in 2usize..100_000,
        sigma in 0.0f64..1.0,
        seed in any::<u64>(),
        field in 0.0f64..1e3,
        temp in 1e-3f64..300.0,
    ) {
        let a = ScenarioConfig::parse(&ple_config(start, width, n, sigma, seed, field, temp)).unwrap();
        let b = ScenarioConfig::parse(&a.to_json()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn noise_is_a_function_of_seed_grid_and_sigma(
        n in 1usize..500,
        sigma in 1e-6f64..1.0,
        seed in any::<u64>(),
        level in -10.0f64..10.0,
    ) {
        let mut a = vec![level; n];
        let mut b = vec![level; n];
        add_noise(&mut [&mut a], sigma, seed);
        add_noise(&mut [&mut b], sigma, seed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn negative_sigma_is_always_rejected(sigma in -1e3f64..-1e-12) {
        let d = ScenarioConfig::parse(&ple_config(0.0, 1.0, 10, sigma, 0, 1.0, 1.0)).unwrap_err();
        prop_assert_eq!(d.len(), 1);
        prop_assert_eq!(d[0].path.as_str(), "noise.sigma_rel");
    }
}
