use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::model::{boltzmann_populations, zeeman_frequency, OpticalSystem, Spin, Transition};
use crate::spectra::{AxisKind, Grid, Spectrum};

/// Level order used by population vectors and rate matrices.
pub const LEVELS: [&str; 4] = ["down_g", "up_g", "down_e", "up_e"];

fn ground_index(s: Spin) -> usize {
    match s {
        Spin::Down => 0,
        Spin::Up => 1,
    }
}

fn excited_index(s: Spin) -> usize {
    match s {
        Spin::Down => 2,
        Spin::Up => 3,
    }
}

/// Four-level incoherent rate model: two ground and two excited spin
/// sub-levels, one optically pumped transition, spin-conserving and
/// spin-flipping optical decay, and spin relaxation in both manifolds obeying
/// detailed balance at `spin_temperature_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateModel {
    /// (↓g, ↑g, ↓e, ↑e), summing to 1.
    pub populations: [f64; 4],
    /// Stimulated rate (1/s), equal in both directions.
    pub pump_rate: f64,
    pub pump_transition: Transition,
    /// 1/s, the inverse optical lifetime.
    pub optical_decay_rate: f64,
    /// Probability that optical decay conserves the spin.
    pub branching: f64,
    /// Total ground-state spin relaxation rate (up + down), 1/s.
    pub spin_relax_ground: f64,
    /// Total excited-state spin relaxation rate (up + down), 1/s.
    pub spin_relax_excited: f64,
    pub spin_temperature_k: f64,
    pub ground_splitting_ghz: f64,
    pub excited_splitting_ghz: f64,
}

/// Rates shared by every pumping configuration of one optical system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PumpSettings {
    pub pump_rate: f64,
    pub branching: f64,
    pub spin_relax_ground: f64,
    pub spin_relax_excited: f64,
    pub spin_temperature_k: f64,
}

impl RateModel {
    /// Model for `sys` at `field_t`, pumping `transition`, starting from the
    /// thermal ground-state populations.
    pub fn for_system(sys: &OpticalSystem, field_t: f64, transition: Transition, s: &PumpSettings) -> Result<Self> {
        sys.validate()?;
        let ground = zeeman_frequency(sys.g_ground, field_t)?;
        let excited = zeeman_frequency(sys.g_excited, field_t)?;
        let pops = boltzmann_populations(ground, s.spin_temperature_k)?;
        let model = Self {
            populations: [pops.lower, pops.upper, 0.0, 0.0],
            pump_rate: s.pump_rate,
            pump_transition: transition,
            optical_decay_rate: sys.optical_decay_rate(),
            branching: s.branching,
            spin_relax_ground: s.spin_relax_ground,
            spin_relax_excited: s.spin_relax_excited,
            spin_temperature_k: s.spin_temperature_k,
            ground_splitting_ghz: ground,
            excited_splitting_ghz: excited,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.populations.iter().all(|p| p.is_finite() && *p >= 0.0), || {
            format!("populations must be >= 0, got {:?}", self.populations)
        })?;
        let sum: f64 = self.populations.iter().sum();
        ensure((sum - 1.0).abs() <= 1e-12, || format!("populations sum to {sum}, not 1"))?;
        for (name, r) in [
            ("pump_rate", self.pump_rate),
            ("optical_decay_rate", self.optical_decay_rate),
            ("spin_relax_ground", self.spin_relax_ground),
            ("spin_relax_excited", self.spin_relax_excited),
            ("ground_splitting_ghz", self.ground_splitting_ghz),
            ("excited_splitting_ghz", self.excited_splitting_ghz),
        ] {
            ensure(r.is_finite() && r >= 0.0, || format!("{name} must be >= 0, got {r}"))?;
        }
        ensure((0.0..=1.0).contains(&self.branching), || {
            format!("branching must lie in [0, 1], got {}", self.branching)
        })?;
        ensure(self.spin_temperature_k > 0.0, || "spin temperature must be > 0 K".into())
    }

    pub fn with_populations(mut self, p: [f64; 4]) -> Self {
        self.populations = p;
        self
    }

    /// Generator M of dp/dt = M p; `M[(i, j)]` is the rate from level j to i.
    pub fn rate_matrix(&self) -> Result<Matrix4<f64>> {
        let mut m = Matrix4::zeros();
        let mut add = |from: usize, to: usize, rate: f64| {
            m[(to, from)] += rate;
            m[(from, from)] -= rate;
        };
        let g = ground_index(self.pump_transition.ground());
        let e = excited_index(self.pump_transition.excited());
        add(g, e, self.pump_rate);
        add(e, g, self.pump_rate);

        let gamma = self.optical_decay_rate;
        let beta = self.branching;
        add(2, 0, gamma * beta);
        add(2, 1, gamma * (1.0 - beta));
        add(3, 1, gamma * beta);
        add(3, 0, gamma * (1.0 - beta));

        let pg = boltzmann_populations(self.ground_splitting_ghz, self.spin_temperature_k)?;
        add(0, 1, self.spin_relax_ground * pg.upper);
        add(1, 0, self.spin_relax_ground * pg.lower);
        let pe = boltzmann_populations(self.excited_splitting_ghz, self.spin_temperature_k)?;
        add(2, 3, self.spin_relax_excited * pe.upper);
        add(3, 2, self.spin_relax_excited * pe.lower);
        Ok(m)
    }

    /// Populations after `t_s` seconds.
    pub fn evolve(&self, t_s: f64) -> Result<[f64; 4]> {
        self.validate()?;
        let prop = propagator(&self.rate_matrix()?, t_s)?;
        Ok(apply(&prop, &self.populations))
    }

    /// Stationary populations of the rate matrix. Fails when the stationary
    /// state is not unique (disconnected level scheme).
    pub fn steady_state(&self) -> Result<[f64; 4]> {
        self.validate()?;
        let mut a = self.rate_matrix()?;
        let scale = a.abs().max().max(1.0);
        a /= scale;
        a.set_row(3, &nalgebra::RowVector4::repeat(1.0));
        let rhs = Vector4::new(0.0, 0.0, 0.0, 1.0);
        let lu = a.lu();
        let det = lu.determinant();
        if !det.is_finite() || det.abs() < 1e-14 {
            return Err(Error::Numerical("stationary state is not unique".into()));
        }
        let p = lu.solve(&rhs).ok_or_else(|| Error::Numerical("singular rate matrix".into()))?;
        Ok([p[0], p[1], p[2], p[3]])
    }

    /// Photoluminescence rate per molecule, Γ_opt · (p_↓e + p_↑e).
    pub fn pl_rate(&self, p: &[f64; 4]) -> f64 {
        self.optical_decay_rate * (p[2] + p[3])
    }
}

fn apply(m: &Matrix4<f64>, p: &[f64; 4]) -> [f64; 4] {
    let v = m * Vector4::from_column_slice(p);
    [v[0], v[1], v[2], v[3]]
}

/// exp(M t) for a rate generator M (non-negative off-diagonal, zero column
/// sums) by scaling and squaring around a uniformized series. With
/// q = max|M_ii| and P = I + M/q, exp(M τ) = e^{−qτ} Σ_k (qτ)^k/k! P^k has
/// only non-negative terms; τ = t/2^s keeps qτ ≤ 1/2 so the series converges
/// in a few terms. Columns are renormalized after every squaring.
pub fn propagator(m: &Matrix4<f64>, t_s: f64) -> Result<Matrix4<f64>> {
    ensure(t_s.is_finite() && t_s >= 0.0, || format!("time must be >= 0, got {t_s}"))?;
    let q = (0..4).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    if q == 0.0 || t_s == 0.0 {
        return Ok(Matrix4::identity());
    }
    let x = q * t_s;
    let squarings = if x > 0.5 { (x / 0.5).log2().ceil() as u32 } else { 0 };
    ensure(squarings < 1100, || "time step too large for the rate scale".into())?;
    let a = x / 2f64.powi(squarings as i32);
    let p = Matrix4::identity() + m / q;

    let mut sum = Matrix4::identity();
    let mut term = Matrix4::identity();
    for k in 1..40 {
        term = (p * term) * (a / k as f64);
        sum += term;
        if term.max() < 1e-20 {
            break;
        }
    }
    let mut e = sum * (-a).exp();
    normalize_columns(&mut e);
    for _ in 0..squarings {
        e = e * e;
        normalize_columns(&mut e);
    }
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite propagator".into()));
    }
    Ok(e)
}

fn normalize_columns(e: &mut Matrix4<f64>) {
    for mut col in e.column_iter_mut() {
        let s = col.sum();
        if s > 0.0 {
            col /= s;
        }
    }
}

/// PL rate sampled on a time grid in ns, starting from the model populations
/// at t = 0.
pub fn pl_time_trace(model: &RateModel, grid_ns: &Grid) -> Result<Spectrum> {
    model.validate()?;
    grid_ns.validate()?;
    ensure(grid_ns.start >= 0.0, || "time grid must start at t >= 0".into())?;
    let m = model.rate_matrix()?;
    let step = propagator(&m, grid_ns.step() * 1e-9)?;
    let mut p = apply(&propagator(&m, grid_ns.start * 1e-9)?, &model.populations);
    let mut y = Vec::with_capacity(grid_ns.n);
    for _ in 0..grid_ns.n {
        y.push(model.pl_rate(&p));
        p = apply(&step, &p);
    }
    Ok(Spectrum::new(AxisKind::TimeNs, *grid_ns, y)?
        .with_meta("model", "pl_time_trace")
        .with_meta("unit", "photons/s per molecule")
        .with_meta("pump_rate", model.pump_rate)
        .with_meta("pump_transition", model.pump_transition.label())
        .with_meta("spin_relax_ground", model.spin_relax_ground)
        .with_meta("spin_relax_excited", model.spin_relax_excited))
}

/// Relative drop of a PL trace from its maximum to its final value.
pub fn pl_droop(trace: &Spectrum) -> f64 {
    let max = trace.intensity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let last = *trace.intensity.last().unwrap_or(&0.0);
    if max > 0.0 {
        (max - last) / max
    } else {
        0.0
    }
}

/// Steady-state change of one probe transition caused by the pump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeFeature {
    /// Probe minus pump frequency, MHz.
    pub detuning_mhz: f64,
    pub pumped: Transition,
    pub probed: Transition,
    /// Change of (initial − final) level population of the probed transition
    /// relative to the unpumped thermal state: negative for a hole, positive
    /// for an anti-hole.
    pub change: f64,
}

/// Two-tone response from the rate model: for each sub-ensemble whose
/// transition in `pumped` is resonant with the pump, the steady state under
/// pumping is compared with the thermal state on all four transitions.
pub fn two_tone_response(
    sys: &OpticalSystem,
    field_t: f64,
    settings: &PumpSettings,
    pumped: &[Transition],
) -> Result<Vec<ProbeFeature>> {
    let freqs = sys.transition_frequencies(field_t)?;
    let mut out = Vec::new();
    for &pump in pumped {
        let model = RateModel::for_system(sys, field_t, pump, settings)?;
        let thermal = model.populations;
        let steady = model.steady_state()?;
        for probe in Transition::ALL {
            let g = ground_index(probe.ground());
            let e = excited_index(probe.excited());
            let diff = |p: &[f64; 4]| p[g] - p[e];
            out.push(ProbeFeature {
                detuning_mhz: (freqs.offset_ghz(probe) - freqs.offset_ghz(pump)) * 1e3,
                pumped: pump,
                probed: probe,
                change: diff(&steady) - diff(&thermal),
            });
        }
    }
    out.sort_by(|a, b| a.detuning_mhz.total_cmp(&b.detuning_mhz));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys() -> OpticalSystem {
        OpticalSystem {
            g_ground: 10.8,
            g_excited: 12.9,
            f0_thz: 195.0,
            gamma_inh_mhz: 945.0,
            gamma_hom_mhz: 10.9,
            t_optical_us: 8.66,
        }
    }

    fn settings(pump: f64, relax: f64) -> PumpSettings {
        PumpSettings {
            pump_rate: pump,
            branching: 0.5,
            spin_relax_ground: relax,
            spin_relax_excited: relax,
            spin_temperature_k: 0.6,
        }
    }

    /// Independent fixed-step RK4 integration of dp/dt = M p.
    fn rk4(m: &Matrix4<f64>, p0: [f64; 4], t: f64, h: f64) -> [f64; 4] {
        let mut p = Vector4::from_column_slice(&p0);
        let steps = (t / h).round() as usize;
        for _ in 0..steps {
            let k1 = m * p;
            let k2 = m * (p + k1 * (h / 2.0));
            let k3 = m * (p + k2 * (h / 2.0));
            let k4 = m * (p + k3 * h);
            p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        [p[0], p[1], p[2], p[3]]
    }

    #[test]
    fn no_pump_relaxes_to_boltzmann() {
        let model = RateModel::for_system(&sys(), 0.2, Transition::A, &settings(0.0, 1e5))
            .unwrap()
            .with_populations([0.1, 0.2, 0.3, 0.4]);
        let p = model.evolve(1.0).unwrap();
        let b = boltzmann_populations(model.ground_splitting_ghz, 0.6).unwrap();
        assert!((p[0] - b.lower).abs() < 1e-9 && (p[1] - b.upper).abs() < 1e-9);
        assert!(p[2].abs() < 1e-12 && p[3].abs() < 1e-12);
        let ss = model.steady_state().unwrap();
        assert!((ss[0] - b.lower).abs() < 1e-9 && (ss[1] - b.upper).abs() < 1e-9);
    }

    #[test]
    fn dark_state_without_relaxation() {
        let model = RateModel::for_system(&sys(), 0.2, Transition::A, &settings(1e6, 0.0)).unwrap();
        let p = model.evolve(0.1).unwrap();
        assert!((p[1] - 1.0).abs() < 1e-9, "{p:?}");
        assert!(model.pl_rate(&p) < 1e-3);
        let ss = model.steady_state().unwrap();
        assert!((ss[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_rk4_reference() {
        let s = PumpSettings {
            pump_rate: 3e6,
            branching: 0.3,
            spin_relax_ground: 2e5,
            spin_relax_excited: 7e5,
            spin_temperature_k: 0.8,
        };
        let model = RateModel::for_system(&sys(), 0.1, Transition::C, &s).unwrap();
        let t = 20e-6;
        let exact = model.evolve(t).unwrap();
        let reference = rk4(&model.rate_matrix().unwrap(), model.populations, t, 1e-9);
        for i in 0..4 {
            assert!((exact[i] - reference[i]).abs() < 1e-8, "{exact:?} vs {reference:?}");
        }
    }

    #[test]
    fn no_pump_no_light() {
        let model = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(0.0, 1e2)).unwrap();
        let trace = pl_time_trace(&model, &Grid::new(0.0, 50_000.0, 101).unwrap()).unwrap();
        assert!(trace.intensity.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fast_relaxation_keeps_pl_flat() {
        let model = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(1e5, 1e7)).unwrap();
        let grid = Grid::new(0.0, 2e6, 2001).unwrap();
        let trace = pl_time_trace(&model, &grid).unwrap();
        let settle = 5.0 * sys().t_optical_us * 1e3;
        let tail: Vec<f64> = grid.points().zip(&trace.intensity).filter(|(t, _)| *t >= settle).map(|(_, y)| *y).collect();
        let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(*y), b.max(*y)));
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!((hi - lo) / mean < 0.01);
    }

    #[test]
    fn slow_relaxation_decays_monotonically() {
        let model = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(1e5, 1e2)).unwrap();
        let grid = Grid::new(0.0, 5e7, 2001).unwrap();
        let trace = pl_time_trace(&model, &grid).unwrap();
        let peak = trace.intensity.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        for w in trace.intensity[peak..].windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(pl_droop(&trace) > 0.9);
    }

    #[test]
    fn rejects_bad_models() {
        let mut m = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(1.0, 1.0)).unwrap();
        m.branching = 1.5;
        assert!(m.validate().is_err());
        let m = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(1.0, 1.0)).unwrap();
        assert!(m.with_populations([0.5, 0.6, 0.0, 0.0]).evolve(1.0).is_err());
        assert!(m.evolve(-1.0).is_err());
    }

    #[test]
    fn disconnected_scheme_has_no_unique_steady_state() {
        let m = RateModel::for_system(&sys(), 0.1, Transition::A, &settings(0.0, 0.0)).unwrap();
        assert!(m.steady_state().is_err());
    }

    #[test]
    fn pumping_signs_on_a() {
        let r = two_tone_response(&sys(), 0.01, &settings(1e5, 1e2), &[Transition::A]).unwrap();
        for f in r {
            let expect_hole = f.probed.ground() == Spin::Down;
            assert_eq!(f.change < 0.0, expect_hole, "{f:?}");
        }
    }

    proptest! {
        #[test]
        fn semigroup(t1 in 0.0f64..1e-4, t2 in 0.0f64..1e-4, pump in 0.0f64..1e7, relax in 0.0f64..1e7) {
            let m = RateModel::for_system(&sys(), 0.05, Transition::B, &settings(pump, relax)).unwrap();
            let direct = m.evolve(t1 + t2).unwrap();
            let mid = m.evolve(t1).unwrap();
            let staged = apply(&propagator(&m.rate_matrix().unwrap(), t2).unwrap(), &mid);
            for i in 0..4 {
                prop_assert!((direct[i] - staged[i]).abs() < 1e-9);
            }
        }
    }
}
