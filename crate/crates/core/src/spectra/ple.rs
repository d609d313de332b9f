use crate::error::Result;
use crate::model::{boltzmann_populations, zeeman_frequency, OpticalSystem, Spin, Transition};

use super::lineshape::LineshapeSpec;
use super::spectrum::{AxisKind, Grid, Spectrum};
use super::render_lines;

/// One optical line of a PLE spectrum: GHz offset from f0 and relative weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PleLine {
    pub transition: Transition,
    pub offset_ghz: f64,
    pub weight: f64,
}

/// Positions and thermal weights of the four optical lines. Each ground
/// sub-level feeds two transitions, so each line carries half of its
/// sub-level's population and the weights sum to 1. Transition dipole
/// differences between spin-conserving and spin-flip lines are ignored.
pub fn ple_lines(sys: &OpticalSystem, field_t: f64, spin_temperature_k: f64) -> Result<[PleLine; 4]> {
    let freqs = sys.transition_frequencies(field_t)?;
    let splitting = zeeman_frequency(sys.g_ground, field_t)?;
    let pops = boltzmann_populations(splitting, spin_temperature_k)?;
    Ok(Transition::ALL.map(|t| PleLine {
        transition: t,
        offset_ghz: freqs.offset_ghz(t),
        weight: 0.5
            * match t.ground() {
                Spin::Down => pops.lower,
                Spin::Up => pops.upper,
            },
    }))
}

/// PLE spectrum on a grid of laser frequency offsets from f0 (GHz). The
/// profile kind comes from `line`; its width is always the inhomogeneous FWHM
/// of `sys`.
///
/// Lines whose centre lies closer than two FWHM to a grid edge (or beyond it)
/// are listed under the `warning` meta key.
pub fn ple_spectrum(
    sys: &OpticalSystem,
    field_t: f64,
    spin_temperature_k: f64,
    line: &LineshapeSpec,
    grid: &Grid,
) -> Result<Spectrum> {
    grid.validate()?;
    let shape = line.with_fwhm(sys.gamma_inh_mhz * 1e-3);
    shape.validate()?;
    let lines = ple_lines(sys, field_t, spin_temperature_k)?;
    let sticks: Vec<(f64, f64)> = lines.iter().map(|l| (l.offset_ghz, l.weight)).collect();
    let intensity = render_lines(grid, &sticks, &shape);

    let margin = 2.0 * shape.fwhm;
    let clipped: Vec<&str> = lines
        .iter()
        .filter(|l| l.weight > 0.0)
        .filter(|l| l.offset_ghz - margin < grid.start || l.offset_ghz + margin > grid.stop)
        .map(|l| l.transition.label())
        .collect();

    let mut s = Spectrum::new(AxisKind::FrequencyGhz, *grid, intensity)?
        .with_meta("model", "ple")
        .with_meta("f0_THz", sys.f0_thz)
        .with_meta("axis_reference", "offset from f0")
        .with_meta("field_T", field_t)
        .with_meta("spin_temperature_K", spin_temperature_k)
        .with_meta("g_ground", sys.g_ground)
        .with_meta("g_excited", sys.g_excited)
        .with_meta("gamma_inh_MHz", sys.gamma_inh_mhz);
    for l in &lines {
        s = s.with_meta(format!("weight_{}", l.transition.label()), l.weight);
    }
    if !clipped.is_empty() {
        s = s.with_meta("warning", format!("grid truncates line(s) {}", clipped.join(",")));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::LineshapeSpec;

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

    fn weight(lines: &[PleLine; 4], t: Transition) -> f64 {
        lines.iter().find(|l| l.transition == t).unwrap().weight
    }

    #[test]
    fn cold_spins_hide_upper_transitions() {
        let l = ple_lines(&sys(), 0.2, 0.060).unwrap();
        let upper = weight(&l, Transition::B) + weight(&l, Transition::D);
        let lower = weight(&l, Transition::A) + weight(&l, Transition::C);
        assert!(upper < 0.01 * lower);
        assert!(upper / lower < 1e-10);
    }

    #[test]
    fn zero_field_single_peak() {
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        let s = ple_spectrum(&sys(), 0.0, 0.6, &LineshapeSpec::lorentzian(1.0), &grid).unwrap();
        let ext = s.local_extrema();
        assert_eq!(ext.len(), 1);
        assert!(ext[0].position.abs() < 1e-9);
        let l = ple_lines(&sys(), 0.0, 0.6).unwrap();
        assert!((l.iter().map(|x| x.weight).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hot_spins_pairwise_equal() {
        let l = ple_lines(&sys(), 0.1, 1e9).unwrap();
        assert!((weight(&l, Transition::A) - weight(&l, Transition::B)).abs() < 1e-8);
        assert!((weight(&l, Transition::C) - weight(&l, Transition::D)).abs() < 1e-8);
    }

    #[test]
    fn integrated_intensity_independent_of_field_and_temperature() {
        let grid = Grid::new(-150.0, 150.0, 30001).unwrap();
        let mut areas = Vec::new();
        for (b, t) in [(0.0, 0.6), (0.05, 0.06), (0.2, 4.0), (0.3, 0.6)] {
            let s = ple_spectrum(&sys(), b, t, &LineshapeSpec::lorentzian(1.0), &grid).unwrap();
            assert!(!s.meta.contains_key("warning"));
            areas.push(s.integral());
        }
        for a in &areas[1..] {
            assert!((a - areas[0]).abs() < 1e-6, "{areas:?}");
        }
    }

    #[test]
    fn narrow_grid_warns() {
        let grid = Grid::new(-5.0, 5.0, 101).unwrap();
        let s = ple_spectrum(&sys(), 0.2, 4.0, &LineshapeSpec::lorentzian(1.0), &grid).unwrap();
        assert!(s.meta["warning"].contains('C'));
    }
}
