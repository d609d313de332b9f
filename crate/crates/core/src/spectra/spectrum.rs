use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Physical meaning and unit of a spectrum's abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AxisKind {
    #[serde(rename = "frequency_GHz")]
    FrequencyGhz,
    #[serde(rename = "field_mT")]
    FieldMt,
    #[serde(rename = "detuning_MHz")]
    DetuningMhz,
    #[serde(rename = "angle_deg")]
    AngleDeg,
    #[serde(rename = "time_ns")]
    TimeNs,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::FrequencyGhz => "frequency_GHz",
            AxisKind::FieldMt => "field_mT",
            AxisKind::DetuningMhz => "detuning_MHz",
            AxisKind::AngleDeg => "angle_deg",
            AxisKind::TimeNs => "time_ns",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            AxisKind::FrequencyGhz => "GHz",
            AxisKind::FieldMt => "mT",
            AxisKind::DetuningMhz => "MHz",
            AxisKind::AngleDeg => "deg",
            AxisKind::TimeNs => "ns",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Self::FrequencyGhz, Self::FieldMt, Self::DetuningMhz, Self::AngleDeg, Self::TimeNs]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

/// Uniform grid `start, start + step, ..., stop` with `n >= 2` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, n: usize) -> Result<Self> {
        let g = Self { start, stop, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n >= 2, || format!("grid needs at least 2 points, got {}", self.n))?;
        ensure(self.start.is_finite() && self.stop.is_finite(), || "grid bounds must be finite".into())?;
        ensure(self.stop > self.start, || {
            format!("grid must be increasing (start {} >= stop {})", self.start, self.stop)
        })
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.n - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.stop
        } else {
            self.start + i as f64 * self.step()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.at(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.start && x <= self.stop
    }
}

/// Samples on a uniform axis together with free-form provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub axis_kind: AxisKind,
    pub grid: Grid,
    pub intensity: Vec<f64>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl Spectrum {
    pub fn new(axis_kind: AxisKind, grid: Grid, intensity: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        ensure(intensity.len() == grid.n, || {
            format!("{} intensity samples for a {}-point grid", intensity.len(), grid.n)
        })?;
        if let Some(i) = intensity.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite intensity at sample {i}")));
        }
        Ok(Self { axis_kind, grid, intensity, meta: BTreeMap::new() })
    }

    pub fn zeros(axis_kind: AxisKind, grid: Grid) -> Result<Self> {
        Self::new(axis_kind, grid, vec![0.0; grid.n])
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.insert(key.into(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn axis(&self) -> Vec<f64> {
        self.grid.to_vec()
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn max_abs(&self) -> f64 {
        self.intensity.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.intensity, self.step())
    }

    /// Trapezoidal integral of |intensity|.
    pub fn abs_integral(&self) -> f64 {
        let abs: Vec<f64> = self.intensity.iter().map(|v| v.abs()).collect();
        trapezoid(&abs, self.step())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Spectrum = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Spectrum::new(s.axis_kind, s.grid, s.intensity).map(|mut out| {
            out.meta = s.meta;
            out
        })
    }

    /// `#`-prefixed metadata lines, one column-title row `<axis_kind>,intensity`,
    /// then one `axis,intensity` row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# axis_kind: {}", self.axis_kind.name());
        let _ = writeln!(out, "# unit: {}", self.axis_kind.unit());
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {}", v.replace('\n', " "));
        }
        let _ = writeln!(out, "{},intensity", self.axis_kind.name());
        for (x, y) in self.grid.points().zip(&self.intensity) {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = BTreeMap::new();
        let mut kind = None;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once(':') {
                    let (k, v) = (k.trim(), v.trim());
                    match k {
                        "axis_kind" | "unit" => {}
                        _ => {
                            meta.insert(k.to_string(), v.to_string());
                        }
                    }
                }
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Format(format!("line {}: expected two columns", lineno + 1)))?;
            if kind.is_none() {
                kind = Some(AxisKind::parse(a.trim()).ok_or_else(|| {
                    Error::Format(format!("line {}: unknown axis column '{a}'", lineno + 1))
                })?);
                continue;
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))
            };
            xs.push(parse(a)?);
            ys.push(parse(b)?);
        }
        let kind = kind.ok_or_else(|| Error::Format("missing column-title row".into()))?;
        ensure(xs.len() >= 2, || "spectrum needs at least 2 samples".into())
            .map_err(|e| Error::Format(e.to_string()))?;
        let grid = Grid::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let tol = 1e-9 * grid.step() + 8.0 * f64::EPSILON * grid.start.abs().max(grid.stop.abs());
        if let Some(i) = (0..xs.len()).find(|&i| (xs[i] - grid.at(i)).abs() > tol) {
            return Err(Error::Format(format!("axis is not uniformly spaced at sample {i}")));
        }
        let mut s = Spectrum::new(kind, grid, ys)?;
        s.meta = meta;
        Ok(s)
    }
}

/// Whether a stationary point is a local maximum or minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

/// Local extremum located to sub-sample precision by a parabola through the
/// three samples around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub position: f64,
    pub value: f64,
    pub index: usize,
}

impl Spectrum {
    /// Interior local maxima and minima. A run of equal samples counts once,
    /// and only if both neighbours of the run lie on the same side of it.
    pub fn local_extrema(&self) -> Vec<Extremum> {
        let y = &self.intensity;
        let h = self.step();
        let mut out = Vec::new();
        let mut i = 1;
        while i + 1 < y.len() {
            let mut j = i;
            while j + 1 < y.len() && y[j + 1] == y[i] {
                j += 1;
            }
            if j + 1 >= y.len() {
                break;
            }
            let (left, right) = (y[i - 1], y[j + 1]);
            let kind = if y[i] > left && y[i] > right {
                Some(ExtremumKind::Maximum)
            } else if y[i] < left && y[i] < right {
                Some(ExtremumKind::Minimum)
            } else {
                None
            };
            if let Some(kind) = kind {
                let (position, value) = if i == j {
                    let (a, b, c) = (left, y[i], right);
                    let den = a - 2.0 * b + c;
                    let shift = if den != 0.0 { (0.5 * (a - c) / den).clamp(-0.5, 0.5) } else { 0.0 };
                    (self.grid.at(i) + shift * h, b - 0.25 * (a - c) * shift)
                } else {
                    (0.5 * (self.grid.at(i) + self.grid.at(j)), y[i])
                };
                out.push(Extremum { kind, position, value, index: (i + j) / 2 });
            }
            i = j + 1;
        }
        out
    }

    /// Extrema whose magnitude exceeds `fraction` of the largest |intensity|.
    pub fn prominent_extrema(&self, fraction: f64) -> Vec<Extremum> {
        let floor = fraction * self.max_abs();
        self.local_extrema().into_iter().filter(|e| e.value.abs() > floor).collect()
    }
}

pub(crate) fn trapezoid(y: &[f64], dx: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    dx * (inner + 0.5 * (y[0] + y[y.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_single_point() {
        assert!(Grid::new(0.0, 1.0, 1).is_err());
        assert!(Grid::new(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn non_finite_intensity_rejected() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert!(Spectrum::new(AxisKind::TimeNs, g, vec![0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(0.0, 2.0, 3).unwrap();
        let s = Spectrum::new(AxisKind::FieldMt, g, vec![1.0, -0.5, 0.25]).unwrap().with_meta("seed", 7);
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# axis_kind: field_mT");
        assert_eq!(lines[1], "# unit: mT");
        assert_eq!(lines[2], "# seed: 7");
        assert_eq!(lines[3], "field_mT,intensity");
        assert_eq!(lines[4], "0,1");
        assert_eq!(lines[5], "1,-0.5");
    }

    #[test]
    fn csv_rejects_ragged_axis() {
        let text = "time_ns,intensity\n0,1\n1,2\n3,3\n";
        assert!(Spectrum::from_csv(text).is_err());
    }

    proptest! {
        #[test]
        fn csv_and_json_round_trip(
            start in -1e4f64..1e4, width in 1e-3f64..1e4, ys in prop::collection::vec(-1e6f64..1e6, 2..64)
        ) {
            let g = Grid::new(start, start + width, ys.len()).unwrap();
            let s = Spectrum::new(AxisKind::DetuningMhz, g, ys).unwrap().with_meta("origin", "test");
            let back = Spectrum::from_csv(&s.to_csv()).unwrap();
            prop_assert_eq!(&back.intensity, &s.intensity);
            prop_assert_eq!(&back.meta, &s.meta);
            prop_assert!((back.grid.step() - s.grid.step()).abs() <= 1e-9 * s.grid.step());
            let back = Spectrum::from_json(&s.to_json().unwrap()).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
