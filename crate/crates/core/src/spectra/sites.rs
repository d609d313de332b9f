use nalgebra::{Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::constants::MU_B_OVER_H_GHZ_PER_T;
use crate::error::{ensure, invalid, Result};
use crate::model::{check_unit, GTensor};

use super::spectrum::{AxisKind, Grid, Spectrum};

/// Two magnetically inequivalent copies of one g-tensor related by a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SitePair {
    pub site_a: GTensor,
    /// Lab-frame rotation taking site A onto site B.
    pub relation: UnitQuaternion<f64>,
}

impl SitePair {
    pub fn site_b(&self) -> GTensor {
        self.site_a.rotated(&self.relation)
    }

    pub fn effective_g(&self, direction: &Vector3<f64>) -> Result<(f64, f64)> {
        Ok((self.site_a.effective_g(direction)?, self.site_b().effective_g(direction)?))
    }
}

/// Ground- and excited-state g-tensors of site A, with the rotation relating
/// site A to site B shared by both manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteSystem {
    pub ground: GTensor,
    pub excited: GTensor,
    pub relation: UnitQuaternion<f64>,
}

impl TwoSiteSystem {
    pub fn ground_pair(&self) -> SitePair {
        SitePair { site_a: self.ground, relation: self.relation }
    }

    pub fn excited_pair(&self) -> SitePair {
        SitePair { site_a: self.excited, relation: self.relation }
    }
}

/// Field rotation plane: directions `cos θ·u + sin θ·(normal × u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationPlane {
    normal: Unit<Vector3<f64>>,
    reference: Unit<Vector3<f64>>,
}

impl RotationPlane {
    /// `reference` is the θ = 0 direction and must be perpendicular to `normal`.
    pub fn new(normal: Vector3<f64>, reference: Vector3<f64>) -> Result<Self> {
        check_unit(&normal)?;
        check_unit(&reference)?;
        ensure(normal.dot(&reference).abs() < 1e-9, || "reference must lie in the plane".into())?;
        Ok(Self { normal: Unit::new_normalize(normal), reference: Unit::new_normalize(reference) })
    }

    /// Plane perpendicular to `normal`, reference axis chosen automatically.
    pub fn perpendicular_to(normal: Vector3<f64>) -> Result<Self> {
        let n = normal.try_normalize(0.0).ok_or_else(|| invalid("plane normal must be non-zero"))?;
        let seed = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = (seed - n * n.dot(&seed)).normalize();
        Self::new(n, u)
    }

    pub fn normal(&self) -> &Vector3<f64> {
        self.normal.as_ref()
    }

    pub fn direction(&self, angle_deg: f64) -> Vector3<f64> {
        let t = angle_deg.to_radians();
        let v = self.normal.cross(&self.reference);
        (self.reference.as_ref() * t.cos() + v * t.sin()).normalize()
    }

    /// Rotation by `angle_deg` about the plane normal.
    pub fn in_plane_rotation(&self, angle_deg: f64) -> UnitQuaternion<f64> {
        UnitQuaternion::from_axis_angle(&self.normal, angle_deg.to_radians())
    }
}

/// C–D optical splitting `(g_g,eff(θ) + g_e,eff(θ))·μ_B·B/h` in GHz versus the
/// in-plane field angle, one trace per site.
pub fn angle_sweep_cd_splitting(
    sites: &TwoSiteSystem,
    field_t: f64,
    plane: &RotationPlane,
    angles_deg: &Grid,
) -> Result<(Spectrum, Spectrum)> {
    angles_deg.validate()?;
    ensure(field_t.is_finite() && field_t >= 0.0, || format!("field must be >= 0 T, got {field_t}"))?;
    ensure(angles_deg.stop - angles_deg.start <= 360.0 + 1e-9, || {
        "angle grid must stay within one full turn".into()
    })?;
    let scale = MU_B_OVER_H_GHZ_PER_T * field_t;
    let (ga, ea) = (sites.ground, sites.excited);
    let (gb, eb) = (sites.ground_pair().site_b(), sites.excited_pair().site_b());
    let mut a = Vec::with_capacity(angles_deg.n);
    let mut b = Vec::with_capacity(angles_deg.n);
    for theta in angles_deg.points() {
        let d = plane.direction(theta);
        a.push((ga.effective_g_unchecked(&d) + ea.effective_g_unchecked(&d)) * scale);
        b.push((gb.effective_g_unchecked(&d) + eb.effective_g_unchecked(&d)) * scale);
    }
    let trace = |v, site: &str| -> Result<Spectrum> {
        Ok(Spectrum::new(AxisKind::AngleDeg, *angles_deg, v)?
            .with_meta("model", "cd_splitting_vs_angle")
            .with_meta("site", site)
            .with_meta("unit", "GHz")
            .with_meta("field_T", field_t))
    };
    Ok((trace(a, "A")?, trace(b, "B")?))
}
