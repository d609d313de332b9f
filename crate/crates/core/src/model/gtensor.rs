use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};

/// Accepted deviation of a direction vector from unit length.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Anisotropic g-tensor, stored as principal values plus the rotation that
/// carries the principal frame onto the lab frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GTensor {
    principal: [f64; 3],
    orientation: UnitQuaternion<f64>,
}

impl GTensor {
    pub fn new(principal: [f64; 3], orientation: UnitQuaternion<f64>) -> Result<Self> {
        for (axis, g) in ["x", "y", "z"].iter().zip(principal) {
            ensure(g.is_finite() && g >= 0.0, || {
                format!("principal g_{axis} must be finite and >= 0, got {g}")
            })?;
        }
        let m = orientation.to_rotation_matrix();
        let err = (m.matrix().transpose() * m.matrix() - nalgebra::Matrix3::identity()).abs().max();
        ensure(err < 1e-12, || format!("orientation is not orthonormal (deviation {err:e})"))?;
        Ok(Self { principal, orientation })
    }

    /// Tensor aligned with the lab frame.
    pub fn aligned(principal: [f64; 3]) -> Result<Self> {
        Self::new(principal, UnitQuaternion::identity())
    }

    pub fn isotropic(g: f64) -> Result<Self> {
        Self::aligned([g, g, g])
    }

    pub fn principal(&self) -> [f64; 3] {
        self.principal
    }

    pub fn orientation(&self) -> &UnitQuaternion<f64> {
        &self.orientation
    }

    pub fn rotation_matrix(&self) -> Rotation3<f64> {
        self.orientation.to_rotation_matrix()
    }

    pub fn min_principal(&self) -> f64 {
        self.principal.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_principal(&self) -> f64 {
        self.principal.iter().copied().fold(0.0, f64::max)
    }

    /// The same principal values with the lab-frame rotation `rot` applied on top.
    pub fn rotated(&self, rot: &UnitQuaternion<f64>) -> Self {
        Self { principal: self.principal, orientation: rot * self.orientation }
    }

    /// g_eff = sqrt(sum_i g_i^2 n_i^2) with n the field direction expressed in
    /// the principal frame.
    pub fn effective_g(&self, direction: &Vector3<f64>) -> Result<f64> {
        check_unit(direction)?;
        Ok(self.effective_g_unchecked(direction))
    }

    pub(crate) fn effective_g_unchecked(&self, direction: &Vector3<f64>) -> f64 {
        let n = self.orientation.inverse_transform_vector(direction);
        let [gx, gy, gz] = self.principal;
        ((gx * n.x).powi(2) + (gy * n.y).powi(2) + (gz * n.z).powi(2)).sqrt()
    }
}

pub(crate) fn check_unit(direction: &Vector3<f64>) -> Result<()> {
    let norm = direction.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(invalid(format!("direction must be a unit vector, |n| = {norm}")));
    }
    Ok(())
}

/// Static field: magnitude in tesla along a lab-frame unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldVector {
    magnitude: f64,
    direction: Unit<Vector3<f64>>,
}

impl FieldVector {
    pub fn new(magnitude_t: f64, direction: Vector3<f64>) -> Result<Self> {
        ensure(magnitude_t.is_finite() && magnitude_t >= 0.0, || {
            format!("field magnitude must be >= 0 T, got {magnitude_t}")
        })?;
        check_unit(&direction)?;
        Ok(Self { magnitude: magnitude_t, direction: Unit::new_normalize(direction) })
    }

    /// Normalizes `direction` instead of rejecting non-unit input.
    pub fn along(magnitude_t: f64, direction: Vector3<f64>) -> Result<Self> {
        let norm = direction.norm();
        ensure(norm > 0.0 && norm.is_finite(), || "field direction must be non-zero".into())?;
        Self::new(magnitude_t, direction / norm)
    }

    pub fn tesla(&self) -> f64 {
        self.magnitude
    }

    pub fn direction(&self) -> &Vector3<f64> {
        self.direction.as_ref()
    }
}
