use nalgebra::{Matrix3, Point3, Rotation3, Unit, Vector3};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-9;

/// Rigid transform: `x ↦ rotation · x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let pose = Self {
            rotation,
            translation,
        };
        if !pose.is_rigid() || !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(
                "pose rotation is not orthonormal with det 1".into(),
            ));
        }
        Ok(pose)
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation by `angle` radians about `axis` (right-hand rule).
    pub fn from_axis_angle(axis: &Unit<Vector3<f64>>, angle: f64) -> Self {
        Self {
            rotation: *Rotation3::from_axis_angle(axis, angle).matrix(),
            translation: Vector3::zeros(),
        }
    }

    /// Fixed-axis roll/pitch/yaw (`Rz(yaw)·Ry(pitch)·Rx(roll)`) followed by a translation.
    pub fn from_rpy_xyz(rpy: [f64; 3], xyz: [f64; 3]) -> Self {
        Self {
            rotation: *Rotation3::from_euler_angles(rpy[0], rpy[1], rpy[2]).matrix(),
            translation: Vector3::from(xyz),
        }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    #[inline]
    pub fn transform_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// `|det R − 1| < 1e-9` and `RᵀR = I` within 1e-9.
    pub fn is_rigid(&self) -> bool {
        let r = &self.rotation;
        if !r.iter().all(|v| v.is_finite()) {
            return false;
        }
        let gram = r.transpose() * r - Matrix3::identity();
        (r.determinant() - 1.0).abs() < ORTHONORMAL_TOL && gram.amax() < ORTHONORMAL_TOL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_about_z() {
        let p = Pose::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2);
        let y = p.transform_vector(&Vector3::x());
        assert!((y - Vector3::y()).norm() < 1e-12);
        assert!(p.is_rigid());
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let a = Pose::from_rpy_xyz([0.3, -1.1, 2.0], [0.1, 0.2, -0.4]);
        let id = a.compose(&a.inverse());
        assert!((id.rotation - Matrix3::identity()).amax() < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }

    #[test]
    fn rejects_reflection() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Pose::new(m, Vector3::zeros()).is_err());
    }
}
