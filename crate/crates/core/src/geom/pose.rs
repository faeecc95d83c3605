use std::ops::Mul;

use nalgebra::{Matrix4, Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Rigid pose in SE(3): a position and a unit quaternion.
///
/// Composition renormalizes the quaternion so drift never accumulates past
/// a few ulps, however long a kinematic chain gets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation: renormalize(orientation.into_inner()),
        }
    }

    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_translation(position: Vector3<f64>) -> Self {
        Self {
            position,
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_rotation(orientation: UnitQuaternion<f64>) -> Self {
        Self::new(Vector3::zeros(), orientation)
    }

    /// Parses `[px, py, pz, qw, qx, qy, qz]`.
    ///
    /// Quaternions already unit within 1e-12 are taken bit-for-bit, so
    /// serialized poses round-trip exactly.
    pub fn from_array(a: [f64; 7]) -> Result<Self> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("pose", format!("non-finite component in {a:?}")));
        }
        let q = Quaternion::new(a[3], a[4], a[5], a[6]);
        let norm = q.norm();
        if norm < 1e-9 {
            return Err(Error::invalid("pose", "quaternion has zero norm"));
        }
        let orientation = if (norm - 1.0).abs() <= 1e-12 {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::new_unchecked(q / norm)
        };
        Ok(Self {
            position: Vector3::new(a[0], a[1], a[2]),
            orientation,
        })
    }

    pub fn to_array(&self) -> [f64; 7] {
        let q = self.orientation.quaternion();
        [
            self.position.x,
            self.position.y,
            self.position.z,
            q.w,
            q.i,
            q.j,
            q.k,
        ]
    }

    /// `self ∘ other`: `other` expressed through `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * other.position,
            orientation: renormalize(self.orientation.into_inner() * other.orientation.into_inner()),
        }
    }

    /// `(−q⁻¹ p, q⁻¹)`, with the conjugate as the quaternion inverse.
    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * p
    }

    pub fn inverse_transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p - self.position))
    }

    pub fn to_homogeneous(&self) -> Matrix4<f64> {
        let mut m = self.orientation.to_homogeneous();
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    /// Rotation angle between two orientations, treating `q` and `−q` as
    /// the same rotation. In `[0, π]`.
    pub fn angle_to(&self, other: &Pose) -> f64 {
        rotation_angle(&self.orientation, &other.orientation)
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl<'a> Mul<&'a Pose> for &'a Pose {
    type Output = Pose;

    fn mul(self, rhs: &'a Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Serialized as the 7-array `[px, py, pz, qw, qx, qy, qz]`.
impl serde::Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 7]>::deserialize(d)?;
        Pose::from_array(a).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn renormalize(q: Quaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_unchecked(q / q.norm())
}

/// Antipodal-aware rotation angle between two unit quaternions.
pub fn rotation_angle(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let dot = a.coords.dot(&b.coords).abs().min(1.0);
    2.0 * dot.acos()
}

/// Quaternion 4D dot product `aᵀb`.
pub fn quat_dot(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    a.coords.dot(&b.coords)
}
