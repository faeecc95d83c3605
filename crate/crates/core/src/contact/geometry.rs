use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Pose;

/// Collision primitive of a hand link, in the link frame.
///
/// A capsule is the set of points within `radius` of the segment from the
/// link origin to `(length, 0, 0)`. A box is centred on the link origin with
/// full edge lengths `size`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub enum LinkGeometry {
    Capsule { radius: f64, length: f64 },
    Box { size: [f64; 3] },
}

#[derive(Serialize, Deserialize)]
struct RawGeometry {
    #[serde(rename = "type")]
    kind: String,
    dims: Vec<f64>,
}

impl TryFrom<RawGeometry> for LinkGeometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        let g = match (raw.kind.as_str(), raw.dims.as_slice()) {
            ("capsule", [radius, length]) => LinkGeometry::Capsule {
                radius: *radius,
                length: *length,
            },
            ("box", [x, y, z]) => LinkGeometry::Box { size: [*x, *y, *z] },
            (kind, dims) => {
                return Err(Error::invalid(
                    "link geometry",
                    format!("'{kind}' with {} dims (capsule takes [radius, length], box takes [x, y, z])", dims.len()),
                ))
            }
        };
        g.validate()?;
        Ok(g)
    }
}

impl From<LinkGeometry> for RawGeometry {
    fn from(g: LinkGeometry) -> Self {
        match g {
            LinkGeometry::Capsule { radius, length } => RawGeometry {
                kind: "capsule".into(),
                dims: vec![radius, length],
            },
            LinkGeometry::Box { size } => RawGeometry {
                kind: "box".into(),
                dims: size.to_vec(),
            },
        }
    }
}

impl LinkGeometry {
    pub fn validate(&self) -> Result<()> {
        let dims: &[f64] = match self {
            LinkGeometry::Capsule { radius, length } => &[*radius, *length],
            LinkGeometry::Box { size } => size,
        };
        if dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::invalid("link geometry", format!("dimensions must be positive, got {dims:?}")))
        }
    }

    /// Centre of the primitive in the link frame.
    pub fn center(&self) -> Vector3<f64> {
        match self {
            LinkGeometry::Capsule { length, .. } => Vector3::new(0.5 * length, 0.0, 0.0),
            LinkGeometry::Box { .. } => Vector3::zeros(),
        }
    }

    /// Radius of a ball around [`LinkGeometry::center`] containing the primitive.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            LinkGeometry::Capsule { radius, length } => 0.5 * length + radius,
            LinkGeometry::Box { size } => 0.5 * Vector3::from(*size).norm(),
        }
    }

    /// Signed distance from a link-frame point to the surface, negative inside.
    pub fn signed_distance_local(&self, p: &Vector3<f64>) -> f64 {
        match self {
            LinkGeometry::Capsule { radius, length } => {
                let t = p.x.clamp(0.0, *length);
                (p - Vector3::new(t, 0.0, 0.0)).norm() - radius
            }
            LinkGeometry::Box { size } => {
                let h = Vector3::from(*size) * 0.5;
                let q = p.abs() - h;
                let outside = q.map(|v| v.max(0.0)).norm();
                let inside = q.max().min(0.0);
                outside + inside
            }
        }
    }

    /// Closest point on the surface to a link-frame point.
    pub fn closest_point_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        match self {
            LinkGeometry::Capsule { radius, length } => {
                let c = Vector3::new(p.x.clamp(0.0, *length), 0.0, 0.0);
                let d = p - c;
                let n = d.norm();
                if n > 1e-15 {
                    c + d * (radius / n)
                } else {
                    // On the axis every direction is equally close.
                    c + Vector3::new(0.0, 0.0, *radius)
                }
            }
            LinkGeometry::Box { size } => {
                let h = Vector3::from(*size) * 0.5;
                let clamped = Vector3::new(
                    p.x.clamp(-h.x, h.x),
                    p.y.clamp(-h.y, h.y),
                    p.z.clamp(-h.z, h.z),
                );
                if clamped != *p {
                    return clamped;
                }
                // Inside: push out through the nearest face.
                let gaps = h - p.abs();
                let axis = gaps.imin();
                let mut out = *p;
                out[axis] = if p[axis] < 0.0 { -h[axis] } else { h[axis] };
                out
            }
        }
    }

    /// Closest surface point to world point `p` for a link at `link_pose`,
    /// with the distance to it.
    pub fn closest_point(&self, link_pose: &Pose, p: &Vector3<f64>) -> (Vector3<f64>, f64) {
        let local = link_pose.inverse_transform_point(p);
        let a = link_pose.transform_point(&self.closest_point_local(&local));
        (a, (p - a).norm())
    }

    pub fn signed_distance(&self, link_pose: &Pose, p: &Vector3<f64>) -> f64 {
        self.signed_distance_local(&link_pose.inverse_transform_point(p))
    }
}
