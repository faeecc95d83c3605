use nalgebra::Vector3;

use super::description::HandDescription;
use crate::contact::LinkGeometry;
use crate::geom::Pose;
use crate::surface::KdTree;

/// Point cloud indexed for distance queries against link primitives.
#[derive(Clone, Debug)]
pub struct CloudCollider {
    tree: KdTree,
}

impl CloudCollider {
    pub fn new(points: &[Vector3<f64>]) -> Self {
        Self {
            tree: KdTree::new(points),
        }
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        self.tree.points()
    }

    /// Smallest signed distance from any cloud point to the primitive,
    /// negative when a point lies inside it. Points farther than `range`
    /// from the surface may be ignored; `+∞` when none are nearer.
    pub fn min_signed_distance(&self, geometry: &LinkGeometry, pose: &Pose, range: f64) -> f64 {
        let center = pose.transform_point(&geometry.center());
        self.tree
            .within(&center, geometry.bounding_radius() + range.max(0.0))
            .into_iter()
            .map(|i| geometry.signed_distance(pose, &self.tree.points()[i]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Deepest point of the cloud inside the primitive, 0 if none.
    pub fn penetration(&self, geometry: &LinkGeometry, pose: &Pose) -> f64 {
        (-self.min_signed_distance(geometry, pose, 0.0)).max(0.0)
    }

    /// Deepest penetration over all links of a hand posed at `link_poses`.
    pub fn hand_penetration(&self, hand: &HandDescription, link_poses: &[Pose]) -> f64 {
        hand.links()
            .iter()
            .zip(link_poses)
            .map(|(l, p)| self.penetration(&l.geometry, p))
            .fold(0.0, f64::max)
    }
}
