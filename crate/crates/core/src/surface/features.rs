use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use rayon::prelude::*;

use super::cloud::PointCloud;
use super::curvature::{fit_at, PrincipalCurvature};
use super::kdtree::KdTree;
use super::normals::{check_neighborhood, normal_at};
use crate::error::{Error, Result};
use crate::geom::{Feature, Pose};

pub const DEFAULT_K_NN: usize = 20;

/// One oriented feature per retained cloud point. Each frame has the
/// principal directions `k₁, k₂` as x/y axes and the outward normal as z.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceFeatureSet {
    pub features: Vec<Feature>,
}

impl SurfaceFeatureSet {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Result of [`extract_features`]: the features and the number of points
/// whose normal or curvature estimate failed.
#[derive(Clone, Debug)]
pub struct Extraction {
    pub features: SurfaceFeatureSet,
    pub normals: Vec<Vector3<f64>>,
    pub skipped: usize,
}

/// Right-handed frame `(k₁, normal × k₁, normal)` as a unit quaternion.
pub fn frame_orientation(k1: &Vector3<f64>, normal: &Vector3<f64>) -> UnitQuaternion<f64> {
    let z = normal.normalize();
    let x = (k1 - z * z.dot(k1)).normalize();
    let y = z.cross(&x);
    let m = Matrix3::from_columns(&[x, y, z]);
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m))
}

/// Assembles features from precomputed normals and curvature data.
pub fn build_features(
    cloud: &PointCloud,
    normals: &[Vector3<f64>],
    curvatures: &[PrincipalCurvature],
) -> Result<SurfaceFeatureSet> {
    if normals.len() != cloud.len() || curvatures.len() != cloud.len() {
        return Err(Error::invalid(
            "features",
            format!(
                "{} points, {} normals, {} curvature records",
                cloud.len(),
                normals.len(),
                curvatures.len()
            ),
        ));
    }
    let features = cloud
        .points
        .iter()
        .zip(normals)
        .zip(curvatures)
        .map(|((p, n), c)| Feature::new(Pose::new(*p, frame_orientation(&c.k1, n)), c.r))
        .collect();
    Ok(SurfaceFeatureSet { features })
}

/// Normals, curvatures and frames for every point in one pass. Points whose
/// estimate fails are skipped and counted.
pub fn extract_features(cloud: &PointCloud, k_nn: usize) -> Result<Extraction> {
    check_neighborhood(cloud, k_nn)?;
    let tree = KdTree::new(&cloud.points);
    let per_point: Vec<Option<(Feature, Vector3<f64>)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let normal = normal_at(cloud, &tree, i, k_nn).ok()?;
            let p = cloud.points[i];
            let nb: Vec<_> = tree
                .nearest_k(&p, k_nn)
                .into_iter()
                .map(|(j, _)| cloud.points[j])
                .collect();
            let c = fit_at(i, &p, &normal, &nb).ok()?;
            Some((Feature::new(Pose::new(p, frame_orientation(&c.k1, &normal)), c.r), normal))
        })
        .collect();
    let skipped = per_point.iter().filter(|f| f.is_none()).count();
    if skipped > 0 {
        log::debug!("feature extraction skipped {skipped} of {} points", cloud.len());
    }
    let (features, normals) = per_point.into_iter().flatten().unzip();
    Ok(Extraction {
        features: SurfaceFeatureSet { features },
        normals,
        skipped,
    })
}
