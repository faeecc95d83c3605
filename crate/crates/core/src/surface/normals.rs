use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;

use super::cloud::PointCloud;
use super::kdtree::KdTree;
use crate::error::{Error, Result};

pub const MIN_NEIGHBORS: usize = 4;

pub(crate) fn check_neighborhood(cloud: &PointCloud, k_nn: usize) -> Result<()> {
    if k_nn < MIN_NEIGHBORS {
        return Err(Error::invalid("k_nn", format!("needs at least {MIN_NEIGHBORS} neighbours, got {k_nn}")));
    }
    if cloud.len() < k_nn + 1 {
        return Err(Error::invalid(
            "point cloud",
            format!("{} points is too few for k_nn = {k_nn}", cloud.len()),
        ));
    }
    Ok(())
}

/// PCA normal of the `k_nn`-neighbourhood of point `index`, facing the viewpoint.
pub(crate) fn normal_at(cloud: &PointCloud, tree: &KdTree, index: usize, k_nn: usize) -> Result<Vector3<f64>> {
    let p = cloud.points[index];
    let neighbors = tree.nearest_k(&p, k_nn);
    let n = neighbors.len() as f64;
    let centroid = neighbors
        .iter()
        .fold(Vector3::zeros(), |acc, (j, _)| acc + cloud.points[*j])
        / n;
    let cov = neighbors.iter().fold(Matrix3::zeros(), |acc, (j, _)| {
        let d = cloud.points[*j] - centroid;
        acc + d * d.transpose()
    }) / n;
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let (l0, l1, l2) = (
        eig.eigenvalues[order[0]],
        eig.eigenvalues[order[1]],
        eig.eigenvalues[order[2]],
    );
    if (l1 - l0).abs() <= 1e-12 * l2.max(1.0) {
        return Err(Error::DegenerateNeighborhood { index });
    }
    let mut normal: Vector3<f64> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    if normal.dot(&(cloud.viewpoint - p)) < 0.0 {
        normal = -normal;
    }
    Ok(normal)
}

/// Unit normal per point: the smallest-eigenvalue eigenvector of the
/// neighbourhood covariance, oriented towards the viewpoint.
pub fn estimate_normals(cloud: &PointCloud, k_nn: usize) -> Result<Vec<Vector3<f64>>> {
    check_neighborhood(cloud, k_nn)?;
    let tree = KdTree::new(&cloud.points);
    (0..cloud.len())
        .into_par_iter()
        .map(|i| normal_at(cloud, &tree, i, k_nn))
        .collect()
}
