use nalgebra::{Dyn, OMatrix, OVector, Vector3, U5};
use rayon::prelude::*;

use super::cloud::PointCloud;
use super::kdtree::KdTree;
use crate::error::{Error, Result};

/// Largest design-matrix condition number accepted by the quadric fit.
pub const MAX_CONDITION: f64 = 1e8;

/// Principal curvature data at one point.
///
/// Curvatures are positive where the surface bends away from its outward
/// normal (convex), so a sphere of radius `R` has `r = (1/R, 1/R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrincipalCurvature {
    pub k1: Vector3<f64>,
    pub k2: Vector3<f64>,
    pub r: [f64; 2],
}

/// Deterministic tangent basis `(e1, e2)` with `e1 × e2 = n`.
pub(crate) fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let a = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (a - n * n.dot(&a)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Flips `v` so its first component with magnitude above 1e-9 is positive.
pub(crate) fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    match v.iter().find(|c| c.abs() > 1e-9) {
        Some(c) if *c < 0.0 => -v,
        _ => v,
    }
}

/// Fits `z = a x² + b xy + c y²` over `neighbors` in the normal-aligned
/// frame at `p` and reads the principal curvatures off the Weingarten matrix.
///
/// The fit also carries linear terms `d x + e y`. They soak up the small
/// tilt of a PCA normal, which would otherwise leak into the quadratic
/// coefficients.
pub(crate) fn fit_at(
    index: usize,
    p: &Vector3<f64>,
    normal: &Vector3<f64>,
    neighbors: &[Vector3<f64>],
) -> Result<PrincipalCurvature> {
    let (e1, e2) = tangent_basis(normal);
    let rows = neighbors.len();
    let mut design = OMatrix::<f64, Dyn, U5>::zeros(rows);
    let mut rhs = OVector::<f64, Dyn>::zeros(rows);
    for (i, q) in neighbors.iter().enumerate() {
        let d = q - p;
        let (x, y, z) = (d.dot(&e1), d.dot(&e2), d.dot(normal));
        design[(i, 0)] = x * x;
        design[(i, 1)] = x * y;
        design[(i, 2)] = y * y;
        design[(i, 3)] = x;
        design[(i, 4)] = y;
        rhs[i] = z;
    }
    let singular = design.singular_values();
    let smax = singular.max();
    let smin = singular.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::RankDeficientFit { index, condition });
    }
    // Householder QR: the SVD solver loses several digits here.
    let qr = design.qr();
    let r = qr.r().fixed_rows::<5>(0).into_owned();
    let qtb = (qr.q().transpose() * rhs).fixed_rows::<5>(0).into_owned();
    let coef = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficientFit { index, condition })?;
    let (a, b, c) = (coef[0], coef[1], coef[2]);

    // Shape operator with the convex-positive sign: −[[2a, b], [b, 2c]].
    let (sa, sb, sc) = (-2.0 * a, -b, -2.0 * c);
    let mean = 0.5 * (sa + sc);
    let half_diff = 0.5 * (sa - sc);
    let radius = half_diff.hypot(sb);
    let r1 = mean + radius;
    let r2 = mean - radius;
    let (u, v) = if sb.abs() > 1e-300 {
        let cand1 = (r1 - sc, sb);
        let cand2 = (sb, r1 - sa);
        if cand1.0.hypot(cand1.1) >= cand2.0.hypot(cand2.1) {
            cand1
        } else {
            cand2
        }
    } else if sa >= sc {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let k1 = canonical_sign((e1 * u + e2 * v).normalize());
    let k2 = normal.cross(&k1);
    Ok(PrincipalCurvature { k1, k2, r: [r1, r2] })
}

/// Principal directions and curvatures for every point, given its normal.
pub fn estimate_curvatures(
    cloud: &PointCloud,
    normals: &[Vector3<f64>],
    k_nn: usize,
) -> Result<Vec<PrincipalCurvature>> {
    super::normals::check_neighborhood(cloud, k_nn)?;
    if normals.len() != cloud.len() {
        return Err(Error::invalid(
            "normals",
            format!("{} normals for {} points", normals.len(), cloud.len()),
        ));
    }
    let tree = KdTree::new(&cloud.points);
    (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let nb: Vec<_> = tree
                .nearest_k(&cloud.points[i], k_nn)
                .into_iter()
                .map(|(j, _)| cloud.points[j])
                .collect();
            fit_at(i, &cloud.points[i], &normals[i], &nb)
        })
        .collect()
}
