use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::surface::PointCloud;

/// Analytic shapes centred on the origin.
///
/// Dimensions: sphere `[r]`, cylinder `[r, h]` along z, box `[x, y, z]` full
/// edge lengths, ellipsoid `[a, b, c]` semi-axes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere { radius: f64 },
    Cylinder { radius: f64, height: f64 },
    Box { size: [f64; 3] },
    Ellipsoid { axes: [f64; 3] },
}

impl Shape {
    pub fn from_kind(kind: &str, dims: &[f64]) -> Result<Self> {
        let shape = match (kind, dims) {
            ("sphere", [r]) => Shape::Sphere { radius: *r },
            ("cylinder", [r, h]) => Shape::Cylinder { radius: *r, height: *h },
            ("box", [x, y, z]) => Shape::Box { size: [*x, *y, *z] },
            ("ellipsoid", [a, b, c]) => Shape::Ellipsoid { axes: [*a, *b, *c] },
            ("sphere" | "cylinder" | "box" | "ellipsoid", _) => {
                return Err(Error::invalid("shape", format!("{kind} cannot take {} dimensions", dims.len())))
            }
            _ => return Err(Error::invalid("shape", format!("unknown shape '{kind}'"))),
        };
        shape.validate()?;
        Ok(shape)
    }

    fn dims(&self) -> Vec<f64> {
        match self {
            Shape::Sphere { radius } => vec![*radius],
            Shape::Cylinder { radius, height } => vec![*radius, *height],
            Shape::Box { size } => size.to_vec(),
            Shape::Ellipsoid { axes } => axes.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims().iter().all(|d| d.is_finite() && *d > 0.0) {
            Ok(())
        } else {
            Err(Error::invalid("shape", format!("dimensions must be positive, got {:?}", self.dims())))
        }
    }

    /// Total surface area. The ellipsoid uses Thomsen's approximation
    /// (relative error below 1.1%).
    pub fn area(&self) -> f64 {
        match *self {
            Shape::Sphere { radius } => 4.0 * PI * radius * radius,
            Shape::Cylinder { radius, height } => 2.0 * PI * radius * (radius + height),
            Shape::Box { size: [x, y, z] } => 2.0 * (x * y + y * z + x * z),
            Shape::Ellipsoid { axes: [a, b, c] } => {
                let p = 1.6075;
                let m = ((a * b).powf(p) + (a * c).powf(p) + (b * c).powf(p)) / 3.0;
                4.0 * PI * m.powf(1.0 / p)
            }
        }
    }

    /// Signed distance-like residual: zero on the surface. Exact distance for
    /// sphere, cylinder and box; the normalized implicit value for the
    /// ellipsoid.
    pub fn surface_residual(&self, p: &Vector3<f64>) -> f64 {
        match *self {
            Shape::Sphere { radius } => p.norm() - radius,
            Shape::Cylinder { radius, height } => {
                let radial = p.xy().norm() - radius;
                let axial = p.z.abs() - 0.5 * height;
                let outside = Vector3::new(radial.max(0.0), axial.max(0.0), 0.0).norm();
                outside + radial.max(axial).min(0.0)
            }
            Shape::Box { size } => {
                let q = p.abs() - Vector3::from(size) * 0.5;
                q.map(|v| v.max(0.0)).norm() + q.max().min(0.0)
            }
            Shape::Ellipsoid { axes: [a, b, c] } => {
                let v = Vector3::new(p.x / a, p.y / b, p.z / c);
                v.norm() - 1.0
            }
        }
    }

    /// A uniformly distributed surface point and its outward normal.
    pub fn sample_surface<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vector3<f64>, Vector3<f64>) {
        match *self {
            Shape::Sphere { radius } => {
                let n = unit_vector(rng);
                (n * radius, n)
            }
            Shape::Cylinder { radius, height } => {
                let side = 2.0 * PI * radius * height;
                let cap = PI * radius * radius;
                let u = rng.random::<f64>() * (side + 2.0 * cap);
                if u < side {
                    let phi = rng.random::<f64>() * 2.0 * PI;
                    let z = (rng.random::<f64>() - 0.5) * height;
                    let n = Vector3::new(phi.cos(), phi.sin(), 0.0);
                    (Vector3::new(radius * phi.cos(), radius * phi.sin(), z), n)
                } else {
                    let top = u < side + cap;
                    let r = radius * rng.random::<f64>().sqrt();
                    let phi = rng.random::<f64>() * 2.0 * PI;
                    let z = if top { 0.5 * height } else { -0.5 * height };
                    let n = Vector3::new(0.0, 0.0, z.signum());
                    (Vector3::new(r * phi.cos(), r * phi.sin(), z), n)
                }
            }
            Shape::Box { size: [x, y, z] } => {
                let faces = [y * z, y * z, x * z, x * z, x * y, x * y];
                let total: f64 = faces.iter().sum();
                let mut u = rng.random::<f64>() * total;
                let mut face = 5;
                for (i, a) in faces.iter().enumerate() {
                    if u < *a {
                        face = i;
                        break;
                    }
                    u -= a;
                }
                let axis = face / 2;
                let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
                let half = Vector3::new(x, y, z) * 0.5;
                let mut p = Vector3::new(
                    (rng.random::<f64>() - 0.5) * x,
                    (rng.random::<f64>() - 0.5) * y,
                    (rng.random::<f64>() - 0.5) * z,
                );
                p[axis] = sign * half[axis];
                let mut n = Vector3::zeros();
                n[axis] = sign;
                (p, n)
            }
            Shape::Ellipsoid { axes: [a, b, c] } => {
                // Rejection on the sphere parameterization by the area element.
                let g_max = (b * c).max(a * c).max(a * b);
                loop {
                    let u = unit_vector(rng);
                    let g = Vector3::new(b * c * u.x, a * c * u.y, a * b * u.z).norm();
                    if rng.random::<f64>() * g_max <= g {
                        let p = Vector3::new(a * u.x, b * u.y, c * u.z);
                        let n = Vector3::new(p.x / (a * a), p.y / (b * b), p.z / (c * c)).normalize();
                        return (p, n);
                    }
                }
            }
        }
    }
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

impl FromStr for Shape {
    type Err = Error;

    /// Parses `kind:d1,d2,...`, e.g. `sphere:0.05`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, dims) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid("shape", format!("expected kind:dims, got '{s}'")))?;
        Shape::from_kind(kind, &parse_list(dims)?)
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid("number list", format!("'{v}' is not a number")))
        })
        .collect()
}

/// Settings of a synthetic scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanParams {
    /// Points per square meter of surface, before culling.
    pub density: f64,
    pub viewpoint: Vector3<f64>,
    /// Standard deviation of Gaussian noise added to each coordinate.
    pub noise: f64,
    /// Keep back-facing points too.
    pub full_view: bool,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            density: 1e5,
            viewpoint: Vector3::new(0.0, 0.0, 1.0),
            noise: 0.0,
            full_view: false,
        }
    }
}

/// Samples a synthetic depth-camera style cloud of `shape`.
///
/// Points are drawn uniformly over the whole surface at the given areal
/// density and moved by `placement`, then those facing away from the
/// viewpoint are removed unless `full_view` is set.
pub fn scan<R: Rng + ?Sized>(shape: &Shape, placement: &Pose, params: &ScanParams, rng: &mut R) -> Result<PointCloud> {
    shape.validate()?;
    if !(params.density.is_finite() && params.density > 0.0) {
        return Err(Error::invalid("scan", "density must be positive"));
    }
    if !(params.noise.is_finite() && params.noise >= 0.0) {
        return Err(Error::invalid("scan", "noise must be non-negative"));
    }
    let total = (shape.area() * params.density).round() as usize;
    let mut points = Vec::with_capacity(total);
    for _ in 0..total {
        let (p, n) = shape.sample_surface(rng);
        let p = placement.transform_point(&p);
        let n = placement.orientation * n;
        if !params.full_view && n.dot(&(params.viewpoint - p)) <= 0.0 {
            continue;
        }
        let jitter = if params.noise > 0.0 {
            Vector3::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ) * params.noise
        } else {
            Vector3::zeros()
        };
        points.push(p + jitter);
    }
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    PointCloud::new(points, params.viewpoint)
}
