//! Factor densities of the feature kernel: isotropic Gaussians for position
//! and curvature, and the antipodal von Mises-Fisher density on unit
//! quaternions. Everything is computed as a log density.

use std::f64::consts::{LN_2, PI};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::pose::{quat_dot, renormalize};
use crate::error::{Error, Result};

/// Kernel bandwidth `(σ_p, σ_q, σ_r)`.
///
/// `position` is a standard deviation in meters, `orientation` is a vMF
/// concentration (larger is tighter), `curvature` a standard deviation in 1/m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bandwidth {
    pub position: f64,
    pub orientation: f64,
    pub curvature: f64,
}

impl Bandwidth {
    pub fn new(position: f64, orientation: f64, curvature: f64) -> Result<Self> {
        let bw = Self {
            position,
            orientation,
            curvature,
        };
        bw.validate()?;
        Ok(bw)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("position", self.position),
            ("orientation", self.orientation),
            ("curvature", self.curvature),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("bandwidth", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Log density of an isotropic `dim`-variate Gaussian at squared distance
/// `dist_sq` from its mean.
#[inline]
pub fn log_gaussian(dist_sq: f64, sigma: f64, dim: u32) -> f64 {
    -0.5 * dist_sq / (sigma * sigma) - 0.5 * f64::from(dim) * (2.0 * PI * sigma * sigma).ln()
}

/// `ln I₁(x)` for `x > 0`: power series below 20, Hankel asymptotic above.
pub fn log_bessel_i1(x: f64) -> f64 {
    assert!(x > 0.0, "log_bessel_i1 needs a positive argument");
    if x < 20.0 {
        let half = 0.5 * x;
        let q = half * half;
        let mut term = half;
        let mut sum = term;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + 1.0));
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum.ln()
    } else {
        // I_ν(x) ~ e^x / √(2πx) · Σ_k (−1)^k a_k(ν) / x^k, μ = 4ν² = 4.
        let mu = 4.0;
        let mut term = 1.0_f64;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = f64::from(k);
            let odd = 2.0 * kf - 1.0;
            let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        x - 0.5 * (2.0 * PI * x).ln() + sum.ln()
    }
}

/// `ln C₄(κ)`: normalizer making the antipodal vMF pair integrate to one
/// over S³, `C₄ = κ / ((2π)² I₁(κ))`.
pub fn log_vmf_normalizer(kappa: f64) -> f64 {
    kappa.ln() - 2.0 * (2.0 * PI).ln() - log_bessel_i1(kappa)
}

/// `ln cosh(x)` without overflow.
#[inline]
pub fn log_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Log of the antipodal vMF density Θ(q | μ, κ).
#[inline]
pub fn log_theta(q: &UnitQuaternion<f64>, mean: &UnitQuaternion<f64>, kappa: f64) -> f64 {
    log_vmf_normalizer(kappa) + log_cosh(kappa * quat_dot(mean, q))
}

/// Θ(q | μ, κ) = C₄(κ) (e^{κ μᵀq} + e^{−κ μᵀq}) / 2.
pub fn theta(q: &UnitQuaternion<f64>, mean: &UnitQuaternion<f64>, kappa: f64) -> f64 {
    log_theta(q, mean, kappa).exp()
}

/// Draws from the antipodal vMF around `mean`: a tangent Gaussian with
/// per-axis standard deviation `1/√κ`, mapped onto S³ and sign-flipped
/// with probability one half.
pub fn sample_antipodal_vmf<R: Rng + ?Sized>(
    mean: &UnitQuaternion<f64>,
    kappa: f64,
    rng: &mut R,
) -> UnitQuaternion<f64> {
    let scale = 1.0 / kappa.sqrt();
    let v = Vector3::new(
        rng.sample::<f64, _>(StandardNormal) * scale,
        rng.sample::<f64, _>(StandardNormal) * scale,
        rng.sample::<f64, _>(StandardNormal) * scale,
    );
    let q = mean.into_inner() * sphere_exp(&v);
    let q = if rng.random::<bool>() { -q } else { q };
    renormalize(q)
}

/// Exponential map of a tangent vector at the identity of S³.
pub(crate) fn sphere_exp(v: &Vector3<f64>) -> Quaternion<f64> {
    let angle = v.norm();
    let sinc = if angle < 1e-8 { 1.0 - angle * angle / 6.0 } else { angle.sin() / angle };
    Quaternion::from_parts(angle.cos(), v * sinc)
}

/// Numerically stable `ln Σ exp(xᵢ)`; `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}
