use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::kernel::log_gaussian;
use crate::geom::log_sum_exp;

/// Equal-weight mixture of isotropic Gaussians over joint vectors, one
/// component per example equilibrium configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfigModel", into = "RawConfigModel")]
pub struct ConfigModel {
    means: Vec<Vec<f64>>,
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawConfigModel {
    sigma: f64,
    means: Vec<Vec<f64>>,
}

impl TryFrom<RawConfigModel> for ConfigModel {
    type Error = Error;

    fn try_from(raw: RawConfigModel) -> Result<Self> {
        ConfigModel::new(raw.means, raw.sigma)
    }
}

impl From<ConfigModel> for RawConfigModel {
    fn from(m: ConfigModel) -> Self {
        RawConfigModel {
            sigma: m.sigma,
            means: m.means,
        }
    }
}

pub const DEFAULT_CONFIG_SIGMA: f64 = 0.1;

impl ConfigModel {
    pub fn new(means: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::invalid("configuration model", "needs at least one example"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("configuration model", format!("sigma must be positive, got {sigma}")));
        }
        let dim = means[0].len();
        if means.iter().any(|m| m.len() != dim || m.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("configuration model", "means must be finite and of equal length"));
        }
        Ok(Self { means, sigma })
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn log_eval(&self, config: &[f64]) -> f64 {
        if config.len() != self.dim() {
            return f64::NEG_INFINITY;
        }
        let log_w = -(self.means.len() as f64).ln();
        let dim = self.dim() as u32;
        log_sum_exp(self.means.iter().map(|m| {
            let d2: f64 = m.iter().zip(config).map(|(a, b)| (a - b) * (a - b)).sum();
            log_w + log_gaussian(d2, self.sigma, dim)
        }))
    }

    pub fn eval(&self, config: &[f64]) -> f64 {
        self.log_eval(config).exp()
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.means.len() as f64;
        (0..self.dim())
            .map(|k| self.means.iter().map(|m| m[k]).sum::<f64>() / n)
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let m = &self.means[rng.random_range(0..self.means.len())];
        m.iter()
            .map(|v| v + self.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn single_component_is_a_gaussian() {
        let m = ConfigModel::new(vec![vec![0.2, 0.4]], 0.1).unwrap();
        let at_mean = 1.0 / (2.0 * PI * 0.01);
        assert!((m.eval(&[0.2, 0.4]) - at_mean).abs() < 1e-9 * at_mean);
        let off = at_mean * (-0.5f64).exp();
        assert!((m.eval(&[0.3, 0.4]) - off).abs() < 1e-9 * off);
    }

    #[test]
    fn modes_dominate_five_sigma_away() {
        let m = ConfigModel::new(vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]], 0.1).unwrap();
        for mean in m.means() {
            for axis in 0..3 {
                for sign in [-1.0, 1.0] {
                    let mut x = mean.clone();
                    x[axis] += sign * 0.5;
                    assert!(m.eval(mean) >= m.eval(&x));
                }
            }
        }
    }

    #[test]
    fn sample_mean_is_mixture_mean() {
        let m = ConfigModel::new(vec![vec![0.0, 0.5], vec![1.0, 0.1], vec![0.4, 0.9]], 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut acc = [0.0; 2];
        for _ in 0..n {
            let s = m.sample(&mut rng);
            acc[0] += s[0];
            acc[1] += s[1];
        }
        let want = m.mean();
        // Per-coordinate standard deviation of one draw.
        for k in 0..2 {
            let spread: f64 = m.means().iter().map(|c| (c[k] - want[k]).powi(2)).sum::<f64>() / 3.0;
            let sd = (spread + 0.01).sqrt();
            assert!((acc[k] / n as f64 - want[k]).abs() < 4.0 * sd / (n as f64).sqrt());
        }
    }

    #[test]
    fn validation_and_serde() {
        assert!(ConfigModel::new(vec![], 0.1).is_err());
        assert!(ConfigModel::new(vec![vec![0.0]], 0.0).is_err());
        assert!(ConfigModel::new(vec![vec![0.0], vec![0.0, 1.0]], 0.1).is_err());
        let m = ConfigModel::new(vec![vec![0.1, 0.2]], 0.1).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<ConfigModel>(&s).unwrap(), m);
        assert_eq!(m.log_eval(&[0.1]), f64::NEG_INFINITY);
    }
}
