//! Object models: uniform-weight kernel densities over a cloud's surface
//! features.

use crate::error::{Error, Result};
use crate::geom::{Bandwidth, Density, Feature};
use crate::surface::SurfaceFeatureSet;

/// Default particle cap applied before contact-model learning.
pub const DEFAULT_PARTICLE_CAP: usize = 5000;

#[derive(Clone, Debug)]
pub struct ObjectModel {
    pub density: Density,
    pub source: String,
}

impl ObjectModel {
    /// One particle per feature, all weights `1/K`.
    pub fn build(features: &SurfaceFeatureSet, bandwidth: Bandwidth, source: impl Into<String>) -> Result<Self> {
        Self::build_capped(features, bandwidth, source, None)
    }

    /// Like [`ObjectModel::build`], first thinning the feature set to at
    /// most `cap` particles by an even stride over the input order.
    pub fn build_capped(
        features: &SurfaceFeatureSet,
        bandwidth: Bandwidth,
        source: impl Into<String>,
        cap: Option<usize>,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyFeatures);
        }
        let particles: Vec<Feature> = match cap {
            Some(cap) if cap > 0 && features.len() > cap => (0..cap)
                .map(|i| features.features[i * features.len() / cap])
                .collect(),
            _ => features.features.clone(),
        };
        Ok(Self {
            density: Density::uniform(particles, bandwidth)?,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Pose;
    use nalgebra::Vector3;

    fn line_features(n: usize) -> SurfaceFeatureSet {
        SurfaceFeatureSet {
            features: (0..n)
                .map(|i| Feature::new(Pose::from_translation(Vector3::new(i as f64 * 0.01, 0.0, 0.0)), [1.0, 0.0]))
                .collect(),
        }
    }

    fn bw() -> Bandwidth {
        Bandwidth::new(0.002, 50.0, 1.0).unwrap()
    }

    #[test]
    fn weights_are_uniform() {
        let om = ObjectModel::build(&line_features(1), bw(), "one").unwrap();
        assert_eq!(om.density.weights(), &[1.0]);
        let om = ObjectModel::build(&line_features(7), bw(), "seven").unwrap();
        for w in om.density.weights() {
            assert!((w - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(
            ObjectModel::build(&SurfaceFeatureSet::default(), bw(), "none"),
            Err(Error::EmptyFeatures)
        ));
    }

    #[test]
    fn density_decays_away_from_isolated_particle() {
        let feats = line_features(1);
        let om = ObjectModel::build(&feats, bw(), "one").unwrap();
        let at = feats.features[0];
        let mut far = at;
        far.pose.position.y += 10.0 * bw().position;
        assert!(om.density.eval(&at) >= om.density.eval(&far));
        let ratio = om.density.log_eval(&far) - om.density.log_eval(&at);
        assert!((ratio + 50.0).abs() < 1e-9);
    }

    #[test]
    fn cap_thins_evenly() {
        let om = ObjectModel::build_capped(&line_features(100), bw(), "c", Some(10)).unwrap();
        assert_eq!(om.len(), 10);
        assert!((om.density.particles()[1].pose.position.x - 0.1).abs() < 1e-12);
        let om = ObjectModel::build_capped(&line_features(5), bw(), "c", Some(10)).unwrap();
        assert_eq!(om.len(), 5);
    }
}
