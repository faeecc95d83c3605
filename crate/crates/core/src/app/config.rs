use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contact::ReceptiveField;
use crate::error::{Error, Result};
use crate::geom::Bandwidth;
use crate::hand::{ClosingParams, DEFAULT_CONFIG_SIGMA};
use crate::inference::InferenceParams;
use crate::object_model::DEFAULT_PARTICLE_CAP;
use crate::surface::DEFAULT_K_NN;

/// Link-selection threshold: one value shared by all links, or one per link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Eta {
    Shared(f64),
    PerLink(Vec<f64>),
}

impl Default for Eta {
    fn default() -> Self {
        Eta::Shared(0.5)
    }
}

impl Eta {
    pub fn for_links(&self, n_links: usize) -> Result<Vec<f64>> {
        match self {
            Eta::Shared(v) => Ok(vec![*v; n_links]),
            Eta::PerLink(v) if v.len() == n_links => Ok(v.clone()),
            Eta::PerLink(v) => Err(Error::invalid(
                "eta",
                format!("{} thresholds for a hand with {n_links} links", v.len()),
            )),
        }
    }
}

/// Parameters that shape the learned models. Stored in the archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningParams {
    pub receptive_field: ReceptiveField,
    pub eta: Eta,
    pub zeta: f64,
    /// Kernel bandwidth of object models.
    pub object_bandwidth: Bandwidth,
    /// Kernel bandwidth of contact models and query densities.
    pub contact_bandwidth: Bandwidth,
    pub config_sigma: f64,
    pub k_nn: usize,
    /// Object-model particle cap; 0 disables thinning.
    pub particle_cap: usize,
}

impl Default for LearningParams {
    fn default() -> Self {
        let bandwidth = Bandwidth {
            position: 0.004,
            orientation: 400.0,
            curvature: 5.0,
        };
        Self {
            receptive_field: ReceptiveField::default(),
            eta: Eta::default(),
            zeta: 0.5,
            object_bandwidth: bandwidth,
            contact_bandwidth: bandwidth,
            config_sigma: DEFAULT_CONFIG_SIGMA,
            k_nn: DEFAULT_K_NN,
            particle_cap: DEFAULT_PARTICLE_CAP,
        }
    }
}

impl LearningParams {
    pub fn validate(&self) -> Result<()> {
        self.receptive_field.validate()?;
        self.object_bandwidth.validate()?;
        self.contact_bandwidth.validate()?;
        if !(self.zeta.is_finite() && (0.0..1.0).contains(&self.zeta)) {
            return Err(Error::invalid("config", format!("zeta must be in [0, 1), got {}", self.zeta)));
        }
        let etas = match &self.eta {
            Eta::Shared(v) => vec![*v],
            Eta::PerLink(v) => v.clone(),
        };
        if etas.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::invalid("config", "eta must be non-negative"));
        }
        if !(self.config_sigma.is_finite() && self.config_sigma > 0.0) {
            return Err(Error::invalid("config", "config_sigma must be positive"));
        }
        if self.k_nn < 6 {
            return Err(Error::invalid("config", format!("k_nn must be at least 6, got {}", self.k_nn)));
        }
        Ok(())
    }

    pub fn particle_cap(&self) -> Option<usize> {
        (self.particle_cap > 0).then_some(self.particle_cap)
    }
}

/// Every tunable of a run, read from a JSON file. Missing fields take their
/// defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub learning: LearningParams,
    pub closing: ClosingParams,
    pub inference: InferenceParams,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.learning.validate()?;
        self.closing.validate()?;
        self.inference.anneal.validate()?;
        if self.inference.query_kernels == 0 {
            return Err(Error::invalid("config", "query_kernels must be positive"));
        }
        let s = &self.inference.selection;
        if [s.position, s.orientation, s.config].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::invalid("config", "selection scales must be positive"));
        }
        if let Some(b) = &self.inference.workspace {
            if (0..3).any(|k| !(b.min[k] <= b.max[k])) {
                return Err(Error::invalid("config", "workspace min must not exceed max"));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }
}
