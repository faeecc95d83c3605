use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::LearningParams;
use crate::contact::{GraspTypeContacts, Selection};
use crate::error::{Error, Result};
use crate::geom::{Bandwidth, Density, Feature, Pose};
use crate::hand::{ConfigModel, HandDescription, Trajectory};
use crate::inference::GraspTypeModel;

pub const ARCHIVE_VERSION: u32 = 1;

/// Numbers per stored particle: position (3), quaternion wxyz (4), curvature (2).
const PARTICLE_STRIDE: usize = 9;

/// Everything training produces, as written to disk.
#[derive(Clone, Debug)]
pub struct ModelArchive {
    pub hand: HandDescription,
    pub params: LearningParams,
    pub grasp_types: Vec<GraspTypeModel>,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    bandwidth: Bandwidth,
    particles: Vec<f64>,
    weights: Vec<f64>,
}

impl From<&Density> for RawDensity {
    fn from(d: &Density) -> Self {
        let mut particles = Vec::with_capacity(d.len() * PARTICLE_STRIDE);
        for f in d.particles() {
            particles.extend_from_slice(&f.pose.to_array());
            particles.extend_from_slice(&f.curvature);
        }
        RawDensity {
            bandwidth: *d.bandwidth(),
            particles,
            weights: d.weights().to_vec(),
        }
    }
}

impl TryFrom<RawDensity> for Density {
    type Error = Error;

    fn try_from(raw: RawDensity) -> Result<Self> {
        if raw.particles.len() % PARTICLE_STRIDE != 0 {
            return Err(Error::invalid(
                "archive",
                format!("particle array length {} is not a multiple of {PARTICLE_STRIDE}", raw.particles.len()),
            ));
        }
        let particles = raw
            .particles
            .chunks_exact(PARTICLE_STRIDE)
            .map(|c| {
                let pose = Pose::from_array(c[..7].try_into().expect("seven pose numbers"))?;
                Feature::try_new(pose, [c[7], c[8]])
            })
            .collect::<Result<Vec<_>>>()?;
        Density::new(particles, raw.weights, raw.bandwidth)
    }
}

#[derive(Serialize, Deserialize)]
struct RawGraspType {
    name: String,
    examples: Vec<String>,
    norms: Vec<Vec<f64>>,
    per_example: Vec<Vec<bool>>,
    per_link: Vec<bool>,
    contact_models: Vec<Option<RawDensity>>,
    config_model: ConfigModel,
    trajectories: Vec<Trajectory>,
}

#[derive(Serialize, Deserialize)]
struct RawArchive {
    format_version: u32,
    hand: HandDescription,
    params: LearningParams,
    grasp_types: Vec<RawGraspType>,
}

impl ModelArchive {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grasp_types.iter().try_for_each(|g| g.validate(&self.hand))
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawArchive {
            format_version: ARCHIVE_VERSION,
            hand: self.hand.clone(),
            params: self.params.clone(),
            grasp_types: self
                .grasp_types
                .iter()
                .map(|g| RawGraspType {
                    name: g.name.clone(),
                    examples: g.examples.clone(),
                    norms: g.norms.clone(),
                    per_example: g.contacts.selection.per_example.clone(),
                    per_link: g.contacts.selection.per_link.clone(),
                    contact_models: g.contacts.models.iter().map(|m| m.as_ref().map(RawDensity::from)).collect(),
                    config_model: g.config.clone(),
                    trajectories: g.trajectories.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("archive serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            format_version: u32,
        }
        let v: Version = serde_json::from_str(text)?;
        if v.format_version != ARCHIVE_VERSION {
            return Err(Error::ArchiveVersion {
                found: v.format_version,
                expected: ARCHIVE_VERSION,
            });
        }
        let raw: RawArchive = serde_json::from_str(text)?;
        let grasp_types = raw
            .grasp_types
            .into_iter()
            .map(|g| {
                let models = g
                    .contact_models
                    .into_iter()
                    .map(|m| m.map(Density::try_from).transpose())
                    .collect::<Result<Vec<_>>>()?;
                Ok(GraspTypeModel {
                    name: g.name,
                    examples: g.examples,
                    norms: g.norms,
                    contacts: GraspTypeContacts {
                        selection: Selection {
                            per_example: g.per_example,
                            per_link: g.per_link,
                        },
                        models,
                    },
                    config: g.config_model,
                    trajectories: g.trajectories,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let archive = ModelArchive {
            hand: raw.hand,
            params: raw.params,
            grasp_types,
        };
        archive.validate()?;
        Ok(archive)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }
}
