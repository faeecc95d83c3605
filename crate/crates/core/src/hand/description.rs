use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use nalgebra::{Matrix3, Rotation3, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::contact::LinkGeometry;
use crate::error::{Error, Result};
use crate::geom::Pose;

/// Revolute joint driving a link about an axis of its own frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joint {
    pub axis: Unit<Vector3<f64>>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub name: String,
    pub parent: Option<usize>,
    /// Pose of the link frame in the parent frame (the wrist frame for the palm)
    /// at zero joint angle.
    pub mount: Pose,
    pub joint: Option<Joint>,
    pub geometry: LinkGeometry,
}

/// Kinematic tree of rigid links, driven by a single motor through a linear
/// synergy. Link 0 is the palm and carries no joint; joints are numbered in
/// link order.
#[derive(Clone, Debug, PartialEq)]
pub struct HandDescription {
    links: Vec<Link>,
    synergy: Vec<f64>,
    joint_links: Vec<usize>,
    joint_of_link: Vec<Option<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawLink {
    name: String,
    parent: Option<usize>,
    mount_pose: [f64; 7],
    joint_axis: Option<[f64; 3]>,
    limits: Option<[f64; 2]>,
    geometry: LinkGeometry,
}

#[derive(Serialize, Deserialize)]
struct RawHand {
    links: Vec<RawLink>,
    synergy: Vec<f64>,
}

impl HandDescription {
    pub fn new(links: Vec<Link>, synergy: Vec<f64>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::invalid("hand", "needs at least a palm link"));
        }
        if links[0].parent.is_some() || links[0].joint.is_some() {
            return Err(Error::invalid("hand", "link 0 must be the palm: no parent, no joint"));
        }
        let mut joint_links = Vec::new();
        let mut joint_of_link = Vec::with_capacity(links.len());
        for (i, link) in links.iter().enumerate() {
            link.geometry.validate()?;
            if i > 0 {
                match link.parent {
                    Some(p) if p < i => {}
                    _ => {
                        return Err(Error::invalid(
                            "hand",
                            format!("link {i} ({}) must name an earlier link as parent", link.name),
                        ))
                    }
                }
            }
            match &link.joint {
                Some(j) => {
                    if !(j.lower.is_finite() && j.upper.is_finite() && j.lower <= j.upper) {
                        return Err(Error::invalid(
                            "hand",
                            format!("link {i} has bad limits [{}, {}]", j.lower, j.upper),
                        ));
                    }
                    joint_of_link.push(Some(joint_links.len()));
                    joint_links.push(i);
                }
                None => joint_of_link.push(None),
            }
        }
        if synergy.len() != joint_links.len() {
            return Err(Error::invalid(
                "hand",
                format!("{} synergy coefficients for {} joints", synergy.len(), joint_links.len()),
            ));
        }
        if synergy.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("hand", "synergy coefficients must be finite"));
        }
        Ok(Self {
            links,
            synergy,
            joint_links,
            joint_of_link,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_raw(serde_json::from_str(text)?)
    }

    fn from_raw(raw: RawHand) -> Result<Self> {
        let links = raw
            .links
            .into_iter()
            .map(|l| {
                let joint = match (l.joint_axis, l.limits) {
                    (None, _) => None,
                    (Some(axis), limits) => {
                        let v = Vector3::from(axis);
                        if !(v.iter().all(|c| c.is_finite()) && v.norm() > 1e-12) {
                            return Err(Error::invalid("hand", format!("link {} has a zero joint axis", l.name)));
                        }
                        let [lower, upper] = limits.ok_or_else(|| {
                            Error::invalid("hand", format!("jointed link {} has no limits", l.name))
                        })?;
                        Some(Joint {
                            axis: Unit::new_normalize(v),
                            lower,
                            upper,
                        })
                    }
                };
                Ok(Link {
                    name: l.name,
                    parent: l.parent,
                    mount: Pose::from_array(l.mount_pose)?,
                    joint,
                    geometry: l.geometry,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(links, raw.synergy)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    fn raw(&self) -> RawHand {
        RawHand {
            links: self
                .links
                .iter()
                .map(|l| RawLink {
                    name: l.name.clone(),
                    parent: l.parent,
                    mount_pose: l.mount.to_array(),
                    joint_axis: l.joint.map(|j| [j.axis.x, j.axis.y, j.axis.z]),
                    limits: l.joint.map(|j| [j.lower, j.upper]),
                    geometry: l.geometry,
                })
                .collect(),
            synergy: self.synergy.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.raw()).expect("hand description serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    /// Configuration dimension: the number of jointed links.
    pub fn dof(&self) -> usize {
        self.joint_links.len()
    }

    pub fn synergy(&self) -> &[f64] {
        &self.synergy
    }

    /// Link driven by joint `j`.
    pub fn joint_link(&self, j: usize) -> usize {
        self.joint_links[j]
    }

    pub fn joint(&self, j: usize) -> &Joint {
        self.links[self.joint_links[j]].joint.as_ref().expect("joint link has a joint")
    }

    /// `link` and every link below it in the tree.
    pub fn subtree(&self, link: usize) -> Vec<usize> {
        let mut inside = vec![false; self.links.len()];
        inside[link] = true;
        for i in link + 1..self.links.len() {
            if let Some(p) = self.links[i].parent {
                inside[i] = inside[p];
            }
        }
        (0..self.links.len()).filter(|i| inside[*i]).collect()
    }

    pub fn check_config(&self, config: &[f64]) -> Result<()> {
        if config.len() != self.dof() {
            return Err(Error::DimensionMismatch {
                expected: self.dof(),
                got: config.len(),
            });
        }
        for (j, v) in config.iter().enumerate() {
            let joint = self.joint(j);
            if !(v.is_finite() && *v >= joint.lower && *v <= joint.upper) {
                return Err(Error::JointLimit {
                    joint: j,
                    value: *v,
                    lo: joint.lower,
                    hi: joint.upper,
                });
            }
        }
        Ok(())
    }

    pub fn clamp_config(&self, config: &mut [f64]) {
        for (j, v) in config.iter_mut().enumerate() {
            let joint = self.joint(j);
            *v = v.clamp(joint.lower, joint.upper);
        }
    }

    /// World pose of every link for wrist pose `wrist` and joint vector
    /// `config`, after checking dimension and limits.
    pub fn forward_kinematics(&self, wrist: &Pose, config: &[f64]) -> Result<Vec<Pose>> {
        self.check_config(config)?;
        Ok(self.forward_kinematics_unchecked(wrist, config))
    }

    /// Forward kinematics without limit checks. Panics if `config` is shorter
    /// than the configuration dimension.
    pub fn forward_kinematics_unchecked(&self, wrist: &Pose, config: &[f64]) -> Vec<Pose> {
        let mut poses: Vec<Pose> = Vec::with_capacity(self.links.len());
        for (i, link) in self.links.iter().enumerate() {
            let base = match link.parent {
                Some(p) => poses[p],
                None => *wrist,
            };
            let mut pose = base.compose(&link.mount);
            if let (Some(joint), Some(j)) = (&link.joint, self.joint_of_link[i]) {
                let turn = UnitQuaternion::from_axis_angle(&joint.axis, config[j]);
                pose = pose.compose(&Pose::from_rotation(turn));
            }
            poses.push(pose);
        }
        poses
    }

    /// Free-space joint targets `clamp(synergy_j · motor)` for a motor signal
    /// in `[0, 1]`.
    pub fn synergy_targets(&self, motor: f64) -> Vec<f64> {
        let motor = motor.clamp(0.0, 1.0);
        let mut targets: Vec<f64> = self.synergy.iter().map(|s| s * motor).collect();
        self.clamp_config(&mut targets);
        targets
    }

    /// A palm and two opposing two-phalanx fingers, one motor, unit synergy.
    ///
    /// The palm is a 6 × 12 × 2 cm box whose +z face looks at the object.
    /// Fingers stand on that face at `y = ±5 cm` and curl towards each other.
    pub fn default_two_finger() -> Self {
        let palm = Link {
            name: "palm".into(),
            parent: None,
            mount: Pose::identity(),
            joint: None,
            geometry: LinkGeometry::Box { size: [0.06, 0.12, 0.02] },
        };
        let limits = (0.0, FRAC_PI_2);
        let radius = 0.008;
        let (proximal_len, distal_len) = (0.05, 0.04);
        let mut links = vec![palm];
        // Finger frames have x along the finger and z along the joint axis.
        let finger_frames = [
            (0.05, Matrix3::from_columns(&[Vector3::z(), -Vector3::y(), Vector3::x()])),
            (-0.05, Matrix3::from_columns(&[Vector3::z(), Vector3::y(), -Vector3::x()])),
        ];
        for (k, (y, frame)) in finger_frames.into_iter().enumerate() {
            let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(frame));
            let joint = Some(Joint {
                axis: Vector3::z_axis(),
                lower: limits.0,
                upper: limits.1,
            });
            let proximal = links.len();
            links.push(Link {
                name: format!("finger{}_proximal", k + 1),
                parent: Some(0),
                mount: Pose::new(Vector3::new(0.0, y, 0.01), rot),
                joint,
                geometry: LinkGeometry::Capsule {
                    radius,
                    length: proximal_len,
                },
            });
            links.push(Link {
                name: format!("finger{}_distal", k + 1),
                parent: Some(proximal),
                mount: Pose::from_translation(Vector3::new(proximal_len, 0.0, 0.0)),
                joint,
                geometry: LinkGeometry::Capsule {
                    radius,
                    length: distal_len,
                },
            });
        }
        Self::new(links, vec![1.0; 4]).expect("default hand is valid")
    }
}

impl Serialize for HandDescription {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for HandDescription {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HandDescription::from_raw(RawHand::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}
