use std::path::Path;

use serde::{Deserialize, Serialize};

use super::description::HandDescription;
use crate::error::{Error, Result};
use crate::geom::Pose;

/// Wrist pose, joint vector and motor signal at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HandState {
    #[serde(rename = "hw")]
    pub wrist: Pose,
    #[serde(rename = "hc")]
    pub config: Vec<f64>,
    #[serde(rename = "hm")]
    pub motor: f64,
}

impl HandState {
    pub fn new(wrist: Pose, config: Vec<f64>, motor: f64) -> Self {
        Self { wrist, config, motor }
    }

    pub fn validate(&self, hand: &HandDescription) -> Result<()> {
        hand.check_config(&self.config)?;
        if !(0.0..=1.0).contains(&self.motor) {
            return Err(Error::invalid("hand state", format!("motor signal {} outside [0, 1]", self.motor)));
        }
        Ok(())
    }

    pub fn link_poses(&self, hand: &HandDescription) -> Vec<Pose> {
        hand.forward_kinematics_unchecked(&self.wrist, &self.config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TimedState {
    t: f64,
    #[serde(flatten)]
    state: HandState,
}

#[derive(Serialize, Deserialize)]
struct RawTrajectory {
    states: Vec<TimedState>,
}

/// Reach-to-grasp trajectory. The last state is the equilibrium grasp.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<HandState>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<HandState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::invalid("trajectory", format!("needs at least 2 states, got {}", states.len())));
        }
        if times.len() != states.len() {
            return Err(Error::invalid(
                "trajectory",
                format!("{} times for {} states", times.len(), states.len()),
            ));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("trajectory", "times must be finite and strictly increasing"));
        }
        let dim = states[0].config.len();
        if states.iter().any(|s| s.config.len() != dim) {
            return Err(Error::invalid("trajectory", "states disagree on configuration dimension"));
        }
        Ok(Self { times, states })
    }

    /// States at unit time steps `0, 1, 2, …`.
    pub fn from_states(states: Vec<HandState>) -> Result<Self> {
        let times = (0..states.len()).map(|t| t as f64).collect();
        Self::new(times, states)
    }

    pub fn validate(&self, hand: &HandDescription) -> Result<()> {
        self.states.iter().try_for_each(|s| s.validate(hand))
    }

    /// Clamps every state's joints into the hand's limits.
    pub fn clamp_configs(&mut self, hand: &HandDescription) {
        for s in &mut self.states {
            hand.clamp_config(&mut s.config);
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[HandState] {
        &self.states
    }

    pub fn equilibrium(&self) -> &HandState {
        self.states.last().expect("trajectory has at least two states")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawTrajectory = serde_json::from_str(text)?;
        let (times, states) = raw.states.into_iter().map(|s| (s.t, s.state)).unzip();
        Self::new(times, states)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.raw()).expect("trajectory serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.raw()).expect("trajectory serializes")
    }

    fn raw(&self) -> RawTrajectory {
        RawTrajectory {
            states: self
                .times
                .iter()
                .zip(&self.states)
                .map(|(t, s)| TimedState { t: *t, state: s.clone() })
                .collect(),
        }
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

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.raw().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trajectory {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTrajectory::deserialize(d)?;
        let (times, states) = raw.states.into_iter().map(|s| (s.t, s.state)).unzip();
        Trajectory::new(times, states).map_err(serde::de::Error::custom)
    }
}
