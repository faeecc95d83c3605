use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::collide::CloudCollider;
use super::description::HandDescription;
use super::state::{HandState, Trajectory};
use crate::error::{Error, Result};
use crate::geom::Pose;

/// Tunables of the kinematic closing generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClosingParams {
    /// A joint stops once its link is nearer than this to the cloud (m).
    pub contact_threshold: f64,
    /// Largest joint change per step (rad).
    pub max_rate: f64,
    /// Steps allowed after the motor ramp ends while waiting for equilibrium.
    pub max_hold_steps: usize,
}

impl Default for ClosingParams {
    fn default() -> Self {
        Self {
            contact_threshold: 0.002,
            max_rate: 0.01,
            max_hold_steps: 1000,
        }
    }
}

impl ClosingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.contact_threshold.is_finite() && self.contact_threshold >= 0.0) {
            return Err(Error::invalid("closing", "contact threshold must be non-negative"));
        }
        if !(self.max_rate.is_finite() && self.max_rate > 0.0) {
            return Err(Error::invalid("closing", "joint rate must be positive"));
        }
        Ok(())
    }
}

/// Output of [`close_against_cloud`].
#[derive(Clone, Debug)]
pub struct Closing {
    pub trajectory: Trajectory,
    /// Joints stopped by contact.
    pub frozen: Vec<bool>,
}

impl Closing {
    pub fn any_contact(&self) -> bool {
        self.frozen.iter().any(|f| *f)
    }
}

/// Kinematically closes the hand along a wrist path and motor ramp.
///
/// Joints start at the synergy targets of the first motor value and chase
/// the current targets at a capped rate. A joint freezes when its link comes
/// within the contact threshold of the cloud, or when moving it would push
/// any link it carries deeper into the cloud. After the ramp the last wrist
/// pose and motor value are held until every joint is frozen or on target.
pub fn close_against_cloud(
    hand: &HandDescription,
    wrist: &[Pose],
    motor: &[f64],
    collider: &CloudCollider,
    params: &ClosingParams,
) -> Result<Closing> {
    params.validate()?;
    if wrist.len() < 2 || wrist.len() != motor.len() {
        return Err(Error::invalid(
            "closing",
            format!("need matching wrist and motor paths of length ≥ 2, got {} and {}", wrist.len(), motor.len()),
        ));
    }
    if let Some(m) = motor.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::invalid("closing", format!("motor signal {m} outside [0, 1]")));
    }
    let dof = hand.dof();
    let subtrees: Vec<Vec<usize>> = (0..dof).map(|j| hand.subtree(hand.joint_link(j))).collect();
    let mut config = hand.synergy_targets(motor[0]);
    let mut frozen = vec![false; dof];
    let mut states = vec![HandState::new(wrist[0], config.clone(), motor[0])];

    let subtree_penetration = |w: &Pose, c: &[f64], j: usize| -> f64 {
        let poses = hand.forward_kinematics_unchecked(w, c);
        subtrees[j]
            .iter()
            .map(|&l| collider.penetration(&hand.links()[l].geometry, &poses[l]))
            .fold(0.0, f64::max)
    };

    let last = wrist.len() - 1;
    let mut step = 1;
    loop {
        let k = step.min(last);
        let (w, m) = (wrist[k], motor[k]);
        let targets = hand.synergy_targets(m);
        let poses = hand.forward_kinematics_unchecked(&w, &config);
        for j in 0..dof {
            if !frozen[j] {
                let link = hand.joint_link(j);
                let d = collider.min_signed_distance(&hand.links()[link].geometry, &poses[link], params.contact_threshold);
                frozen[j] = d < params.contact_threshold;
            }
        }
        if step > last && (0..dof).all(|j| frozen[j] || config[j] == targets[j]) {
            break;
        }
        if step > last + params.max_hold_steps {
            log::warn!("closing stopped after {} hold steps without reaching equilibrium", params.max_hold_steps);
            break;
        }
        for j in 0..dof {
            if frozen[j] || config[j] == targets[j] {
                continue;
            }
            let before = subtree_penetration(&w, &config, j);
            let old = config[j];
            let delta = (targets[j] - old).clamp(-params.max_rate, params.max_rate);
            config[j] = if (targets[j] - old).abs() <= params.max_rate {
                targets[j]
            } else {
                old + delta
            };
            if subtree_penetration(&w, &config, j) > before {
                config[j] = old;
                frozen[j] = true;
            }
        }
        states.push(HandState::new(w, config.clone(), m));
        step += 1;
    }
    if !frozen.iter().any(|f| *f) {
        log::warn!("closing reached equilibrium without touching the cloud");
    }
    Ok(Closing {
        trajectory: Trajectory::from_states(states)?,
        frozen,
    })
}

/// Wrist path and motor ramp for a straight approach followed by closing.
///
/// The wrist starts `approach_distance` behind `grasp` along the palm normal
/// (wrist −z) and moves in over `approach_steps` with the motor at 0, then
/// the motor ramps to 1 over `close_steps` with the wrist still.
pub fn approach_and_close(
    grasp: &Pose,
    approach_distance: f64,
    approach_steps: usize,
    close_steps: usize,
) -> (Vec<Pose>, Vec<f64>) {
    let back = grasp.orientation * Vector3::new(0.0, 0.0, -approach_distance);
    let mut wrist = Vec::with_capacity(approach_steps + close_steps + 1);
    let mut motor = Vec::with_capacity(wrist.capacity());
    for i in 0..=approach_steps {
        let f = if approach_steps == 0 { 1.0 } else { i as f64 / approach_steps as f64 };
        wrist.push(Pose::new(grasp.position + back * (1.0 - f), grasp.orientation));
        motor.push(0.0);
    }
    for i in 1..=close_steps {
        wrist.push(*grasp);
        motor.push(i as f64 / close_steps as f64);
    }
    (wrist, motor)
}
