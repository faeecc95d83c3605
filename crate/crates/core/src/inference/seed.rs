use rand::Rng;

use super::model::GraspTypeModel;
use super::query::QueryDensity;
use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::hand::{HandDescription, HandState};

/// Attempts at drawing an in-limit configuration before giving up.
pub const SEED_ATTEMPTS: usize = 100;

/// A seeded equilibrium grasp and how it was made.
#[derive(Clone, Debug)]
pub struct Seed {
    pub state: HandState,
    pub example: usize,
    pub link: usize,
}

/// Places the wrist so that link `link` lands exactly on `target` for joint
/// vector `config`.
pub fn wrist_for_link(hand: &HandDescription, link: usize, target: &Pose, config: &[f64]) -> Pose {
    let at_identity = hand.forward_kinematics_unchecked(&Pose::identity(), config);
    target.compose(&at_identity[link].inverse())
}

/// Seeds one equilibrium grasp.
///
/// Picks an example uniformly among those with at least one modelled link
/// flagged in contact, a seed link uniformly among those, a link pose from
/// the link's query density and a joint vector from the configuration
/// model. The wrist then follows from the seed link pose. The motor signal
/// is the example's equilibrium value.
pub fn seed_grasp<R: Rng + ?Sized>(
    model: &GraspTypeModel,
    queries: &[QueryDensity],
    hand: &HandDescription,
    rng: &mut R,
) -> Result<Seed> {
    let usable: Vec<(usize, Vec<usize>)> = (0..model.num_examples())
        .map(|n| {
            let links = model
                .contacts
                .links_for_example(n)
                .into_iter()
                .filter(|l| queries.iter().any(|q| q.link() == *l))
                .collect::<Vec<_>>();
            (n, links)
        })
        .filter(|(_, links)| !links.is_empty())
        .collect();
    if usable.is_empty() {
        return Err(Error::NoContactModels {
            grasp_type: model.name.clone(),
        });
    }
    let (example, links) = &usable[rng.random_range(0..usable.len())];
    let link = links[rng.random_range(0..links.len())];
    let query = queries.iter().find(|q| q.link() == link).expect("query exists for usable link");
    let target = query.sample(rng);
    let mut attempts = 0;
    let config = loop {
        let c = model.config.sample(rng);
        if hand.check_config(&c).is_ok() {
            break c;
        }
        attempts += 1;
        if attempts >= SEED_ATTEMPTS {
            return Err(Error::SeedRetries { attempts });
        }
    };
    let wrist = wrist_for_link(hand, link, &target, &config);
    let motor = model.trajectories[*example].equilibrium().motor;
    Ok(Seed {
        state: HandState::new(wrist, config, motor),
        example: *example,
        link,
    })
}
