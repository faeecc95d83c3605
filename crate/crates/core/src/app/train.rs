use rayon::prelude::*;

use super::archive::ModelArchive;
use super::config::LearningParams;
use crate::contact::{learn_contact_model, mix_contact_models, select_contacts, ContactModel};
use crate::error::{Error, Result};
use crate::hand::{ConfigModel, HandDescription, Trajectory};
use crate::inference::GraspTypeModel;
use crate::object_model::ObjectModel;
use crate::surface::{extract_features, PointCloud};

/// One demonstrated grasp: the object's cloud, the reach trajectory and the
/// grasp-type label.
#[derive(Clone, Debug)]
pub struct Example {
    pub source: String,
    pub cloud: PointCloud,
    pub trajectory: Trajectory,
    pub grasp_type: String,
}

/// Object model of a cloud under the learning parameters.
pub fn object_model(cloud: &PointCloud, params: &LearningParams, source: &str) -> Result<ObjectModel> {
    let ex = extract_features(cloud, params.k_nn)?;
    if ex.skipped > 0 {
        log::info!("{source}: {} of {} points had no stable feature", ex.skipped, cloud.len());
    }
    ObjectModel::build_capped(&ex.features, params.object_bandwidth, source, params.particle_cap())
}

/// Contact models of every link for one example.
pub fn learn_example(
    hand: &HandDescription,
    om: &ObjectModel,
    trajectory: &Trajectory,
    params: &LearningParams,
) -> Result<Vec<ContactModel>> {
    let eq = trajectory.equilibrium();
    let poses = hand.forward_kinematics(&eq.wrist, &eq.config)?;
    hand.links()
        .par_iter()
        .enumerate()
        .map(|(i, link)| {
            learn_contact_model(
                om,
                i,
                &link.geometry,
                &poses[i],
                &params.receptive_field,
                params.contact_bandwidth,
            )
        })
        .collect()
}

/// Learns one model per grasp type, in order of first appearance.
pub fn train(hand: &HandDescription, examples: &[Example], params: &LearningParams) -> Result<ModelArchive> {
    params.validate()?;
    if examples.is_empty() {
        return Err(Error::invalid("training", "no examples given"));
    }
    for e in examples {
        e.trajectory.validate(hand)?;
    }
    let eta = params.eta.for_links(hand.num_links())?;
    let learned: Vec<Vec<ContactModel>> = examples
        .par_iter()
        .map(|e| {
            let om = object_model(&e.cloud, params, &e.source)?;
            learn_example(hand, &om, &e.trajectory, params)
        })
        .collect::<Result<_>>()?;

    let mut names: Vec<&str> = Vec::new();
    for e in examples {
        if !names.contains(&e.grasp_type.as_str()) {
            names.push(&e.grasp_type);
        }
    }
    let mut grasp_types = Vec::with_capacity(names.len());
    for name in names {
        let members: Vec<usize> = (0..examples.len()).filter(|n| examples[*n].grasp_type == name).collect();
        // models[i][n]: link i in the n-th member example.
        let models: Vec<Vec<ContactModel>> = (0..hand.num_links())
            .map(|i| members.iter().map(|n| learned[*n][i].clone()).collect())
            .collect();
        let norms: Vec<Vec<f64>> = models.iter().map(|row| row.iter().map(|m| m.norm).collect()).collect();
        let selection = select_contacts(&norms, &eta, params.zeta).map_err(|e| match e {
            Error::NoContacts => Error::NoContactModels {
                grasp_type: name.to_string(),
            },
            other => other,
        })?;
        let contacts = mix_contact_models(&models, &selection)?;
        if contacts.selected_links().next().is_none() {
            return Err(Error::NoContactModels {
                grasp_type: name.to_string(),
            });
        }
        let config = ConfigModel::new(
            members
                .iter()
                .map(|n| examples[*n].trajectory.equilibrium().config.clone())
                .collect(),
            params.config_sigma,
        )?;
        grasp_types.push(GraspTypeModel {
            name: name.to_string(),
            examples: members.iter().map(|n| examples[*n].source.clone()).collect(),
            norms,
            contacts,
            config,
            trajectories: members.iter().map(|n| examples[*n].trajectory.clone()).collect(),
        });
    }
    let archive = ModelArchive {
        hand: hand.clone(),
        params: params.clone(),
        grasp_types,
    };
    archive.validate()?;
    Ok(archive)
}
