use serde::Serialize;

use super::archive::ModelArchive;
use super::config::RunConfig;
use super::train::object_model;
use crate::error::Result;
use crate::geom::Pose;
use crate::hand::{CloudCollider, Trajectory};
use crate::inference::{infer, GraspCandidate, Inference};
use crate::surface::PointCloud;

/// Runs inference for `cloud` with the archive's learned models.
///
/// The query object's model uses the archive's learning parameters so that
/// its features match those the contact models were learned against.
pub fn infer_cloud(archive: &ModelArchive, cloud: &PointCloud, config: &RunConfig, seed: u64) -> Result<Inference> {
    config.validate()?;
    let om = object_model(cloud, &archive.params, "query")?;
    let collider = CloudCollider::new(&cloud.points);
    infer(&archive.hand, &archive.grasp_types, &om.density, &collider, &config.inference, seed)
}

#[derive(Serialize)]
struct LikelihoodRecord {
    raw: f64,
    normalized: f64,
    log_raw: f64,
    log_normalized: f64,
    log_collision: f64,
    log_config: f64,
    log_query: f64,
    query_factors: usize,
}

#[derive(Serialize)]
struct CandidateRecord<'a> {
    rank: usize,
    grasp_type: &'a str,
    hw: Pose,
    hc: &'a [f64],
    hm: f64,
    source_trajectory: Option<usize>,
    likelihood: Option<LikelihoodRecord>,
    trajectory: Option<&'a Trajectory>,
}

#[derive(Serialize)]
struct GraspList<'a> {
    format_version: u32,
    max_query_factors: usize,
    candidates: Vec<CandidateRecord<'a>>,
}

fn record<'a>(rank: usize, c: &'a GraspCandidate, archive: &'a ModelArchive, max_queries: usize) -> CandidateRecord<'a> {
    CandidateRecord {
        rank,
        grasp_type: &archive.grasp_types[c.grasp_type].name,
        hw: c.state.wrist,
        hc: &c.state.config,
        hm: c.state.motor,
        source_trajectory: c.source_trajectory,
        likelihood: c.likelihood.map(|l| LikelihoodRecord {
            raw: l.raw(),
            normalized: l.normalized(max_queries),
            log_raw: l.log_raw(),
            log_normalized: l.log_normalized(max_queries),
            log_collision: l.log_collision,
            log_config: l.log_config,
            log_query: l.log_query,
            query_factors: l.num_queries,
        }),
        trajectory: c.trajectory.as_ref(),
    }
}

/// JSON list of the best `top` candidates, best first.
pub fn grasp_list_json(archive: &ModelArchive, result: &Inference, top: usize) -> String {
    let list = GraspList {
        format_version: super::archive::ARCHIVE_VERSION,
        max_query_factors: result.max_queries,
        candidates: result
            .candidates
            .iter()
            .take(top)
            .enumerate()
            .map(|(i, c)| record(i + 1, c, archive, result.max_queries))
            .collect(),
    };
    serde_json::to_string_pretty(&list).expect("grasp list serializes")
}
