use serde::{Deserialize, Serialize};

use super::anneal::{anneal, rank_and_prune, Aabb, AnnealParams, Chain, GraspCandidate, Problem, TypeContext};
use super::model::GraspTypeModel;
use super::query::{compute_query_density, QueryDensity};
use super::reach::SelectionScales;
use super::seed::seed_grasp;
use crate::error::{Error, Result};
use crate::geom::Density;
use crate::hand::{CloudCollider, HandDescription};

/// Streams `0..2^32` drive candidates; query densities use streams above.
const QUERY_STREAM_BASE: u64 = 1 << 32;

/// Inference settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceParams {
    /// Kernels per query density.
    pub query_kernels: usize,
    pub anneal: AnnealParams,
    pub selection: SelectionScales,
    pub workspace: Option<Aabb>,
}

impl Default for InferenceParams {
    fn default() -> Self {
        Self {
            query_kernels: 500,
            anneal: AnnealParams::default(),
            selection: SelectionScales::default(),
            workspace: None,
        }
    }
}

/// Ranked candidates and the annealing trace.
#[derive(Clone, Debug)]
pub struct Inference {
    pub candidates: Vec<GraspCandidate>,
    pub checkpoint_best: Vec<f64>,
    /// Largest number of query factors over the grasp types used.
    pub max_queries: usize,
    /// Indices of grasp types that took part.
    pub active_types: Vec<usize>,
}

/// Query densities of every modelled link of one grasp type.
pub fn build_queries(model: &GraspTypeModel, object: &Density, kernels: usize, seed: u64, type_index: usize) -> Result<Vec<QueryDensity>> {
    model
        .contacts
        .models
        .iter()
        .enumerate()
        .filter_map(|(link, m)| m.as_ref().map(|m| (link, m)))
        .map(|(link, cm)| {
            let stream = QUERY_STREAM_BASE + (type_index as u64) * 1024 + link as u64;
            let mut rng = Chain::rng_for(seed, stream);
            compute_query_density(cm, object, kernels, link, &mut rng)
        })
        .collect()
}

/// Full inference on a query object: query densities, seeding, annealing
/// with staged selection, then pruning and ranking.
///
/// Grasp types whose query densities are degenerate on this object are
/// left out with a warning. If none remain the first degeneracy error is
/// returned.
pub fn infer(
    hand: &HandDescription,
    models: &[GraspTypeModel],
    object: &Density,
    collider: &CloudCollider,
    params: &InferenceParams,
    seed: u64,
) -> Result<Inference> {
    params.anneal.validate()?;
    if models.is_empty() {
        return Err(Error::invalid("inference", "model has no grasp types"));
    }
    let mut types = Vec::new();
    let mut active_types = Vec::new();
    let mut first_error = None;
    for (g, model) in models.iter().enumerate() {
        model.validate(hand)?;
        match build_queries(model, object, params.query_kernels, seed, g) {
            Ok(queries) => {
                types.push(TypeContext { model, queries });
                active_types.push(g);
            }
            Err(e) if e.is_degenerate() => {
                log::warn!("grasp type {} skipped: {e}", model.name);
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if types.is_empty() {
        return Err(first_error.unwrap_or(Error::EmptyPopulation));
    }
    let problem = Problem {
        hand,
        collider,
        types,
        scales: params.selection,
    };

    let mut chains = Vec::with_capacity(params.anneal.population);
    let mut seed_error = None;
    for i in 0..params.anneal.population {
        let t = i % problem.types.len();
        let mut rng = Chain::rng_for(seed, i as u64);
        match seed_grasp(problem.types[t].model, &problem.types[t].queries, hand, &mut rng) {
            Ok(s) => chains.push(Chain {
                candidate: GraspCandidate::new(i as u64, t, s.state),
                rng,
            }),
            Err(e) => {
                seed_error.get_or_insert(e);
            }
        }
    }
    if chains.is_empty() {
        return Err(seed_error.unwrap_or(Error::EmptyPopulation));
    }
    if let Some(e) = seed_error {
        log::warn!("some candidates could not be seeded: {e}");
    }

    let out = anneal(&problem, chains, &params.anneal)?;
    let mut candidates = rank_and_prune(out.population, params.workspace.as_ref());
    for c in &mut candidates {
        c.grasp_type = active_types[c.grasp_type];
    }
    if candidates.is_empty() {
        log::warn!("every candidate left the workspace");
    }
    Ok(Inference {
        candidates,
        checkpoint_best: out.checkpoint_best,
        max_queries: problem.max_queries(),
        active_types,
    })
}
