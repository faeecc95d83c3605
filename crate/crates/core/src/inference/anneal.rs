use std::cmp::Ordering;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{log_grasp_likelihood, score_candidate, Likelihood};
use super::model::GraspTypeModel;
use super::query::QueryDensity;
use super::reach::{select_reach_trajectory, warp_trajectory, SelectionScales};
use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::hand::{CloudCollider, HandDescription, HandState, Trajectory};

/// Simulated annealing and staged selection settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealParams {
    pub steps: usize,
    pub t_first: f64,
    pub t_last: f64,
    /// Standard deviation of wrist position proposals (m).
    pub position_step: f64,
    /// Standard deviation of each wrist rotation-vector component (rad).
    pub orientation_step: f64,
    /// Standard deviation of joint proposals (rad).
    pub joint_step: f64,
    pub population: usize,
    /// 1-based steps after which candidates are re-scored with the
    /// collision expert and pruned.
    pub selection_steps: Vec<usize>,
    pub retain_fraction: f64,
    /// Collision expert rate (1/m).
    pub beta: f64,
    pub parallel: bool,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            steps: 100,
            t_first: 1.0,
            t_last: 0.01,
            position_step: 0.005,
            orientation_step: 0.05,
            joint_step: 0.05,
            population: 1000,
            selection_steps: vec![1, 50],
            retain_fraction: 0.1,
            beta: 500.0,
            parallel: true,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("t_first", self.t_first), ("t_last", self.t_last)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("annealing", format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("position_step", self.position_step),
            ("orientation_step", self.orientation_step),
            ("joint_step", self.joint_step),
            ("beta", self.beta),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("annealing", format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.retain_fraction > 0.0 && self.retain_fraction <= 1.0) {
            return Err(Error::invalid("annealing", "retain_fraction must be in (0, 1]"));
        }
        if self.population == 0 {
            return Err(Error::invalid("annealing", "population must be positive"));
        }
        Ok(())
    }

    /// Temperature at 1-based step `k`, linear from `t_first` to `t_last`.
    pub fn temperature(&self, k: usize) -> f64 {
        if self.steps <= 1 {
            return self.t_first;
        }
        let f = (k.saturating_sub(1)) as f64 / (self.steps - 1) as f64;
        self.t_first + (self.t_last - self.t_first) * f
    }
}

/// Axis-aligned workspace box for reachability pruning.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// One candidate equilibrium grasp with its reach trajectory and scores.
#[derive(Clone, Debug)]
pub struct GraspCandidate {
    pub id: u64,
    pub grasp_type: usize,
    pub state: HandState,
    /// Annealing objective: configuration and query factors, no collision.
    pub log_objective: f64,
    /// Training trajectory the warped reach was built from.
    pub source_trajectory: Option<usize>,
    pub trajectory: Option<Trajectory>,
    pub likelihood: Option<Likelihood>,
    pub log_normalized: f64,
}

impl GraspCandidate {
    pub fn new(id: u64, grasp_type: usize, state: HandState) -> Self {
        Self {
            id,
            grasp_type,
            state,
            log_objective: f64::NEG_INFINITY,
            source_trajectory: None,
            trajectory: None,
            likelihood: None,
            log_normalized: f64::NEG_INFINITY,
        }
    }

    fn cmp_rank(&self, other: &Self) -> Ordering {
        other
            .log_normalized
            .total_cmp(&self.log_normalized)
            .then(self.id.cmp(&other.id))
    }
}

/// Per-grasp-type inputs of the optimizer.
#[derive(Clone, Debug)]
pub struct TypeContext<'a> {
    pub model: &'a GraspTypeModel,
    /// Query densities of the modelled links.
    pub queries: Vec<QueryDensity>,
}

/// Shared, immutable inputs of the optimizer.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub hand: &'a HandDescription,
    pub collider: &'a CloudCollider,
    pub types: Vec<TypeContext<'a>>,
    pub scales: SelectionScales,
}

impl Problem<'_> {
    /// Largest number of query factors over grasp types.
    pub fn max_queries(&self) -> usize {
        self.types.iter().map(|t| t.queries.len()).max().unwrap_or(0)
    }

    pub fn objective(&self, grasp_type: usize, state: &HandState) -> f64 {
        let t = &self.types[grasp_type];
        log_grasp_likelihood(state, &t.queries, &t.model.config, self.hand)
    }

    /// Attaches a freshly drawn and warped reach trajectory and scores the
    /// candidate with the collision expert included.
    pub fn rescore<R: Rng + ?Sized>(&self, c: &mut GraspCandidate, beta: f64, rng: &mut R) {
        let t = &self.types[c.grasp_type];
        let n = select_reach_trajectory(&c.state, &t.model.trajectories, &self.scales, rng);
        let mut warped = warp_trajectory(&t.model.trajectories[n], &c.state);
        warped.clamp_configs(self.hand);
        c.state.motor = warped.equilibrium().motor;
        let lik = score_candidate(
            &c.state,
            &warped,
            &t.queries,
            &t.model.config,
            self.collider,
            self.hand,
            beta,
        );
        c.log_normalized = lik.log_normalized(self.max_queries());
        c.likelihood = Some(lik);
        c.source_trajectory = Some(n);
        c.trajectory = Some(warped);
    }
}

/// A candidate and the random stream that drives it.
#[derive(Clone, Debug)]
pub struct Chain {
    pub candidate: GraspCandidate,
    pub rng: ChaCha8Rng,
}

impl Chain {
    /// Stream `stream` of the generator seeded with `seed`.
    pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }
}

/// Result of [`anneal`].
#[derive(Clone, Debug)]
pub struct AnnealOutput {
    /// Final population, best first.
    pub population: Vec<GraspCandidate>,
    /// Best normalized log-likelihood after each selection checkpoint and
    /// after the final re-scoring.
    pub checkpoint_best: Vec<f64>,
}

fn propose<R: Rng + ?Sized>(state: &HandState, hand: &HandDescription, p: &AnnealParams, rng: &mut R) -> HandState {
    let mut gauss = |s: f64| s * rng.sample::<f64, _>(StandardNormal);
    let dp = Vector3::new(gauss(p.position_step), gauss(p.position_step), gauss(p.position_step));
    let dr = Vector3::new(
        gauss(p.orientation_step),
        gauss(p.orientation_step),
        gauss(p.orientation_step),
    );
    let mut config: Vec<f64> = state.config.iter().map(|c| c + gauss(p.joint_step)).collect();
    hand.clamp_config(&mut config);
    let orientation = state.wrist.orientation * UnitQuaternion::from_scaled_axis(dr);
    HandState::new(Pose::new(state.wrist.position + dp, orientation), config, state.motor)
}

fn accept(current: f64, proposed: f64, temperature: f64, u: f64) -> bool {
    if proposed == f64::NEG_INFINITY {
        return current == f64::NEG_INFINITY;
    }
    if current == f64::NEG_INFINITY {
        return true;
    }
    u.ln() < (proposed - current) / temperature
}

fn step_chain(chain: &mut Chain, problem: &Problem<'_>, params: &AnnealParams, temperature: f64) {
    let c = &mut chain.candidate;
    let proposal = propose(&c.state, problem.hand, params, &mut chain.rng);
    let u: f64 = chain.rng.random();
    let value = problem.objective(c.grasp_type, &proposal);
    if accept(c.log_objective, value, temperature, u) {
        c.state = proposal;
        c.log_objective = value;
    }
}

fn for_each_chain<F>(chains: &mut [Chain], parallel: bool, f: F)
where
    F: Fn(&mut Chain) + Sync + Send,
{
    if parallel {
        chains.par_iter_mut().for_each(f);
    } else {
        chains.iter_mut().for_each(f);
    }
}

/// Runs simulated annealing over a seeded population.
///
/// Each step perturbs every chain's wrist and joints and accepts with
/// probability `min(1, (L'/L)^{1/T})`. After each selection step the whole
/// population gets warped reach trajectories, is scored with the collision
/// expert, ranked across grasp types by normalized likelihood and cut to the
/// retained fraction. The best candidate of each checkpoint is carried to
/// the next unchanged, so the best score never decreases. Results depend only
/// on the chains' seeds, not on `parallel`.
pub fn anneal(problem: &Problem<'_>, mut chains: Vec<Chain>, params: &AnnealParams) -> Result<AnnealOutput> {
    params.validate()?;
    if chains.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    for_each_chain(&mut chains, params.parallel, |ch| {
        ch.candidate.log_objective = problem.objective(ch.candidate.grasp_type, &ch.candidate.state);
    });
    let mut elite: Option<Chain> = None;
    let mut checkpoint_best = Vec::new();
    let mut checkpoint = |chains: &mut Vec<Chain>, prune: bool, round: u64| -> Result<()> {
        for_each_chain(chains, params.parallel, |ch| {
            problem.rescore(&mut ch.candidate, params.beta, &mut ch.rng);
        });
        if let Some(e) = elite.take() {
            chains.push(e);
        }
        chains.sort_by(|a, b| a.candidate.cmp_rank(&b.candidate));
        if prune {
            let keep = ((chains.len() as f64 * params.retain_fraction).ceil() as usize).clamp(1, chains.len());
            chains.truncate(keep);
        }
        let best = &chains[0];
        if best.candidate.log_normalized == f64::NEG_INFINITY {
            return Err(Error::EmptyPopulation);
        }
        checkpoint_best.push(best.candidate.log_normalized);
        let mut kept = best.clone();
        // The carried copy walks its own stream from here on.
        kept.rng.set_stream(kept.rng.get_stream() ^ (round << 48));
        elite = Some(kept);
        Ok(())
    };
    for k in 1..=params.steps {
        let t = params.temperature(k);
        for_each_chain(&mut chains, params.parallel, |ch| step_chain(ch, problem, params, t));
        if params.selection_steps.contains(&k) {
            checkpoint(&mut chains, true, k as u64)?;
        }
    }
    checkpoint(&mut chains, false, params.steps as u64 + 1)?;
    Ok(AnnealOutput {
        population: chains.into_iter().map(|c| c.candidate).collect(),
        checkpoint_best,
    })
}

/// Drops candidates whose reach leaves `workspace` and sorts the rest by
/// normalized likelihood, best first.
pub fn rank_and_prune(mut candidates: Vec<GraspCandidate>, workspace: Option<&Aabb>) -> Vec<GraspCandidate> {
    if let Some(bounds) = workspace {
        candidates.retain(|c| {
            let inside = |s: &HandState| bounds.contains(&s.wrist.position);
            match &c.trajectory {
                Some(t) => t.states().iter().all(inside),
                None => inside(&c.state),
            }
        });
    }
    candidates.sort_by(|a, b| a.cmp_rank(b));
    candidates
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn temperature_is_linear() {
        let p = AnnealParams::default();
        assert_eq!(p.temperature(1), 1.0);
        assert!((p.temperature(100) - 0.01).abs() < 1e-15);
        assert!((p.temperature(50) - (1.0 - 0.99 * 49.0 / 99.0)).abs() < 1e-15);
    }

    #[test]
    fn acceptance_rule() {
        assert!(accept(-1.0, 0.0, 1.0, 0.999));
        assert!(!accept(0.0, -10.0, 1.0, 0.5));
        assert!(accept(0.0, -10.0, 1.0, 1e-5));
        assert!(!accept(0.0, f64::NEG_INFINITY, 1.0, 1e-300));
        assert!(accept(f64::NEG_INFINITY, -1e9, 1.0, 0.9));
    }

    fn cand(id: u64, score: f64, x: f64) -> GraspCandidate {
        let mut c = GraspCandidate::new(id, 0, HandState::new(Pose::from_translation(Vector3::new(x, 0.0, 0.0)), vec![], 1.0));
        c.log_normalized = score;
        c
    }

    #[test]
    fn ranking_sorts_and_prunes() {
        let out = rank_and_prune(vec![cand(0, 0.2f64.ln(), 0.0), cand(1, 0.5f64.ln(), 0.0)], None);
        assert_eq!(out.iter().map(|c| c.id).collect::<Vec<_>>(), vec![1, 0]);
        let bounds = Aabb {
            min: [-1.0; 3],
            max: [1.0; 3],
        };
        let out = rank_and_prune(vec![cand(0, 0.0, 5.0), cand(1, 0.0, -3.0)], Some(&bounds));
        assert!(out.is_empty());
        let out = rank_and_prune(vec![cand(0, 0.0, 5.0), cand(1, -1.0, 0.5)], Some(&bounds));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].id, 1);
    }
}
