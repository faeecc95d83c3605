use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::geometry::LinkGeometry;
use crate::error::{Error, Result};
use crate::geom::{Bandwidth, Density, Feature, Pose};
use crate::object_model::ObjectModel;

/// Receptive field `exp(−λ d²)` for `d < δ`, zero otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceptiveField {
    /// Decay rate λ in 1/m².
    pub lambda: f64,
    /// Cutoff distance δ in meters.
    pub cutoff: f64,
}

impl Default for ReceptiveField {
    fn default() -> Self {
        Self {
            lambda: 2500.0,
            cutoff: 0.04,
        }
    }
}

impl ReceptiveField {
    pub fn new(lambda: f64, cutoff: f64) -> Result<Self> {
        let rf = Self { lambda, cutoff };
        rf.validate()?;
        Ok(rf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_finite() && self.lambda > 0.0 && self.cutoff.is_finite() && self.cutoff > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(
                "receptive field",
                format!("lambda and cutoff must be positive, got {} and {}", self.lambda, self.cutoff),
            ))
        }
    }

    #[inline]
    pub fn response(&self, distance: f64) -> f64 {
        if distance < self.cutoff {
            (-self.lambda * distance * distance).exp()
        } else {
            0.0
        }
    }

    /// Response of a link at `link_pose` to a surface point `p`.
    pub fn eval(&self, link: &LinkGeometry, link_pose: &Pose, p: &Vector3<f64>) -> f64 {
        self.response(link.closest_point(link_pose, p).1)
    }
}

/// Density over link poses relative to surface frames, joint with curvature,
/// learned from one example grasp. `density` is `None` when no object
/// feature falls inside the link's receptive field.
#[derive(Clone, Debug)]
pub struct ContactModel {
    pub link: usize,
    pub source: String,
    pub norm: f64,
    pub density: Option<Density>,
}

impl ContactModel {
    pub fn is_empty(&self) -> bool {
        self.density.is_none()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Learns the contact model of `link` (posed at `link_pose` in the example's
/// equilibrium state) from an object model.
///
/// Each in-range object particle `j` contributes the relative pose
/// `v_j⁻¹ ∘ s` with its curvature, weighted by `w_j · rf(v_j)`. The norm is
/// `Σ w_j rf(v_j) / Σ w_j`, the expected receptive-field response.
pub fn learn_contact_model(
    om: &ObjectModel,
    link: usize,
    geometry: &LinkGeometry,
    link_pose: &Pose,
    field: &ReceptiveField,
    bandwidth: Bandwidth,
) -> Result<ContactModel> {
    let d = &om.density;
    let mut particles = Vec::new();
    let mut weights = Vec::new();
    let mut response_sum = 0.0;
    let mut weight_sum = 0.0;
    for (x, w) in d.particles().iter().zip(d.weights()) {
        weight_sum += w;
        let rf = field.eval(geometry, link_pose, &x.pose.position);
        if rf > 0.0 {
            response_sum += w * rf;
            particles.push(Feature::new(x.pose.inverse().compose(link_pose), x.curvature));
            weights.push(w * rf);
        }
    }
    let density = if particles.is_empty() || response_sum <= 0.0 {
        None
    } else {
        Some(Density::from_unnormalized(particles, weights, bandwidth)?)
    };
    Ok(ContactModel {
        link,
        source: om.source.clone(),
        norm: if weight_sum > 0.0 { response_sum / weight_sum } else { 0.0 },
        density,
    })
}

/// Contact flags of one grasp type: `b[i][n]` per link and example,
/// `c[i]` per link.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub per_example: Vec<Vec<bool>>,
    pub per_link: Vec<bool>,
}

/// Thresholds norms into `b_in` (ratio to the mean norm above `η_i`) and
/// `c_i` (fraction of examples with `b_in` above `ζ`). Both are strict.
///
/// `norms[i][n]` is the norm of link `i` in example `n`.
pub fn select_contacts(norms: &[Vec<f64>], eta: &[f64], zeta: f64) -> Result<Selection> {
    let n_links = norms.len();
    if n_links == 0 {
        return Err(Error::invalid("norm matrix", "no links"));
    }
    let n_examples = norms[0].len();
    if n_examples == 0 || norms.iter().any(|row| row.len() != n_examples) {
        return Err(Error::invalid("norm matrix", "rows must be non-empty and of equal length"));
    }
    if eta.len() != n_links {
        return Err(Error::invalid(
            "eta",
            format!("{} thresholds for {n_links} links", eta.len()),
        ));
    }
    if norms.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::invalid("norm matrix", "norms must be finite and non-negative"));
    }
    let total: f64 = norms.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::NoContacts);
    }
    let scale = (n_links * n_examples) as f64;
    let per_example: Vec<Vec<bool>> = norms
        .iter()
        .zip(eta)
        .map(|(row, eta_i)| row.iter().map(|m| scale * m / total > *eta_i).collect())
        .collect();
    let per_link = per_example
        .iter()
        .map(|row| row.iter().filter(|b| **b).count() as f64 / n_examples as f64 > zeta)
        .collect();
    Ok(Selection {
        per_example,
        per_link,
    })
}

/// Mixed contact models of one grasp type.
#[derive(Clone, Debug)]
pub struct GraspTypeContacts {
    pub selection: Selection,
    /// `Some` exactly for links with `c_i = 1`.
    pub models: Vec<Option<Density>>,
}

impl GraspTypeContacts {
    pub fn selected_links(&self) -> impl Iterator<Item = usize> + '_ {
        self.models
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|_| i))
    }

    /// Links modelled for example `n`: selected and flagged in that example.
    pub fn links_for_example(&self, n: usize) -> Vec<usize> {
        self.selected_links()
            .filter(|i| self.selection.per_example[*i][n])
            .collect()
    }
}

/// Concatenates the flagged example models of every selected link, each
/// example contributing `1/(included examples)` of the mass.
///
/// `models[i][n]` is link `i`'s model from example `n`.
pub fn mix_contact_models(models: &[Vec<ContactModel>], selection: &Selection) -> Result<GraspTypeContacts> {
    if models.len() != selection.per_link.len() {
        return Err(Error::invalid(
            "contact models",
            format!("{} links of models, {} selection flags", models.len(), selection.per_link.len()),
        ));
    }
    let mut mixed = Vec::with_capacity(models.len());
    for (i, row) in models.iter().enumerate() {
        if !selection.per_link[i] {
            mixed.push(None);
            continue;
        }
        let included: Vec<&Density> = row
            .iter()
            .zip(&selection.per_example[i])
            .filter(|(_, b)| **b)
            .filter_map(|(m, _)| m.density.as_ref())
            .collect();
        if included.is_empty() {
            return Err(Error::EmptyMixture { link: i });
        }
        let share = 1.0 / included.len() as f64;
        let bandwidth = *included[0].bandwidth();
        let mut particles = Vec::new();
        let mut weights = Vec::new();
        for d in included {
            particles.extend_from_slice(d.particles());
            weights.extend(d.weights().iter().map(|w| w * share));
        }
        mixed.push(Some(Density::from_unnormalized(particles, weights, bandwidth)?));
    }
    Ok(GraspTypeContacts {
        selection: selection.clone(),
        models: mixed,
    })
}
