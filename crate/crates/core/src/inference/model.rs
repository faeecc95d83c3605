use crate::contact::GraspTypeContacts;
use crate::error::{Error, Result};
use crate::hand::{ConfigModel, HandDescription, Trajectory};

/// Everything learned for one grasp type.
#[derive(Clone, Debug)]
pub struct GraspTypeModel {
    pub name: String,
    /// Source label of each example.
    pub examples: Vec<String>,
    /// `norms[i][n]`: contact model norm of link `i` in example `n`.
    pub norms: Vec<Vec<f64>>,
    pub contacts: GraspTypeContacts,
    pub config: ConfigModel,
    /// One reach trajectory per example, in example order.
    pub trajectories: Vec<Trajectory>,
}

impl GraspTypeModel {
    pub fn num_examples(&self) -> usize {
        self.trajectories.len()
    }

    /// Number of links with a contact model.
    pub fn num_modeled_links(&self) -> usize {
        self.contacts.selected_links().count()
    }

    pub fn validate(&self, hand: &HandDescription) -> Result<()> {
        let n_links = hand.num_links();
        let n = self.trajectories.len();
        if n == 0 {
            return Err(Error::invalid("grasp type", format!("{} has no examples", self.name)));
        }
        let sel = &self.contacts.selection;
        if self.contacts.models.len() != n_links
            || sel.per_link.len() != n_links
            || sel.per_example.len() != n_links
            || self.norms.len() != n_links
        {
            return Err(Error::invalid(
                "grasp type",
                format!("{} does not match the hand's {n_links} links", self.name),
            ));
        }
        if self.examples.len() != n
            || sel.per_example.iter().any(|r| r.len() != n)
            || self.norms.iter().any(|r| r.len() != n)
        {
            return Err(Error::invalid("grasp type", format!("{} flag rows must have one entry per example", self.name)));
        }
        for (i, m) in self.contacts.models.iter().enumerate() {
            if m.is_some() != sel.per_link[i] {
                return Err(Error::invalid(
                    "grasp type",
                    format!("{}: link {i} has a model iff it is selected", self.name),
                ));
            }
        }
        if self.config.dim() != hand.dof() || self.trajectories.iter().any(|t| t.equilibrium().config.len() != hand.dof()) {
            return Err(Error::DimensionMismatch {
                expected: hand.dof(),
                got: self.config.dim(),
            });
        }
        if self.num_modeled_links() == 0 {
            return Err(Error::NoContactModels {
                grasp_type: self.name.clone(),
            });
        }
        Ok(())
    }
}
