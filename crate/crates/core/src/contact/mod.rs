//! Hand-link collision primitives and contact models learned from example
//! grasps.

mod geometry;
mod model;

pub use geometry::LinkGeometry;
pub use model::{
    learn_contact_model, mix_contact_models, select_contacts, ContactModel, GraspTypeContacts, ReceptiveField,
    Selection,
};
