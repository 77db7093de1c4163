//! Domain types, dataset validation and priors.

mod data;
mod prior;
mod state;

pub use data::{validate_dataset, Dataset, Individual};
pub use prior::{beta_pert_log_density, BetaPert, NormalPrior, PriorConfig};
pub use state::{stick_weights, ChainState, ClusterParams, GlobalParams, RESERVED};

pub(crate) use state::precision_to_sigma;
