//! Seeded discrete-event comparison of frequency policies.

mod demand;
mod engine;
mod grid;
mod metrics;
mod policy;
mod scenario;

pub use demand::{acceptance_probability, sample_demands, MIN_ACCEPTANCE};
pub use engine::{run_seed, seed_demands};
pub use grid::{apply_sweep, experiment_grid, run_simulation, GridPoint};
pub use metrics::{AnomalyEvent, MetricsRecord, SeedMetrics};
pub use policy::{policy_frequencies, population_loss};
pub use scenario::{DemandScale, Policy, Scenario, Sweep};

use crate::dtr::DtrError;
use crate::mfg::MfgError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Mfg(#[from] MfgError),
    #[error(transparent)]
    Dtr(#[from] DtrError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("demand sampling: {0}")]
    Sampling(String),
}
