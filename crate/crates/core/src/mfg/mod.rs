//! Mean-field game core: individual control, triangular mean field,
//! population workload and the negotiation fixed point.

mod allocation;
mod control;
mod density;
mod equilibrium;
mod params;

pub use allocation::{allocate_resources, Allocation};
pub use control::{
    game_coefficients, loss_individual, optimal_alpha, optimal_alpha_for_cap, raw_optimal_alpha, terminal_cost,
    value_function, ControlPoint, GameCoefficients,
};
pub use density::{expected_population_workload, triangle_density, MeanFieldTriangle};
pub use equilibrium::{
    aggregated_map, best_responses, closed_form_equilibrium, contraction_coefficient, negotiate_equilibrium,
    negotiate_rounds, Broadcast, Equilibrium, NegotiationTrace, Negotiator, RoundStatus, INITIAL_CAP_SHARE,
};
pub use params::{DeviceProfile, PopulationState, SystemParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MfgError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("population workload saturates the access point (X/T >= F_P)")]
    Saturated,
    #[error("negotiation did not converge within {} rounds", .0.rounds())]
    NotConverged(Box<NegotiationTrace>),
}
