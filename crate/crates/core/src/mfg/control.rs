//! Individual optimal control: the per-device loss, the Hamiltonian
//! coefficients that a population workload induces, and the closed-form
//! value function and feedback that follow from them.
//!
//! With the running loss `mu1 * a + 1 / (mu2 * a)` and the linear terminal
//! cost `x / (F_m T) - 1`, the costate is the constant `1 / (F_m T)` and the
//! Hamilton-Jacobi system has an explicit solution, so no grid solver is
//! needed.

use super::{MfgError, SystemParams};

/// Per-device loss at frequency `alpha` when the population workload is
/// `x_pop`:
///
/// ```text
/// l = alpha / (F_P - X/T) + (X r) / (R T) / alpha
/// ```
///
/// The first addend is the congestion pressure, the second the inverse of
/// the resource share the device earns.
pub fn loss_individual(
    demand: f64,
    alpha: f64,
    x_pop: f64,
    params: &SystemParams,
    total_resource: f64,
) -> Result<f64, MfgError> {
    if !(alpha > 0.0) {
        return Err(MfgError::Domain("alpha must be positive"));
    }
    if !(total_resource > 0.0) {
        return Err(MfgError::Domain("total resource must be positive"));
    }
    let t = params.time_unit;
    let headroom = params.f_pop_max - x_pop / t;
    if !(headroom > 0.0) {
        return Err(MfgError::Saturated);
    }
    Ok(alpha / headroom + (x_pop * demand) / (total_resource * t) / alpha)
}

/// Coefficients of the running loss once the mean field is frozen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameCoefficients {
    /// Congestion price 1 / (F_P - X/T).
    pub mu1: f64,
    /// Reward scale R T / (X r).
    pub mu2: f64,
}

impl GameCoefficients {
    pub fn new(mu1: f64, mu2: f64) -> Result<Self, MfgError> {
        if !(mu1 > 0.0 && mu1.is_finite() && mu2 > 0.0 && mu2.is_finite()) {
            return Err(MfgError::Domain("coefficients must be positive and finite"));
        }
        Ok(Self { mu1, mu2 })
    }

    fn effective_price(&self, costate: f64) -> Result<f64, MfgError> {
        let price = costate + self.mu1;
        if !(price > 0.0) {
            return Err(MfgError::Domain("costate + mu1 must be positive"));
        }
        Ok(price)
    }

    /// Objective minimised by the feedback: `(p + mu1) a + 1 / (mu2 a)`.
    pub fn hamiltonian(&self, costate: f64, alpha: f64) -> f64 {
        (costate + self.mu1) * alpha + 1.0 / (self.mu2 * alpha)
    }

    /// Minimiser of [`Self::hamiltonian`] over `a > 0`.
    pub fn optimal_feedback(&self, costate: f64) -> Result<f64, MfgError> {
        let price = self.effective_price(costate)?;
        Ok((1.0 / (self.mu2 * price)).sqrt())
    }

    /// `2 sqrt((p + mu1) / mu2)`, the value of the Hamiltonian at its minimiser.
    pub fn hamiltonian_infimum(&self, costate: f64) -> Result<f64, MfgError> {
        let price = self.effective_price(costate)?;
        Ok(2.0 * (price / self.mu2).sqrt())
    }
}

pub fn game_coefficients(
    x_pop: f64,
    demand: f64,
    params: &SystemParams,
    total_resource: f64,
) -> Result<GameCoefficients, MfgError> {
    if !(x_pop > 0.0) {
        return Err(MfgError::Domain("population workload must be positive"));
    }
    if !(demand > 0.0) {
        return Err(MfgError::Domain("demand must be positive"));
    }
    if !(total_resource > 0.0) {
        return Err(MfgError::Domain("total resource must be positive"));
    }
    let t = params.time_unit;
    let headroom = params.f_pop_max - x_pop / t;
    if !(headroom > 0.0) {
        return Err(MfgError::Saturated);
    }
    GameCoefficients::new(1.0 / headroom, total_resource * t / (x_pop * demand))
}

/// `G(x, T) = x / (F_m T) - 1`. Inputs outside `[0, F_m T]` are a caller error.
pub fn terminal_cost(x_terminal: f64, params: &SystemParams) -> f64 {
    x_terminal / (params.f_m() * params.time_unit) - 1.0
}

/// One point of the solved Hamilton-Jacobi system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub t: f64,
    pub x: f64,
    pub costate: f64,
    pub value: f64,
    pub hamiltonian_inf: f64,
}

/// Closed-form value function
/// `v(t, x) = x/(F_m T) - 1 + 2 sqrt((mu1 + 1/(F_m T)) / mu2) (T - t)`.
pub fn value_function(
    t: f64,
    x: f64,
    coeffs: &GameCoefficients,
    params: &SystemParams,
) -> Result<ControlPoint, MfgError> {
    let horizon = params.time_unit;
    if !(0.0..=horizon).contains(&t) {
        return Err(MfgError::Domain("t must lie in [0, T]"));
    }
    let costate = 1.0 / (params.f_m() * horizon);
    let hamiltonian_inf = coeffs.hamiltonian_infimum(costate)?;
    let value = terminal_cost(x, params) + hamiltonian_inf * (horizon - t);
    Ok(ControlPoint {
        t,
        x,
        costate,
        value,
        hamiltonian_inf,
    })
}

/// Unclamped optimum `sqrt(1 / (mu2 (mu1 + 1/(F_m T))))`.
pub fn raw_optimal_alpha(demand: f64, x_pop: f64, params: &SystemParams, total_resource: f64) -> Result<f64, MfgError> {
    let coeffs = game_coefficients(x_pop, demand, params, total_resource)?;
    coeffs.optimal_feedback(1.0 / (params.f_m() * params.time_unit))
}

/// Optimal frequency clamped to the admissible cap `F_m`.
pub fn optimal_alpha(demand: f64, x_pop: f64, params: &SystemParams, total_resource: f64) -> Result<f64, MfgError> {
    Ok(raw_optimal_alpha(demand, x_pop, params, total_resource)?.min(params.f_m()))
}

/// Device-side variant for when only the broadcast `F_m` is known, not `N`.
pub fn optimal_alpha_for_cap(
    demand: f64,
    x_pop: f64,
    f_pop_max: f64,
    f_m: f64,
    time_unit: f64,
    total_resource: f64,
) -> Result<f64, MfgError> {
    if !(f_m > 0.0) {
        return Err(MfgError::Domain("f_m must be positive"));
    }
    let headroom = f_pop_max - x_pop / time_unit;
    if !(headroom > 0.0) {
        return Err(MfgError::Saturated);
    }
    if !(x_pop > 0.0 && demand > 0.0 && total_resource > 0.0) {
        return Err(MfgError::Domain("workload, demand and resource must be positive"));
    }
    let coeffs = GameCoefficients::new(1.0 / headroom, total_resource * time_unit / (x_pop * demand))?;
    Ok(coeffs.optimal_feedback(1.0 / (f_m * time_unit))?.min(f_m))
}
