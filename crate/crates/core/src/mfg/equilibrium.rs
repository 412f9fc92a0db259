//! Fixed-point negotiation between the AP and the population.
//!
//! Each round the AP broadcasts its workload estimate `X`, every device
//! answers with its clamped optimal frequency, and the AP folds the
//! triangular-density expectation of those answers back into `X`. The loop
//! stops when the mean absolute change of the per-device work `a_i T` drops
//! below the tolerance.

use super::control::optimal_alpha_for_cap;
use super::density::expected_population_workload;
use super::{MfgError, SystemParams};

/// Share of the individual cap every device starts from.
pub const INITIAL_CAP_SHARE: f64 = 0.8;

/// `c = R / (sum_i sqrt(r_i))^2`, the slope magnitude of the aggregated
/// workload map. Cauchy-Schwarz pins it to `[1/N, 1)`.
pub fn contraction_coefficient(demands: &[f64]) -> Result<f64, MfgError> {
    if demands.len() < 2 {
        return Err(MfgError::Domain("contraction needs at least two devices"));
    }
    if demands.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(MfgError::Domain("demands must be positive"));
    }
    let total: f64 = demands.iter().sum();
    let root_sum: f64 = demands.iter().map(|r| r.sqrt()).sum();
    Ok(total / (root_sum * root_sum))
}

/// Aggregated map `X -> F_P T - c X`.
pub fn aggregated_map(x: f64, c: f64, params: &SystemParams) -> f64 {
    params.capacity() - c * x
}

/// Fixed point `F_P T / (1 + c)` of [`aggregated_map`]. This is the
/// analytic approximation, not the fixed point of the negotiation loop.
pub fn closed_form_equilibrium(demands: &[f64], params: &SystemParams) -> Result<f64, MfgError> {
    let c = contraction_coefficient(demands)?;
    Ok(params.capacity() / (1.0 + c))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NegotiationTrace {
    /// `e^t = sum_i |x_i^t - x_i^{t-1}| / N` for every executed round.
    pub per_round_errors: Vec<f64>,
    pub per_round_alphas: Vec<Vec<f64>>,
    /// Workload broadcast before each round, then the final estimate.
    pub per_round_workloads: Vec<f64>,
    pub converged: bool,
    pub final_x: f64,
}

impl NegotiationTrace {
    pub fn rounds(&self) -> usize {
        self.per_round_errors.len()
    }
}

/// What the AP sends to every device at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Broadcast {
    pub workload: f64,
    pub total_resource: f64,
    pub f_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundStatus {
    Continue,
    Converged,
    Exhausted,
}

/// AP-side state of the negotiation loop. Shared by the in-process solver
/// and the network service so both produce bit-identical results.
#[derive(Debug, Clone)]
pub struct Negotiator {
    params: SystemParams,
    total_resource: f64,
    workload: f64,
    alphas: Vec<f64>,
    trace: NegotiationTrace,
}

impl Negotiator {
    /// `params` are unitized here regardless of the physical time unit.
    pub fn new(total_resource: f64, params: &SystemParams) -> Result<Self, MfgError> {
        let params = params.unitized().validated()?;
        if !(total_resource > 0.0 && total_resource.is_finite()) {
            return Err(MfgError::Domain("total resource must be positive"));
        }
        let start = INITIAL_CAP_SHARE * params.f_m();
        let alphas = vec![start; params.n_devices];
        let workload = project(expected_population_workload(&alphas, &params), &params);
        Ok(Self {
            params,
            total_resource,
            workload,
            alphas,
            trace: NegotiationTrace {
                per_round_workloads: vec![workload],
                final_x: workload,
                ..Default::default()
            },
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn broadcast(&self) -> Broadcast {
        Broadcast {
            workload: self.workload,
            total_resource: self.total_resource,
            f_m: self.params.f_m(),
        }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn trace(&self) -> &NegotiationTrace {
        &self.trace
    }

    pub fn into_trace(self) -> NegotiationTrace {
        self.trace
    }

    /// Fold one round of device reports (in device order) into the state.
    pub fn absorb(&mut self, reports: Vec<f64>) -> Result<RoundStatus, MfgError> {
        let n = self.params.n_devices;
        if reports.len() != n {
            return Err(MfgError::Domain("one report per device is required"));
        }
        let f_m = self.params.f_m();
        if reports.iter().any(|a| !(*a > 0.0 && *a <= f_m)) {
            return Err(MfgError::Domain("reported alpha outside (0, F_m]"));
        }
        let t = self.params.time_unit;
        let error = reports
            .iter()
            .zip(&self.alphas)
            .map(|(new, old)| (new * t - old * t).abs())
            .sum::<f64>()
            / n as f64;

        let estimate = expected_population_workload(&reports, &self.params);
        let relaxed = self.workload + self.params.step_size * (estimate - self.workload);
        self.workload = project(relaxed, &self.params);
        self.alphas = reports;

        let trace = &mut self.trace;
        trace.per_round_errors.push(error);
        trace.per_round_alphas.push(self.alphas.clone());
        trace.per_round_workloads.push(self.workload);
        trace.final_x = self.workload;
        trace.converged = error < self.params.tolerance;

        Ok(if trace.converged {
            RoundStatus::Converged
        } else if trace.rounds() >= self.params.max_rounds {
            RoundStatus::Exhausted
        } else {
            RoundStatus::Continue
        })
    }
}

/// Keep the estimate strictly inside `(0, F_P T)` where the coefficients exist.
fn project(x: f64, params: &SystemParams) -> f64 {
    let cap = params.capacity();
    let eps = 1e-9 * cap;
    x.clamp(eps, cap - eps)
}

/// Every device's answer to one broadcast, in device order.
pub fn best_responses(demands: &[f64], broadcast: &Broadcast, params: &SystemParams) -> Result<Vec<f64>, MfgError> {
    demands
        .iter()
        .map(|&r| {
            optimal_alpha_for_cap(
                r,
                broadcast.workload,
                params.f_pop_max,
                broadcast.f_m,
                1.0,
                broadcast.total_resource,
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub alphas: Vec<f64>,
    pub workload_expectation: f64,
    pub trace: NegotiationTrace,
}

fn checked_demands(demands: &[f64], params: &SystemParams) -> Result<(SystemParams, f64), MfgError> {
    if demands.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(MfgError::Domain("demands must be positive"));
    }
    let params = params.with_devices(demands.len())?;
    Ok((params, demands.iter().sum()))
}

/// Run the negotiation until the per-round error falls below the tolerance.
pub fn negotiate_equilibrium(demands: &[f64], params: &SystemParams) -> Result<Equilibrium, MfgError> {
    let (params, total) = checked_demands(demands, params)?;
    let mut ap = Negotiator::new(total, &params)?;
    loop {
        let reports = best_responses(demands, &ap.broadcast(), ap.params())?;
        match ap.absorb(reports)? {
            RoundStatus::Continue => continue,
            RoundStatus::Converged => {
                let workload_expectation = ap.broadcast().workload;
                let alphas = ap.alphas().to_vec();
                return Ok(Equilibrium {
                    alphas,
                    workload_expectation,
                    trace: ap.into_trace(),
                });
            }
            RoundStatus::Exhausted => return Err(MfgError::NotConverged(Box::new(ap.into_trace()))),
        }
    }
}

/// Run exactly `rounds` rounds, ignoring the stopping rule. Used to tabulate
/// the error decay.
pub fn negotiate_rounds(demands: &[f64], params: &SystemParams, rounds: usize) -> Result<NegotiationTrace, MfgError> {
    let (mut params, total) = checked_demands(demands, params)?;
    params.max_rounds = usize::MAX;
    let mut ap = Negotiator::new(total, &params)?;
    for _ in 0..rounds {
        let reports = best_responses(demands, &ap.broadcast(), ap.params())?;
        ap.absorb(reports)?;
    }
    Ok(ap.into_trace())
}
