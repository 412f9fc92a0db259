use std::thread;

use super::engine::run_seed;
use super::metrics::MetricsRecord;
use super::scenario::{Policy, Scenario, Sweep};
use super::SimError;

/// Every seed of `scenario` under its own policy, seeds run in parallel.
pub fn run_simulation(scenario: &Scenario) -> Result<MetricsRecord, SimError> {
    run_policy(scenario, scenario.policy)
}

fn run_policy(scenario: &Scenario, policy: Policy) -> Result<MetricsRecord, SimError> {
    scenario.validate()?;
    let per_seed = thread::scope(|s| {
        let handles: Vec<_> = scenario
            .seeds
            .iter()
            .map(|&seed| s.spawn(move || run_seed(scenario, policy, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(MetricsRecord::aggregate(policy, scenario.demand_scale, per_seed))
}

/// `base` with the swept parameter set to `value`.
pub fn apply_sweep(base: &Scenario, sweep: Sweep, value: f64) -> Result<Scenario, SimError> {
    let mut s = base.clone();
    match sweep {
        Sweep::Mean => s.demand_mean = value,
        Sweep::Variance => s = s.with_variance(value),
        Sweep::Size => {
            if value.fract() != 0.0 || value < 2.0 {
                return Err(SimError::InvalidScenario(format!("population size {value}")));
            }
            s.params = s.params.with_devices(value as usize)?;
        }
    }
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub sweep: Sweep,
    pub value: f64,
    /// One record per policy, in [`Policy::ALL`] order.
    pub records: Vec<MetricsRecord>,
}

impl GridPoint {
    pub fn record(&self, policy: Policy) -> &MetricsRecord {
        self.records
            .iter()
            .find(|r| r.policy == policy)
            .expect("every policy is run")
    }
}

/// All policies at every sweep value, merged in (value, policy, seed) order.
pub fn experiment_grid(base: &Scenario, sweep: Sweep, values: &[f64]) -> Result<Vec<GridPoint>, SimError> {
    values
        .iter()
        .map(|&value| {
            let scenario = apply_sweep(base, sweep, value)?;
            let records = Policy::ALL
                .iter()
                .map(|&p| run_policy(&scenario, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(GridPoint { sweep, value, records })
        })
        .collect()
}
