use crate::mfg::{loss_individual, negotiate_equilibrium, SystemParams};

use super::scenario::{DemandScale, Policy};
use super::SimError;

const SATURATION_SNAP: f64 = 1e-9;

/// Frequencies in authentications per time unit, one per device.
pub fn policy_frequencies(
    policy: Policy,
    demands: &[f64],
    params: &SystemParams,
    scale: DemandScale,
    upper_bound: f64,
) -> Result<Vec<f64>, SimError> {
    let params = params.with_devices(demands.len())?;
    let f_m = params.f_m();
    let n = demands.len();
    Ok(match policy {
        Policy::Hisam => negotiate_equilibrium(demands, &params)?.alphas,
        Policy::FixedHigh => vec![f_m; n],
        Policy::FixedLow => vec![f_m / 2.0; n],
        Policy::DemandDriven => {
            let r_max = match scale {
                DemandScale::PopulationMax => demands.iter().copied().fold(f64::MIN, f64::max),
                DemandScale::UpperBound => upper_bound,
            };
            demands.iter().map(|r| f_m * r / r_max).collect()
        }
    })
}

/// Sum of per-device losses with the population workload taken as the
/// realised rate `X = T sum(alpha)`, on unit time. Infinite when the
/// population saturates the access point, counting rounding residue at
/// exactly `F_P` as saturation.
pub fn population_loss(demands: &[f64], alphas: &[f64], params: &SystemParams) -> Result<f64, SimError> {
    let unit = params.with_devices(demands.len())?.unitized();
    let x: f64 = alphas.iter().sum::<f64>() * unit.time_unit;
    if x / unit.time_unit >= unit.f_pop_max * (1.0 - SATURATION_SNAP) {
        return Ok(f64::INFINITY);
    }
    let total: f64 = demands.iter().sum();
    demands
        .iter()
        .zip(alphas)
        .map(|(&r, &a)| loss_individual(r, a, x, &unit, total).map_err(SimError::from))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SystemParams {
        SystemParams::table_defaults(4).unwrap()
    }

    #[test]
    fn fixed_policies() {
        let d = [1.0, 5.0, 9.0, 12.0];
        let hi = policy_frequencies(Policy::FixedHigh, &d, &params(), DemandScale::PopulationMax, 20.0).unwrap();
        assert_eq!(hi, vec![20.0; 4]);
        let lo = policy_frequencies(Policy::FixedLow, &d, &params(), DemandScale::PopulationMax, 20.0).unwrap();
        assert_eq!(lo, vec![10.0; 4]);
    }

    #[test]
    fn demand_driven_top_device_at_cap() {
        let d = [1.0, 5.0, 9.0, 12.0];
        let a = policy_frequencies(Policy::DemandDriven, &d, &params(), DemandScale::PopulationMax, 20.0).unwrap();
        assert_eq!(a[3], 20.0);
        assert!((a[0] - 20.0 / 12.0).abs() < 1e-12);
        let b = policy_frequencies(Policy::DemandDriven, &d, &params(), DemandScale::UpperBound, 20.0).unwrap();
        assert_eq!(b[3], 12.0);
    }

    #[test]
    fn saturated_loss_is_infinite() {
        let p = SystemParams::table_defaults(100).unwrap();
        let d = vec![10.0; 100];
        let l = population_loss(&d, &vec![20.0; 100], &p).unwrap();
        assert!(l.is_infinite());
        let l = population_loss(&d, &vec![10.0; 100], &p).unwrap();
        // 100 * (10/1000 + 1000*10/(1000*10))
        assert!((l - 101.0).abs() < 1e-9);
    }

    #[test]
    fn rounding_at_capacity_is_saturation() {
        let p = SystemParams::table_defaults(140).unwrap();
        let f_m = p.f_m();
        let l = population_loss(&vec![10.0; 140], &vec![f_m; 140], &p).unwrap();
        assert!(l.is_infinite());
    }
}
