use super::{MfgError, SystemParams};

/// Resource shares granted in proportion to authentication work.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub per_device_share: Vec<f64>,
}

/// `share_i = R * alpha_i / (X / T)`.
pub fn allocate_resources(
    alphas: &[f64],
    x_pop: f64,
    params: &SystemParams,
    total_resource: f64,
) -> Result<Allocation, MfgError> {
    if !(x_pop > 0.0) {
        return Err(MfgError::Domain("population workload must be positive"));
    }
    let rate = x_pop / params.time_unit;
    Ok(Allocation {
        per_device_share: alphas.iter().map(|a| total_resource * a / rate).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_device_substitution() {
        let p = SystemParams::new(2, 10.0, 5.0, 1.0).unwrap();
        let a = allocate_resources(&[1.0, 2.0], 3.0, &p, 30.0).unwrap();
        assert_eq!(a.per_device_share, vec![10.0, 20.0]);
    }

    #[test]
    fn symmetric_shares() {
        let p = SystemParams::new(4, 100.0, 20.0, 2.0).unwrap();
        let alphas = [3.0; 4];
        let x = 2.0 * 12.0;
        let a = allocate_resources(&alphas, x, &p, 40.0).unwrap();
        assert!(a.per_device_share.iter().all(|s| (s - 10.0).abs() < 1e-12));
    }

    #[test]
    fn zero_frequency_zero_share() {
        let p = SystemParams::new(2, 10.0, 5.0, 1.0).unwrap();
        let a = allocate_resources(&[0.0, 2.0], 2.0, &p, 30.0).unwrap();
        assert_eq!(a.per_device_share[0], 0.0);
        assert!(allocate_resources(&[1.0], 0.0, &p, 1.0).is_err());
    }
}
