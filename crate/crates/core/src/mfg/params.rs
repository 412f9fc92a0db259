use super::MfgError;

/// Access-point constants shared by every device in the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Population size N.
    pub n_devices: usize,
    /// Population frequency cap F_P, authentications per time unit.
    pub f_pop_max: f64,
    /// Individual frequency cap F_I, authentications per time unit.
    pub f_ind_max: f64,
    /// Length of the time unit T in seconds.
    pub time_unit: f64,
    /// Negotiation stops once the mean per-device change drops below this.
    pub tolerance: f64,
    pub max_rounds: usize,
    /// Relaxation applied by the AP when it folds a new workload estimate
    /// into the broadcast value. 1.0 is the plain substitution.
    pub step_size: f64,
}

impl SystemParams {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;
    pub const DEFAULT_MAX_ROUNDS: usize = 50;
    pub const DEFAULT_STEP_SIZE: f64 = 1.2;

    pub fn new(n_devices: usize, f_pop_max: f64, f_ind_max: f64, time_unit: f64) -> Result<Self, MfgError> {
        Self {
            n_devices,
            f_pop_max,
            f_ind_max,
            time_unit,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_rounds: Self::DEFAULT_MAX_ROUNDS,
            step_size: Self::DEFAULT_STEP_SIZE,
        }
        .validated()
    }

    /// Simulation defaults: F_P = 2000, F_I = 20, T = 10 s.
    pub fn table_defaults(n_devices: usize) -> Result<Self, MfgError> {
        Self::new(n_devices, 2000.0, 20.0, 10.0)
    }

    pub fn validated(self) -> Result<Self, MfgError> {
        if self.n_devices < 2 {
            return Err(MfgError::InvalidParams("n_devices must be at least 2"));
        }
        if !(self.f_pop_max > 0.0 && self.f_pop_max.is_finite()) {
            return Err(MfgError::InvalidParams("f_pop_max must be positive"));
        }
        if !(self.f_ind_max > 0.0 && self.f_ind_max.is_finite()) {
            return Err(MfgError::InvalidParams("f_ind_max must be positive"));
        }
        if !(self.time_unit > 0.0 && self.time_unit.is_finite()) {
            return Err(MfgError::InvalidParams("time_unit must be positive"));
        }
        if !(self.tolerance > 0.0) {
            return Err(MfgError::InvalidParams("tolerance must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(MfgError::InvalidParams("max_rounds must be positive"));
        }
        if !(self.step_size > 0.0 && self.step_size < 2.0) {
            return Err(MfgError::InvalidParams("step_size must lie in (0, 2)"));
        }
        Ok(self)
    }

    /// Admissible individual frequency F_m = min(F_I, F_P / N).
    pub fn f_m(&self) -> f64 {
        self.f_ind_max.min(self.f_pop_max / self.n_devices as f64)
    }

    /// Copy with T = 1; negotiation always runs on unit time.
    pub fn unitized(&self) -> Self {
        Self {
            time_unit: 1.0,
            ..*self
        }
    }

    pub fn with_devices(&self, n_devices: usize) -> Result<Self, MfgError> {
        Self { n_devices, ..*self }.validated()
    }

    /// Population capacity F_P * T.
    pub fn capacity(&self) -> f64 {
        self.f_pop_max * self.time_unit
    }
}

/// One user equipment: its demand, current frequency and accumulated work.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    pub id: u32,
    pub demand: f64,
    pub alpha: f64,
    pub workload: f64,
}

impl DeviceProfile {
    pub fn new(id: u32, demand: f64) -> Result<Self, MfgError> {
        if !(demand > 0.0 && demand.is_finite()) {
            return Err(MfgError::Domain("demand must be positive"));
        }
        Ok(Self {
            id,
            demand,
            alpha: 0.0,
            workload: 0.0,
        })
    }
}

/// Population-level state held by the AP during negotiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationState {
    pub total_resource: f64,
    pub workload_expectation: f64,
    pub round: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_m_switches_regime_at_fp_over_fi() {
        let p = SystemParams::table_defaults(20).unwrap();
        assert_eq!(p.f_m(), 20.0);
        let p = p.with_devices(100).unwrap();
        assert_eq!(p.f_m(), 20.0);
        let p = p.with_devices(180).unwrap();
        assert!((p.f_m() - 2000.0 / 180.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_single_device() {
        assert!(SystemParams::new(1, 2000.0, 20.0, 1.0).is_err());
        assert!(SystemParams::new(2, 0.0, 20.0, 1.0).is_err());
        assert!(SystemParams::new(2, 2000.0, -1.0, 1.0).is_err());
        assert!(SystemParams::new(2, 2000.0, 20.0, 0.0).is_err());
    }

    #[test]
    fn unitized_keeps_caps() {
        let p = SystemParams::table_defaults(100).unwrap().unitized();
        assert_eq!(p.time_unit, 1.0);
        assert_eq!(p.capacity(), 2000.0);
    }

    #[test]
    fn device_demand_must_be_positive() {
        assert!(DeviceProfile::new(1, 0.0).is_err());
        assert!(DeviceProfile::new(1, f64::NAN).is_err());
        assert!(DeviceProfile::new(1, 3.0).is_ok());
    }
}
