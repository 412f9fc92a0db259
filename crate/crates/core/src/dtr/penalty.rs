/// Sleep periods are reconstructed from floating timestamps; ratios this
/// close to an integer are treated as that integer.
const RATIO_SNAP: f64 = 1e-9;

/// Per-device oversleep bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyLedger {
    pub oversleep_limit: u32,
    pub workload: f64,
    pub evicted: bool,
}

impl PenaltyLedger {
    pub fn new(oversleep_limit: u32) -> Self {
        assert!(oversleep_limit > 0, "oversleep limit must be positive");
        Self {
            oversleep_limit,
            workload: 0.0,
            evicted: false,
        }
    }

    pub fn credit(&mut self, work: f64) {
        self.workload += work;
    }

    /// Deduct `ceil(Ps / Ts) - n` when the sleep period exceeds `n Ts`, then
    /// evict on negative workload. Returns the deduction.
    pub fn apply_oversleep_penalty(&mut self, sleep_period: f64, sleep_unit: f64) -> f64 {
        let deduction = oversleep_deduction(sleep_period, sleep_unit, self.oversleep_limit);
        self.workload -= deduction;
        if self.workload < 0.0 {
            self.evicted = true;
        }
        deduction
    }
}

/// `ceil(Ps / Ts) - n` if `Ps > n Ts`, else zero.
pub fn oversleep_deduction(sleep_period: f64, sleep_unit: f64, oversleep_limit: u32) -> f64 {
    assert!(sleep_unit > 0.0, "sleep unit must be positive");
    let mut units = sleep_period.max(0.0) / sleep_unit;
    let nearest = units.round();
    if (units - nearest).abs() <= RATIO_SNAP * nearest.max(1.0) {
        units = nearest;
    }
    let limit = oversleep_limit as f64;
    if units > limit {
        units.ceil() - limit
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_is_free() {
        let mut l = PenaltyLedger::new(2);
        assert_eq!(l.apply_oversleep_penalty(1.0, 0.5), 0.0);
        assert_eq!(l.workload, 0.0);
        assert!(!l.evicted);
    }

    #[test]
    fn four_and_a_half_units() {
        let mut l = PenaltyLedger::new(2);
        l.credit(10.0);
        assert_eq!(l.apply_oversleep_penalty(4.5, 1.0), 3.0);
        assert_eq!(l.workload, 7.0);
    }

    #[test]
    fn eviction_on_negative_workload() {
        let mut l = PenaltyLedger::new(2);
        l.credit(1.0);
        l.apply_oversleep_penalty(4.5, 1.0);
        assert_eq!(l.workload, -2.0);
        assert!(l.evicted);
    }

    #[test]
    fn zero_workload_is_not_eviction() {
        let mut l = PenaltyLedger::new(2);
        l.credit(1.0);
        l.apply_oversleep_penalty(3.0, 1.0);
        assert_eq!(l.workload, 0.0);
        assert!(!l.evicted);
    }

    #[test]
    fn float_noise_snaps_to_whole_units() {
        // 10 / (20/3) / (10/20) is 3 up to rounding
        let period = 10.0 / (20.0 / 3.0);
        let unit = 10.0 / 20.0;
        assert_eq!(oversleep_deduction(period, unit, 2), 1.0);
        assert_eq!(oversleep_deduction(10.0 / 10.0, unit, 2), 0.0);
    }
}
