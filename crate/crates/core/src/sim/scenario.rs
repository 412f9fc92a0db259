use std::fmt;
use std::str::FromStr;

use crate::mfg::SystemParams;

use super::SimError;

/// Frequency policy under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    /// Negotiated mean-field equilibrium.
    Hisam,
    /// Every device at `F_m`.
    FixedHigh,
    /// Every device at `F_m / 2`.
    FixedLow,
    /// `F_m r / r_max`.
    DemandDriven,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Hisam, Policy::FixedHigh, Policy::FixedLow, Policy::DemandDriven];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Hisam => "hisam",
            Policy::FixedHigh => "fixed_high",
            Policy::FixedLow => "fixed_low",
            Policy::DemandDriven => "demand_driven",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SimError::InvalidScenario(format!("unknown policy `{s}`")))
    }
}

/// How the demand-driven baseline normalises demand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandScale {
    /// Largest demand actually sampled.
    PopulationMax,
    /// Upper truncation bound of the demand distribution.
    UpperBound,
}

impl DemandScale {
    pub fn name(self) -> &'static str {
        match self {
            DemandScale::PopulationMax => "population_max",
            DemandScale::UpperBound => "upper_bound",
        }
    }
}

/// Parameter swept by [`super::experiment_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Mean,
    Variance,
    Size,
}

impl Sweep {
    pub fn name(self) -> &'static str {
        match self {
            Sweep::Mean => "mean",
            Sweep::Variance => "variance",
            Sweep::Size => "size",
        }
    }

    pub fn default_values(self) -> &'static [f64] {
        match self {
            Sweep::Mean => &[4.0, 8.0, 10.0, 12.0, 16.0],
            Sweep::Variance => &[1.0, 2.0, 3.0, 4.0, 5.0],
            Sweep::Size => &[20.0, 60.0, 100.0, 140.0, 180.0],
        }
    }
}

impl FromStr for Sweep {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(Sweep::Mean),
            "variance" => Ok(Sweep::Variance),
            "size" => Ok(Sweep::Size),
            _ => Err(SimError::InvalidScenario(format!("unknown sweep `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Physical constants; `time_unit` is in seconds.
    pub params: SystemParams,
    pub demand_mean: f64,
    pub demand_stddev: f64,
    /// Open interval the demand is truncated to.
    pub demand_bounds: (f64, f64),
    pub policy: Policy,
    pub seeds: Vec<u64>,
    /// Simulated span in seconds.
    pub horizon: f64,
    pub anomalies_per_device: usize,
    /// Oversleep limit `n`; the sleep unit is `T / F_m`.
    pub oversleep_limit: u32,
    /// Upper bound on arrival delay, in sleep units.
    pub arrival_jitter: f64,
    pub demand_scale: DemandScale,
}

impl Scenario {
    pub const DEFAULT_VARIANCE: f64 = 3.0;

    /// N = 100, F_P = 2000, F_I = 20, T = 10 s, demand mean 10 and
    /// variance 3 truncated to (0, 20), ten seeds, one time unit simulated.
    pub fn table_defaults() -> Self {
        let params = SystemParams::table_defaults(100).expect("defaults are valid");
        Self {
            horizon: params.time_unit,
            params,
            demand_mean: 10.0,
            demand_stddev: Self::DEFAULT_VARIANCE.sqrt(),
            demand_bounds: (0.0, 20.0),
            policy: Policy::Hisam,
            seeds: (1..=10).collect(),
            anomalies_per_device: 1,
            oversleep_limit: 2,
            arrival_jitter: 0.0,
            demand_scale: DemandScale::PopulationMax,
        }
    }

    pub fn with_variance(mut self, variance: f64) -> Self {
        self.demand_stddev = variance.sqrt();
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidScenario(m.to_string()));
        self.params.validated()?;
        let (lo, hi) = self.demand_bounds;
        if !(lo < self.demand_mean && self.demand_mean < hi) {
            return bad("demand bounds must contain the mean");
        }
        if !(self.demand_stddev > 0.0) {
            return bad("demand stddev must be positive");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if !(self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if self.oversleep_limit == 0 {
            return bad("oversleep limit must be positive");
        }
        if !(0.0..1.0).contains(&self.arrival_jitter) {
            return bad("arrival jitter must lie in [0, 1) sleep units");
        }
        Ok(())
    }

    pub fn sleep_unit(&self) -> f64 {
        self.params.time_unit / self.params.f_m()
    }
}
