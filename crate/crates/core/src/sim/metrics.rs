use super::scenario::{DemandScale, Policy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnomalyEvent {
    pub device: u32,
    /// Seconds from the start of the run.
    pub onset: f64,
    /// `None` while pending.
    pub detected_at: Option<f64>,
}

impl AnomalyEvent {
    pub fn delay(&self) -> Option<f64> {
        self.detected_at.map(|t| t - self.onset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedMetrics {
    pub seed: u64,
    pub policy: Policy,
    pub population_loss: f64,
    /// Authentications executed, successful or not.
    pub total_workload: f64,
    /// Seconds; NaN when nothing was detected.
    pub mean_detection_time: f64,
    pub detected_anomalies: usize,
    pub pending_anomalies: usize,
    pub evicted_devices: usize,
    pub handshake_failures: u64,
    pub mean_alpha: f64,
    /// Anomalies of non-evicted devices.
    pub anomalies: Vec<AnomalyEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub policy: Policy,
    pub population_loss: f64,
    pub total_workload: f64,
    pub mean_detection_time: f64,
    pub evicted_devices: f64,
    pub handshake_failures: f64,
    pub demand_scale: DemandScale,
    pub per_seed: Vec<SeedMetrics>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

impl MetricsRecord {
    /// Means over seeds. Seeds without any detection are skipped for the
    /// detection mean.
    pub fn aggregate(policy: Policy, demand_scale: DemandScale, per_seed: Vec<SeedMetrics>) -> Self {
        Self {
            policy,
            population_loss: mean(per_seed.iter().map(|s| s.population_loss)),
            total_workload: mean(per_seed.iter().map(|s| s.total_workload)),
            mean_detection_time: mean(per_seed.iter().map(|s| s.mean_detection_time).filter(|v| !v.is_nan())),
            evicted_devices: mean(per_seed.iter().map(|s| s.evicted_devices as f64)),
            handshake_failures: mean(per_seed.iter().map(|s| s.handshake_failures as f64)),
            demand_scale,
            per_seed,
        }
    }
}
