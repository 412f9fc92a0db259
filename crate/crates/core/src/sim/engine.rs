//! Discrete-event run of one scenario seed.
//!
//! Every device authenticates at `k T / alpha`, `k = 1, 2, ...`, running a
//! full DTR-MAC handshake each time. An anomaly is detected at the first
//! successful authentication at or after its onset. If an anomaly is still
//! open when the horizon is reached the device performs one more boundary
//! authentication.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dtr::{run_handshake, AuthSession, Credentials, PenaltyLedger, Role};

use super::demand::sample_demands;
use super::metrics::{AnomalyEvent, SeedMetrics};
use super::policy::{policy_frequencies, population_loss};
use super::scenario::{Policy, Scenario};
use super::SimError;

const STREAM_DEMAND: u64 = 0;
const STREAM_ANOMALY: u64 = 1;
const STREAM_CREDENTIALS: u64 = 2;
const STREAM_JITTER: u64 = 3;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    device: usize,
    index: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.device.cmp(&other.device))
    }
}

struct Device {
    period: f64,
    ue: AuthSession,
    ap: AuthSession,
    ledger: PenaltyLedger,
    last_success: f64,
    /// Sorted onsets not yet detected.
    open: Vec<f64>,
    resolved: Vec<AnomalyEvent>,
}

/// Demands for a seed; identical across policies.
pub fn seed_demands(scenario: &Scenario, seed: u64) -> Result<Vec<f64>, SimError> {
    let mut rng = stream(seed, STREAM_DEMAND);
    sample_demands(
        scenario.demand_mean,
        scenario.demand_stddev,
        scenario.demand_bounds,
        scenario.params.n_devices,
        &mut rng,
    )
}

/// Simulate one seed of `scenario` under `policy`.
pub fn run_seed(scenario: &Scenario, policy: Policy, seed: u64) -> Result<SeedMetrics, SimError> {
    scenario.validate()?;
    let params = &scenario.params;
    let n = params.n_devices;
    let demands = seed_demands(scenario, seed)?;
    let alphas = policy_frequencies(
        policy,
        &demands,
        params,
        scenario.demand_scale,
        scenario.demand_bounds.1,
    )?;
    let loss = population_loss(&demands, &alphas, params)?;

    let time_unit = params.time_unit;
    let sleep_unit = scenario.sleep_unit();
    let horizon = scenario.horizon;
    let slack = 1e-9 * horizon;

    let mut anomaly_rng = stream(seed, STREAM_ANOMALY);
    let mut cred_rng = stream(seed, STREAM_CREDENTIALS);
    let mut jitter_rng = stream(seed, STREAM_JITTER);

    let mut devices = Vec::with_capacity(n);
    let mut queue = BinaryHeap::new();
    for (i, &alpha) in alphas.iter().enumerate() {
        let creds = Credentials::random(&mut cred_rng);
        let mut open: Vec<f64> = (0..scenario.anomalies_per_device)
            .map(|_| anomaly_rng.random::<f64>() * horizon)
            .collect();
        open.sort_by(f64::total_cmp);
        let period = if alpha > 0.0 { time_unit / alpha } else { f64::INFINITY };
        if period.is_finite() {
            queue.push(Reverse(Event {
                time: period,
                device: i,
                index: 1,
            }));
        }
        devices.push(Device {
            period,
            ue: AuthSession::new(Role::Device, &creds, 0.0, sleep_unit)?,
            ap: AuthSession::new(Role::AccessPoint, &creds, 0.0, sleep_unit)?,
            ledger: PenaltyLedger::new(scenario.oversleep_limit),
            last_success: 0.0,
            open,
            resolved: Vec::new(),
        });
    }

    let mut workload = 0u64;
    let mut failures = 0u64;
    while let Some(Reverse(ev)) = queue.pop() {
        let dev = &mut devices[ev.device];
        let delay = if scenario.arrival_jitter > 0.0 {
            jitter_rng.random::<f64>() * scenario.arrival_jitter * sleep_unit
        } else {
            0.0
        };
        let transcript = run_handshake(&mut dev.ue, &mut dev.ap, ev.time, ev.time + delay)?;
        workload += 1;
        if transcript.completed {
            dev.ledger.credit(1.0);
            dev.ledger
                .apply_oversleep_penalty(ev.time - dev.last_success, sleep_unit);
            dev.last_success = ev.time;
            let due = dev.open.iter().take_while(|&&onset| onset <= ev.time).count();
            let device = ev.device as u32;
            dev.resolved.extend(dev.open.drain(..due).map(|onset| AnomalyEvent {
                device,
                onset,
                detected_at: Some(ev.time),
            }));
            if dev.ledger.evicted {
                dev.ue.revoke();
                dev.ap.revoke();
                continue;
            }
        } else {
            failures += 1;
        }
        let next = Event {
            time: (ev.index + 1) as f64 * dev.period,
            device: ev.device,
            index: ev.index + 1,
        };
        if next.time <= horizon + slack || ev.time < horizon + slack && !dev.open.is_empty() {
            queue.push(Reverse(next));
        }
    }

    let mut detection_sum = 0.0;
    let mut detected = 0usize;
    let mut pending = 0usize;
    let mut evicted = 0usize;
    let mut anomalies = Vec::new();
    for (i, dev) in devices.into_iter().enumerate() {
        if dev.ledger.evicted {
            evicted += 1;
            continue;
        }
        for a in &dev.resolved {
            detection_sum += a.delay().unwrap_or(0.0);
        }
        detected += dev.resolved.len();
        pending += dev.open.len();
        anomalies.extend(dev.resolved);
        anomalies.extend(dev.open.into_iter().map(|onset| AnomalyEvent {
            device: i as u32,
            onset,
            detected_at: None,
        }));
    }

    Ok(SeedMetrics {
        seed,
        policy,
        population_loss: loss,
        total_workload: workload as f64,
        mean_detection_time: if detected > 0 {
            detection_sum / detected as f64
        } else {
            f64::NAN
        },
        detected_anomalies: detected,
        pending_anomalies: pending,
        evicted_devices: evicted,
        handshake_failures: failures,
        mean_alpha: alphas.iter().sum::<f64>() / n as f64,
        anomalies,
    })
}
