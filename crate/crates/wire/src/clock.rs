use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

/// Time source consulted per device, so tests can give every device its own
/// deterministic timeline.
pub trait Clock: Send + Sync {
    /// Seconds on the device's timeline.
    fn now(&self, device: u32) -> f64;
    fn sleep(&self, device: u32, secs: f64);
}

/// Wall clock in seconds since the Unix epoch; shared across processes.
#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self, _device: u32) -> f64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0)
    }

    fn sleep(&self, _device: u32, secs: f64) {
        if secs > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(secs));
        }
    }
}

/// Every device starts at zero and advances only when it sleeps.
#[derive(Debug, Default)]
pub struct VirtualClock {
    times: Mutex<HashMap<u32, f64>>,
}

impl VirtualClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for VirtualClock {
    fn now(&self, device: u32) -> f64 {
        *self.times.lock().unwrap().get(&device).unwrap_or(&0.0)
    }

    fn sleep(&self, device: u32, secs: f64) {
        *self.times.lock().unwrap().entry(device).or_insert(0.0) += secs.max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virtual_timelines_are_independent() {
        let c = VirtualClock::new();
        c.sleep(1, 2.5);
        c.sleep(1, 0.5);
        c.sleep(2, 1.0);
        assert_eq!(c.now(1), 3.0);
        assert_eq!(c.now(2), 1.0);
        assert_eq!(c.now(3), 0.0);
    }
}
