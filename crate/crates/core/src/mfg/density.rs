//! Triangular mean-field density and the population workload it implies.
//!
//! The continuity equation `m_t + a m_x = 0` has straight characteristics,
//! so each device's density is a fixed triangle translated at speed `a`.
//! The triangle has base `x_b`, height `2 / x_b`, and puts mass `weight` to
//! the left of its vertex. The vertex sits at `a t`.

use super::{MfgError, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldTriangle {
    /// Speed of the vertex, the device's optimal frequency.
    pub vertex_rate: f64,
    /// Base length `x_b`.
    pub base: f64,
    /// Share of the base lying left of the vertex, in `[0, 1]`.
    pub weight: f64,
    /// Moment at which the triangle is anchored.
    pub focus_time: f64,
}

impl MeanFieldTriangle {
    pub fn new(vertex_rate: f64, base: f64, weight: f64, focus_time: f64) -> Result<Self, MfgError> {
        if !(vertex_rate > 0.0 && base > 0.0) {
            return Err(MfgError::Domain("vertex rate and base must be positive"));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(MfgError::Domain("weight must lie in [0, 1]"));
        }
        if !(focus_time > 0.0) {
            return Err(MfgError::Domain("focus time must be positive"));
        }
        Ok(Self {
            vertex_rate,
            base,
            weight,
            focus_time,
        })
    }

    /// Unit-time form: support `[0, F_m]` at `t = 1`, vertex at `alpha`.
    pub fn unitized(alpha: f64, f_m: f64) -> Result<Self, MfgError> {
        if !(alpha > 0.0 && alpha <= f_m) {
            return Err(MfgError::Domain("alpha must lie in (0, F_m]"));
        }
        Self::new(alpha, f_m, alpha / f_m, 1.0)
    }

    pub fn vertex(&self, t: f64) -> f64 {
        self.vertex_rate * t
    }

    /// Left and right support edges at time `t`.
    pub fn support(&self, t: f64) -> (f64, f64) {
        let v = self.vertex(t);
        (v - self.weight * self.base, v + (1.0 - self.weight) * self.base)
    }

    pub fn peak(&self) -> f64 {
        2.0 / self.base
    }

    /// Density value at `(t, x)`.
    pub fn density(&self, t: f64, x: f64) -> f64 {
        let (lo, hi) = self.support(t);
        let v = self.vertex(t);
        if x < lo || x > hi {
            return 0.0;
        }
        let left = self.weight * self.base;
        let right = (1.0 - self.weight) * self.base;
        // a zero-width limb never gets evaluated: x == v falls to the peak
        if x < v {
            if left == 0.0 {
                return 0.0;
            }
            2.0 * (x - lo) / (self.base * left)
        } else if x > v {
            if right == 0.0 {
                return 0.0;
            }
            2.0 * (hi - x) / (self.base * right)
        } else {
            self.peak()
        }
    }

    /// Mean of the triangle at time `t`: average of its three corners.
    pub fn mean(&self, t: f64) -> f64 {
        let (lo, hi) = self.support(t);
        (lo + self.vertex(t) + hi) / 3.0
    }
}

/// Unit-time density value for a device at frequency `alpha`.
pub fn triangle_density(tri: &MeanFieldTriangle, t: f64, x: f64, params: &SystemParams) -> f64 {
    debug_assert!(t >= 0.0 && t <= params.time_unit);
    tri.density(t, x)
}

/// Expected population workload at the focus time:
/// `sum_i (alpha_i + F_m) T / 3`.
pub fn expected_population_workload(alphas: &[f64], params: &SystemParams) -> f64 {
    let f_m = params.f_m();
    alphas.iter().map(|a| (a + f_m) * params.time_unit / 3.0).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitized_peak_and_edges() {
        let tri = MeanFieldTriangle::unitized(12.0, 20.0).unwrap();
        assert!((tri.density(1.0, 12.0) - 0.1).abs() < 1e-15);
        assert_eq!(tri.density(1.0, 0.0), 0.0);
        assert_eq!(tri.density(1.0, 20.0), 0.0);
        assert_eq!(tri.density(1.0, -0.1), 0.0);
        assert_eq!(tri.density(1.0, 20.1), 0.0);
    }

    #[test]
    fn unitized_limbs_match_closed_form() {
        let (a, fm) = (7.5, 20.0);
        let tri = MeanFieldTriangle::unitized(a, fm).unwrap();
        for &t in &[0.3, 0.7, 1.0] {
            for k in 0..50 {
                let x = -5.0 + k as f64 * 0.6;
                let expect = if x < a * t {
                    (2.0 * (x - a * (t - 1.0)) / (fm * a)).max(0.0)
                } else {
                    (-2.0 * (x - fm - a * (t - 1.0)) / (fm * (fm - a))).max(0.0)
                };
                assert!((tri.density(t, x) - expect).abs() < 1e-12, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn degenerate_right_edge() {
        let tri = MeanFieldTriangle::unitized(20.0, 20.0).unwrap();
        assert_eq!(tri.support(1.0), (0.0, 20.0));
        assert!((tri.density(1.0, 20.0) - 0.1).abs() < 1e-15);
        assert!((tri.density(1.0, 10.0) - 0.05).abs() < 1e-15);
        assert_eq!(tri.density(1.0, 20.0 + 1e-9), 0.0);
        assert!((tri.mean(1.0) - 40.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_triangle() {
        assert!(MeanFieldTriangle::unitized(0.0, 20.0).is_err());
        assert!(MeanFieldTriangle::unitized(21.0, 20.0).is_err());
        assert!(MeanFieldTriangle::new(1.0, 1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn workload_substitution() {
        let p = SystemParams::new(100, 2000.0, 20.0, 1.0).unwrap();
        let x = expected_population_workload(&vec![15.1; 100], &p);
        assert!((x - 1170.0).abs() < 1e-9);
        let p2 = SystemParams::new(2, 40.0, 20.0, 1.0).unwrap();
        assert!((expected_population_workload(&[20.0], &p2) - 40.0 / 3.0).abs() < 1e-12);
    }
}
