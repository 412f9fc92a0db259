use hisam_core::mfg::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(n: usize) -> SystemParams {
    SystemParams::new(n, 2000.0, 20.0, 1.0).unwrap()
}

/// Simpson on each linear piece between the triangle's corners, which is
/// exact for piecewise polynomials up to degree 3.
fn piecewise_simpson(tri: &MeanFieldTriangle, t: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = tri.support(t);
    let v = tri.vertex(t);
    let mut sum = 0.0;
    for (a, b) in [(lo, v), (v, hi)] {
        if b > a {
            // interior points only, so kinks never leak across a piece
            let m = 0.5 * (a + b);
            let eval = |x: f64| tri.density(t, x) * f(x);
            let fa = eval(a + (b - a) * 1e-15).max(0.0);
            let fb = eval(b - (b - a) * 1e-15).max(0.0);
            sum += (b - a) / 6.0 * (fa + 4.0 * eval(m) + fb);
        }
    }
    sum
}

/// Scalar fixed point for equal demands: alpha as a function of the
/// broadcast workload, iterated with the same relaxation the AP uses.
fn equal_demand_oracle(n: usize, r: f64, fp: f64, fi: f64) -> (f64, f64) {
    let fm = fi.min(fp / n as f64);
    let big_r = n as f64 * r;
    let alpha_of = |x: f64| {
        let mu1 = 1.0 / (fp - x);
        let mu2 = big_r / (x * r);
        (1.0 / (mu2 * (mu1 + 1.0 / fm))).sqrt().min(fm)
    };
    let mut x = n as f64 * (0.8 * fm + fm) / 3.0;
    for _ in 0..500 {
        let a = alpha_of(x);
        x += 1.2 * (n as f64 * (a + fm) / 3.0 - x);
    }
    (alpha_of(x), x)
}

#[test]
fn equal_demand_equilibrium_matches_scalar_oracle() {
    let (alpha, x) = equal_demand_oracle(100, 10.0, 2000.0, 20.0);
    assert!((alpha - 15.1202334133451).abs() < 1e-9, "{alpha}");
    assert!((x - 1170.6744471115035).abs() < 1e-6, "{x}");
    let eq = negotiate_equilibrium(&[10.0; 100], &unit(100)).unwrap();
    for a in &eq.alphas {
        assert!((a - alpha).abs() < 1e-8, "{a}");
    }
    assert!((eq.workload_expectation - x).abs() < 1e-6);
}

#[test]
fn value_function_matches_constant_control_minimisation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let params = SystemParams::new(10, 50.0, rng.random_range(1.0..5.0), 1.0).unwrap();
        let coeffs = GameCoefficients::new(rng.random_range(0.01..2.0), rng.random_range(0.01..2.0)).unwrap();
        let p = 1.0 / params.f_m();
        let running = |a: f64| coeffs.mu1 * a + 1.0 / (coeffs.mu2 * a);
        for t in [0.0, 0.3, 0.9] {
            for x in [0.0, 0.5, 2.0] {
                // coarse log scan, then repeated zoom around the best node
                let cost = |a: f64| (1.0 - t) * running(a) + terminal_cost(x + a * (1.0 - t), &params);
                let mut best = (0.0, f64::INFINITY);
                for k in 0..=400 {
                    let a = 10f64.powf(-4.0 + 8.0 * k as f64 / 400.0);
                    let c = cost(a);
                    if c < best.1 {
                        best = (a, c);
                    }
                }
                let mut width = best.0 * 0.05;
                for _ in 0..12 {
                    let centre = best.0;
                    for k in -50..=50 {
                        let a = centre + width * k as f64 / 50.0;
                        if a > 0.0 {
                            let c = cost(a);
                            if c < best.1 {
                                best = (a, c);
                            }
                        }
                    }
                    width /= 10.0;
                }
                let v = value_function(t, x, &coeffs, &params).unwrap().value;
                assert!((v - best.1).abs() < 1e-9, "t={t} x={x}: {v} vs {}", best.1);
                if t < 1.0 {
                    let a = coeffs.optimal_feedback(p).unwrap();
                    assert!((a - best.0).abs() / a < 1e-4);
                }
            }
        }
    }
}

#[test]
fn contraction_iteration_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.random_range(2..200);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..20.0)).collect();
        let c = contraction_coefficient(&d).unwrap();
        let p = unit(n);
        let fixed = closed_form_equilibrium(&d, &p).unwrap();
        assert!((aggregated_map(fixed, c, &p) - fixed).abs() < 1e-9);
        let mut x = 0.3 * p.capacity();
        for _ in 0..5 {
            let next = aggregated_map(x, c, &p);
            let ratio = (next - fixed).abs() / (x - fixed).abs();
            assert!((ratio - c).abs() < 1e-6, "{ratio} vs {c}");
            x = next;
        }
    }
}

#[test]
fn negotiation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d: Vec<f64> = (0..64).map(|_| rng.random_range(0.5..19.5)).collect();
    let a = negotiate_equilibrium(&d, &unit(64)).unwrap();
    let b = negotiate_equilibrium(&d, &unit(64)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exhausted_negotiation_reports_trace() {
    let mut p = unit(50);
    p.max_rounds = 2;
    p.tolerance = 1e-300;
    match negotiate_equilibrium(&[3.0; 50], &p) {
        Err(MfgError::NotConverged(trace)) => {
            assert_eq!(trace.rounds(), 2);
            assert!(!trace.converged);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn physical_time_unit_does_not_change_equilibrium() {
    let d = [2.0, 4.0, 9.0, 11.0, 17.0];
    let a = negotiate_equilibrium(&d, &SystemParams::new(5, 60.0, 20.0, 1.0).unwrap()).unwrap();
    let b = negotiate_equilibrium(&d, &SystemParams::new(5, 60.0, 20.0, 10.0).unwrap()).unwrap();
    assert_eq!(a.alphas, b.alphas);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn density_normalisation_and_mean(f_m in 0.5f64..50.0, share in 1e-3f64..1.0, t in 0.05f64..1.0) {
        let alpha = share * f_m;
        let tri = MeanFieldTriangle::unitized(alpha, f_m).unwrap();
        let mass = piecewise_simpson(&tri, t, |_| 1.0);
        prop_assert!((mass - 1.0).abs() < 1e-9, "mass {}", mass);
        let mean = piecewise_simpson(&tri, t, |x| x);
        prop_assert!((mean - tri.mean(t)).abs() < 1e-9 * (1.0 + f_m));
        if (t - 1.0).abs() < 1e-12 {
            prop_assert!((mean - (alpha + f_m) / 3.0).abs() < 1e-9 * (1.0 + f_m));
        }
    }

    #[test]
    fn density_mean_at_focus_time(f_m in 0.5f64..50.0, share in 1e-3f64..1.0) {
        let alpha = share * f_m;
        let tri = MeanFieldTriangle::unitized(alpha, f_m).unwrap();
        let mean = piecewise_simpson(&tri, 1.0, |x| x);
        prop_assert!((mean - (alpha + f_m) / 3.0).abs() < 1e-9 * (1.0 + f_m));
    }

    #[test]
    fn density_transport_residual(f_m in 0.5f64..50.0, share in 0.01f64..0.99, t in 0.1f64..0.9, u in 0.02f64..0.98) {
        let alpha = share * f_m;
        let tri = MeanFieldTriangle::unitized(alpha, f_m).unwrap();
        let (lo, hi) = tri.support(t);
        let x = lo + u * (hi - lo);
        let v = tri.vertex(t);
        let h = 1e-7 * f_m;
        // keep the stencil on one linear piece
        prop_assume!((x - v).abs() > 4.0 * h * (1.0 + alpha) && x - lo > 4.0 * h * (1.0 + alpha) && hi - x > 4.0 * h * (1.0 + alpha));
        let ht = h / (1.0 + alpha);
        let m_t = (tri.density(t + ht, x) - tri.density(t - ht, x)) / (2.0 * ht);
        let m_x = (tri.density(t, x + h) - tri.density(t, x - h)) / (2.0 * h);
        let scale = tri.peak() / f_m * (1.0 + alpha);
        prop_assert!((m_t + alpha * m_x).abs() < 1e-6 * scale, "{} {}", m_t, m_x);
    }

    #[test]
    fn density_vanishes_outside_support(f_m in 0.5f64..50.0, share in 1e-3f64..1.0, t in 0.0f64..1.0, off in 1e-6f64..10.0) {
        let tri = MeanFieldTriangle::unitized(share * f_m, f_m).unwrap();
        let (lo, hi) = tri.support(t);
        prop_assert_eq!(tri.density(t, lo - off), 0.0);
        prop_assert_eq!(tri.density(t, hi + off), 0.0);
    }

    #[test]
    fn feedback_beats_random_probes(mu1 in 1e-3f64..10.0, mu2 in 1e-3f64..10.0, p in 0.0f64..5.0, probes in prop::collection::vec(1e-4f64..1e3, 10)) {
        let c = GameCoefficients::new(mu1, mu2).unwrap();
        let a = c.optimal_feedback(p).unwrap();
        let h = c.hamiltonian(p, a);
        prop_assert!((h - c.hamiltonian_infimum(p).unwrap()).abs() <= 1e-12 * h.max(1.0));
        for b in probes {
            prop_assert!(c.hamiltonian(p, b) >= h - 1e-12 * h.max(1.0));
        }
    }

    #[test]
    fn hamilton_jacobi_consistency(mu1 in 1e-3f64..10.0, mu2 in 1e-3f64..10.0, t in 0.01f64..0.99, x in 0.0f64..5.0) {
        let params = SystemParams::new(10, 50.0, 5.0, 1.0).unwrap();
        let c = GameCoefficients::new(mu1, mu2).unwrap();
        let v = |t: f64, x: f64| value_function(t, x, &c, &params).unwrap().value;
        let h = 1e-5;
        let v_t = (v(t + h, x) - v(t - h, x)) / (2.0 * h);
        let v_x = (v(t, x + h) - v(t, x - h)) / (2.0 * h);
        let hstar = c.hamiltonian_infimum(v_x).unwrap();
        // -v_t = H*(v_x)
        prop_assert!((v_t + hstar).abs() < 1e-6 * (1.0 + hstar), "{} {}", v_t, hstar);
        prop_assert!((v(1.0, x) - terminal_cost(x, &params)).abs() < 1e-12);
    }

    #[test]
    fn contraction_in_unit_interval(d in prop::collection::vec(1e-3f64..20.0, 2..300)) {
        let n = d.len() as f64;
        let c = contraction_coefficient(&d).unwrap();
        prop_assert!(c >= 1.0 / n - 1e-12 && c < 1.0);
    }

    #[test]
    fn unclamped_frequency_ratio_is_root_demand_ratio(ri in 0.1f64..20.0, rj in 0.1f64..20.0, x in 10.0f64..1900.0) {
        let p = SystemParams::new(100, 2000.0, 1e9, 1.0).unwrap();
        let big_r = 1000.0;
        let ai = raw_optimal_alpha(ri, x, &p, big_r).unwrap();
        let aj = raw_optimal_alpha(rj, x, &p, big_r).unwrap();
        prop_assert!((ai / aj - (ri / rj).sqrt()).abs() < 1e-12 * (ri / rj).sqrt().max(1.0));
    }

    #[test]
    fn clamped_alpha_within_cap(r in 0.01f64..20.0, x in 1.0f64..1999.0) {
        let p = unit(100);
        let a = optimal_alpha(r, x, &p, 1000.0).unwrap();
        prop_assert!(a > 0.0 && a <= p.f_m());
    }

    #[test]
    fn allocation_proportional_and_conserving(alphas in prop::collection::vec(0.01f64..20.0, 2..50), big_r in 1.0f64..1e4) {
        let n = alphas.len();
        let p = SystemParams::new(n, 2000.0, 20.0, 1.0).unwrap();
        let x: f64 = alphas.iter().sum();
        let alloc = allocate_resources(&alphas, x, &p, big_r).unwrap();
        let total: f64 = alloc.per_device_share.iter().sum();
        prop_assert!((total - big_r).abs() < 1e-9 * big_r);
        for (s, a) in alloc.per_device_share.iter().zip(&alphas) {
            prop_assert!((s / a - alloc.per_device_share[0] / alphas[0]).abs() < 1e-9 * (big_r / x));
        }
    }

    #[test]
    fn negotiation_error_decreases(seed in 0u64..1000, n in 10usize..300) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..19.5)).collect();
        let trace = negotiate_rounds(&d, &unit(n), 10).unwrap();
        let e = &trace.per_round_errors;
        // below ~1e-12 the per-device change is a few ulps of alpha
        let floor = 1e-12;
        prop_assert!(e.windows(2).skip(1).all(|w| w[0] < floor || w[1] < w[0]), "{:?}", e);
        prop_assert!(e[9] < 1e-8);
    }
}
