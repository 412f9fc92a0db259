use hisam_core::sim::*;

fn small(policy: Policy, n: usize) -> Scenario {
    let mut s = Scenario::table_defaults();
    s.params = s.params.with_devices(n).unwrap();
    s.policy = policy;
    s.seeds = vec![1, 2, 3];
    s
}

/// `F_m = 2` per time unit with 1000 devices.
fn two_per_unit(f_pop: f64) -> Scenario {
    let mut s = Scenario::table_defaults();
    s.params.f_pop_max = f_pop;
    s.params = s.params.with_devices(1000).unwrap();
    s.policy = Policy::FixedHigh;
    s.seeds = vec![1];
    s
}

#[test]
fn fixed_high_detection_is_half_the_spacing() {
    let s = two_per_unit(2000.0);
    assert_eq!(s.params.f_m(), 2.0);
    let m = run_simulation(&s).unwrap();
    // expected residual of a uniform onset: T / (2 alpha) = 2.5 s,
    // standard error about 1.44 / sqrt(1000)
    assert!((m.mean_detection_time - 2.5).abs() < 0.15, "{}", m.mean_detection_time);
}

#[test]
fn doubling_frequency_halves_detection() {
    let slow = run_simulation(&two_per_unit(2000.0)).unwrap();
    let fast = run_simulation(&two_per_unit(4000.0)).unwrap();
    let ratio = fast.mean_detection_time / slow.mean_detection_time;
    assert!((ratio - 0.5).abs() < 0.05, "{ratio}");
    // the onsets are shared across the two runs
    let a: Vec<f64> = slow.per_seed[0].anomalies.iter().map(|e| e.onset).collect();
    let b: Vec<f64> = fast.per_seed[0].anomalies.iter().map(|e| e.onset).collect();
    assert_eq!(a, b);
}

#[test]
fn identical_inputs_identical_records() {
    for p in Policy::ALL {
        let s = small(p, 40);
        assert_eq!(run_simulation(&s).unwrap(), run_simulation(&s).unwrap());
    }
}

#[test]
fn detection_is_causal_and_pending_only_without_later_authentication() {
    for p in Policy::ALL {
        let s = small(p, 60);
        let m = run_simulation(&s).unwrap();
        for seed in &m.per_seed {
            for a in &seed.anomalies {
                match a.detected_at {
                    Some(t) => assert!(t >= a.onset),
                    None => panic!("{p}: boundary authentication should resolve every anomaly"),
                }
            }
        }
    }
}

#[test]
fn workload_matches_schedule_count() {
    for p in Policy::ALL {
        let s = small(p, 50);
        let m = run_simulation(&s).unwrap();
        for seed in &m.per_seed {
            let demands = seed_demands(&s, seed.seed).unwrap();
            let alphas = policy_frequencies(p, &demands, &s.params, s.demand_scale, 20.0).unwrap();
            let lower: f64 = alphas
                .iter()
                .map(|a| (a * s.horizon / s.params.time_unit + 1e-9).floor())
                .sum();
            let n = alphas.len() as f64;
            assert!(seed.total_workload >= lower - n && seed.total_workload <= lower + n);
        }
    }
}

#[test]
fn common_random_numbers_across_policies() {
    let a = run_simulation(&small(Policy::Hisam, 30)).unwrap();
    let b = run_simulation(&small(Policy::FixedLow, 30)).unwrap();
    for (x, y) in a.per_seed.iter().zip(&b.per_seed) {
        let ox: Vec<f64> = x.anomalies.iter().map(|e| e.onset).collect();
        let oy: Vec<f64> = y.anomalies.iter().map(|e| e.onset).collect();
        if x.evicted_devices == 0 && y.evicted_devices == 0 {
            assert_eq!(ox, oy);
        }
    }
}

#[test]
fn fixed_policies_never_oversleep() {
    for p in [Policy::FixedHigh, Policy::FixedLow] {
        let m = run_simulation(&small(p, 100)).unwrap();
        assert_eq!(m.evicted_devices, 0.0);
        assert_eq!(m.handshake_failures, 0.0);
    }
}

#[test]
fn aggregates_are_seed_means() {
    let m = run_simulation(&small(Policy::DemandDriven, 40)).unwrap();
    let w = m.per_seed.iter().map(|s| s.total_workload).sum::<f64>() / m.per_seed.len() as f64;
    assert_eq!(m.total_workload, w);
}

#[test]
fn grid_shape_and_sweep_application() {
    let mut base = Scenario::table_defaults();
    base.seeds = vec![1, 2];
    let g = experiment_grid(&base, Sweep::Size, &[20.0, 60.0]).unwrap();
    assert_eq!(g.len(), 2);
    for point in &g {
        assert_eq!(point.records.len(), 4);
        for r in &point.records {
            assert_eq!(r.per_seed.len(), 2);
        }
    }
    assert!(apply_sweep(&base, Sweep::Size, 20.5).is_err());
    let v = apply_sweep(&base, Sweep::Variance, 4.0).unwrap();
    assert_eq!(v.demand_stddev, 2.0);
}

#[test]
fn invalid_scenarios_rejected() {
    let mut s = Scenario::table_defaults();
    s.seeds.clear();
    assert!(matches!(run_simulation(&s), Err(SimError::InvalidScenario(_))));
    let mut s = Scenario::table_defaults();
    s.demand_mean = 25.0;
    assert!(run_simulation(&s).is_err());
    assert!("nope".parse::<Policy>().is_err());
    assert_eq!("demand_driven".parse::<Policy>().unwrap(), Policy::DemandDriven);
}
