use dp2s::bench::{
    classical_ks_test, estimate_power, example_case, power_case, reproduce_table, scenario_data, wilcoxon_test,
    PowerOptions, TableId, TableOptions,
};
use dp2s::two_sample::{prior_distance_samples, threshold_simulate};
use dp2s::{
    kolmogorov_distance, run_test, BaseMeasure, DpParams, Measure, Params, RngStream, Sampler, TestConfig,
    ThresholdMode, ThresholdSource,
};
use proptest::prelude::*;

fn small_config() -> TestConfig {
    TestConfig { n: 200, r: 200, ..TestConfig::default() }
}

#[test]
fn end_to_end_decisions() {
    let config = TestConfig { r: 500, ..TestConfig::default() };
    let (x, y) = scenario_data(&example_case(2, 100).unwrap(), 3, 0);
    let shifted = run_test(&x, &y, &config).unwrap();
    assert!(shifted.reject);
    assert_eq!(shifted.threshold_source, ThresholdSource::Formula);
    assert_eq!(shifted.decision(), "reject H0");

    let same = run_test(&x, &x, &config).unwrap();
    assert!(!same.reject);
    assert!(same.mean_d < shifted.mean_d);
    let q = &same.d_quantiles;
    assert!(q.q025 <= q.q50 && q.q50 <= q.q975);
}

#[test]
fn reports_are_reproducible() {
    let (x, y) = scenario_data(&example_case(3, 40).unwrap(), 1, 0);
    let config = small_config().with_seed(9);
    let a = run_test(&x, &y, &config).unwrap();
    let b = run_test(&x, &y, &config).unwrap();
    assert_eq!(a.mean_d.to_bits(), b.mean_d.to_bits());
    let c = run_test(&x, &y, &config.with_seed(10)).unwrap();
    assert_ne!(a.mean_d.to_bits(), c.mean_d.to_bits());
}

#[test]
fn threshold_modes_agree_roughly() {
    let config = TestConfig { r: 1000, n: 500, ..TestConfig::default() };
    let simulated = threshold_simulate(30, 30, &config).unwrap();
    let formula = run_test(&[0.0; 30], &[0.0; 30], &config.clone().with_mode(ThresholdMode::Formula)).unwrap().threshold;
    assert!((simulated - formula).abs() < 0.05, "{simulated} vs {formula}");
}

#[test]
fn prior_distances_lie_in_the_unit_interval() {
    let d = prior_distance_samples(4, 7, &TestConfig { r: 300, ..small_config() }).unwrap();
    assert_eq!(d.len(), 300);
    assert!(d.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn power_estimate_shape() {
    let s = power_case(1, 10).unwrap();
    let options = PowerOptions { permutations: 100, ..PowerOptions::default() };
    let p = estimate_power(&s, 20, &small_config(), &options).unwrap();
    assert_eq!(p.replications, 20);
    for v in [p.power_bayes, p.power_ks, p.power_wilcoxon] {
        assert!((0.0..=1.0).contains(&v));
        assert_eq!((v * 20.0).round(), v * 20.0);
    }
    assert_eq!(p.threshold_source, ThresholdSource::Table);
}

#[test]
fn comparators_on_separated_samples() {
    let x: Vec<f64> = (0..15).map(f64::from).collect();
    let y: Vec<f64> = (100..115).map(f64::from).collect();
    let ks = classical_ks_test(&x, &y, 500, RngStream::new(1, 0)).unwrap();
    assert_eq!(ks.statistic, 1.0);
    assert!(ks.p_value < 0.01);
    let w = wilcoxon_test(&x, &y).unwrap();
    // N = 30 takes the normal approximation: |W - 112.5| - 0.5 over the null sd.
    let z = 112.0 / (15.0f64 * 15.0 * 31.0 / 12.0).sqrt();
    assert!((w.p_value - statrs::function::erf::erfc(z / 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn table_ten_layout() {
    let config = TestConfig { n: 100, r: 100, ..TestConfig::default() };
    let rows = reproduce_table(TableId::T10, &config, &TableOptions::default()).unwrap();
    assert_eq!(rows.len(), 210);
    assert!(rows.iter().all(|r| r.m1 <= r.m2 && r.metric == "U" && r.se.is_some()));
    assert_eq!((rows[0].m1, rows[0].m2), (1, 1));
}

#[test]
fn aliases_fix_f64() {
    let params: Params = DpParams::prior(2.0, BaseMeasure::uniform(0.0, 1.0).unwrap()).unwrap();
    let sampler = Sampler::new(params, 100).unwrap();
    let m: Measure = sampler.draw(RngStream::new(4, 2)).unwrap();
    assert!(m.atoms().iter().all(|&a| (0.0..=1.0).contains(&a)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn posterior_realizations_are_probability_measures(
        data in prop::collection::vec(-5.0f64..5.0, 1..30),
        a in 0.01f64..20.0,
        seed in any::<u64>(),
    ) {
        let params = DpParams::prior(a, BaseMeasure::standard_normal()).unwrap().posterior(&data).unwrap();
        let m = Sampler::new(params, 100).unwrap().draw(RngStream::new(seed, 0)).unwrap();
        prop_assert!(m.atoms().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(m.cum_weights().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((m.cum_weights().last().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_to_self_is_zero(atoms in prop::collection::vec(-10.0f64..10.0, 1..50)) {
        let m = Measure::empirical(&atoms).unwrap();
        prop_assert_eq!(kolmogorov_distance(&m, &m), 0.0);
    }

    #[test]
    fn swapping_samples_barely_moves_the_statistic(seed in 0u64..1000) {
        let (x, y) = scenario_data(&example_case(2, 25).unwrap(), seed, 0);
        let config = TestConfig { n: 100, r: 100, seed, ..TestConfig::default() };
        let a = run_test(&x, &y, &config).unwrap();
        let b = run_test(&y, &x, &config).unwrap();
        prop_assert_eq!(a.threshold, b.threshold);
        prop_assert!((a.mean_d - b.mean_d).abs() < 0.1);
    }
}
