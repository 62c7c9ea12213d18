//! The two-sample test: posterior distance simulation, the threshold `U`,
//! and the decision.

mod config;
mod sample;
mod threshold;

pub use config::{TestConfig, ThresholdMode, ThresholdSource, DEFAULT_REPLICATES, DEFAULT_SEED, DEFAULT_TAIL};
pub use sample::{
    posterior_distance_sample, posterior_distance_samples, prior_distance_sample, prior_distance_samples,
    DistanceSampler,
};
pub use threshold::{
    fit_threshold_regression, formula_applies, threshold_formula, threshold_simulate, threshold_simulate_cached,
    threshold_table, upper_trimmed_max, RegressionFit, ThresholdTable, FORMULA_COEFFICIENT, FORMULA_MIN,
    TABLE_MAX,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::QuantileCache;

/// 2.5%, 50% and 97.5% points of the posterior distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceQuantiles {
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
}

/// Outcome of [`run_test`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub mean_d: f64,
    /// Sample standard deviation of the posterior distances.
    pub sd_d: f64,
    pub d_quantiles: DistanceQuantiles,
    #[serde(rename = "U")]
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
    /// `mean_d > threshold`.
    pub reject: bool,
    pub m1: usize,
    pub m2: usize,
    pub config: TestConfig,
}

impl TestReport {
    pub fn decision(&self) -> &'static str {
        if self.reject {
            "reject H0"
        } else {
            "fail to reject H0"
        }
    }
}

/// Runs the test with a fresh quantile cache.
pub fn run_test(x: &[f64], y: &[f64], config: &TestConfig) -> Result<TestReport> {
    run_test_with_cache(x, y, config, &QuantileCache::new())
}

/// Runs the test, reusing tabulated quantile solvers from `cache` (useful
/// when many tests share `a`, `n` and the sample sizes).
pub fn run_test_with_cache(
    x: &[f64],
    y: &[f64],
    config: &TestConfig,
    cache: &QuantileCache<f64>,
) -> Result<TestReport> {
    config.validate()?;
    let (m1, m2) = (x.len(), y.len());
    let sampler = DistanceSampler::posterior(x, y, config, cache)?;
    // Resolve the threshold first so a bad mode fails before the simulation.
    let (threshold, threshold_source) = resolve_threshold(m1, m2, config, cache)?;
    let mut d = sampler.samples(config.r)?;
    let mean_d = d.iter().sum::<f64>() / d.len() as f64;
    let sd_d = (d.iter().map(|v| (v - mean_d).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt();
    d.sort_unstable_by(f64::total_cmp);
    let d_quantiles = DistanceQuantiles {
        q025: quantile_sorted(&d, 0.025),
        q50: quantile_sorted(&d, 0.5),
        q975: quantile_sorted(&d, 0.975),
    };
    Ok(TestReport {
        mean_d,
        sd_d,
        d_quantiles,
        threshold,
        threshold_source,
        reject: mean_d > threshold,
        m1,
        m2,
        config: config.clone(),
    })
}

/// The threshold `U` for sizes `(m1, m2)` under `config.threshold_mode`.
pub fn resolve_threshold(
    m1: usize,
    m2: usize,
    config: &TestConfig,
    cache: &QuantileCache<f64>,
) -> Result<(f64, ThresholdSource)> {
    let source = match config.threshold_mode {
        ThresholdMode::Auto => auto_source(m1, m2, config),
        ThresholdMode::Simulate => ThresholdSource::Simulate,
        ThresholdMode::Table => ThresholdSource::Table,
        ThresholdMode::Formula => ThresholdSource::Formula,
        ThresholdMode::Fixed(u) => return Ok((u, ThresholdSource::Fixed)),
    };
    let u = match source {
        ThresholdSource::Simulate => threshold_simulate_cached(m1, m2, config, cache)?,
        ThresholdSource::Table => threshold_table(m1, m2)?,
        ThresholdSource::Formula => threshold_formula(m1, m2)?,
        ThresholdSource::Fixed => unreachable!(),
    };
    Ok((u, source))
}

fn auto_source(m1: usize, m2: usize, config: &TestConfig) -> ThresholdSource {
    if !config.has_reference_prior() {
        ThresholdSource::Simulate
    } else if m1.max(m2) <= TABLE_MAX {
        ThresholdSource::Table
    } else if formula_applies(m1, m2) {
        ThresholdSource::Formula
    } else {
        ThresholdSource::Simulate
    }
}

/// Linear-interpolation quantile (R type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::BaseMeasure;

    fn small() -> TestConfig {
        TestConfig { n: 200, r: 200, ..Default::default() }
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert!((quantile_sorted(&v, 0.025) - 1.075).abs() < 1e-15);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn auto_mode_routing() {
        let c = TestConfig::default();
        assert_eq!(auto_source(5, 5, &c), ThresholdSource::Table);
        assert_eq!(auto_source(20, 20, &c), ThresholdSource::Table);
        assert_eq!(auto_source(20, 100, &c), ThresholdSource::Formula);
        assert_eq!(auto_source(10, 100, &c), ThresholdSource::Simulate);
        let c50 = TestConfig { a: 50.0, ..Default::default() };
        assert_eq!(auto_source(100, 100, &c50), ThresholdSource::Simulate);
        let c10 = TestConfig { tail: 0.05, ..Default::default() };
        assert_eq!(auto_source(5, 5, &c10), ThresholdSource::Simulate);
    }

    #[test]
    fn table_mode_outside_range_is_an_error() {
        let c = small().with_mode(ThresholdMode::Table);
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        assert!(matches!(run_test(&x, &x, &c), Err(crate::Error::OutsideTable { .. })));
    }

    #[test]
    fn decision_follows_mean() {
        let x: Vec<f64> = (0..50).map(|i| f64::from(i) / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        for mode in [ThresholdMode::Fixed(0.0), ThresholdMode::Fixed(1.0), ThresholdMode::Formula] {
            let rep = run_test(&x, &y, &small().with_mode(mode)).unwrap();
            assert_eq!(rep.reject, rep.mean_d > rep.threshold);
            assert!(rep.d_quantiles.q025 <= rep.d_quantiles.q50 && rep.d_quantiles.q50 <= rep.d_quantiles.q975);
        }
        let rep = run_test(&x, &y, &small().with_mode(ThresholdMode::Formula)).unwrap();
        assert!(rep.reject);
        assert_eq!(rep.decision(), "reject H0");
    }

    #[test]
    fn identical_samples_do_not_reject() {
        let x: Vec<f64> = (0..200).map(|i| (f64::from(i) * 0.37).sin()).collect();
        let rep = run_test(&x, &x, &small()).unwrap();
        assert!(!rep.reject, "{rep:?}");
        assert_eq!(rep.decision(), "fail to reject H0");
        assert_eq!(rep.threshold_source, ThresholdSource::Formula);
    }

    #[test]
    fn single_observations_give_bounded_distances() {
        let c = small();
        for j in 0..20 {
            let d = posterior_distance_sample(&[0.0], &[0.0], &c, j).unwrap();
            assert!((0.0..=1.0).contains(&d));
        }
        assert!(posterior_distance_sample(&[], &[0.0], &c, 0).is_err());
    }

    #[test]
    fn replicates_are_addressable() {
        let c = small();
        let x = [0.1, 0.5, -0.3];
        let y = [1.0, 2.0];
        let all = posterior_distance_samples(&x, &y, &c).unwrap();
        for j in [0, 17, 199] {
            assert_eq!(all[j], posterior_distance_sample(&x, &y, &c, j as u64).unwrap());
        }
        let prior = prior_distance_samples(3, 4, &c).unwrap();
        assert_eq!(prior[42], prior_distance_sample(3, 4, &c, 42).unwrap());
    }

    #[test]
    fn prior_distances_ignore_the_base_measure() {
        let c = small();
        let u = TestConfig { base: BaseMeasure::uniform(0.0, 1.0).unwrap(), ..small() };
        assert_eq!(prior_distance_samples(4, 7, &c).unwrap(), prior_distance_samples(4, 7, &u).unwrap());
    }

    #[test]
    fn simulated_threshold_tail() {
        let c = TestConfig { n: 100, r: 400, ..Default::default() };
        let d = prior_distance_samples(5, 5, &c).unwrap();
        let u = threshold_simulate(5, 5, &c).unwrap();
        let above = d.iter().filter(|&&v| v > u).count() as f64 / d.len() as f64;
        assert!(above <= c.tail + 1.0 / c.r as f64);
        let too_few = TestConfig { r: 39, ..c };
        assert!(matches!(threshold_simulate(5, 5, &too_few), Err(crate::Error::TooFewReplicates { .. })));
    }

    #[test]
    fn report_serializes() {
        let rep = run_test(&[0.0, 1.0], &[0.5], &small().with_mode(ThresholdMode::Fixed(0.5))).unwrap();
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["U"], 0.5);
        assert_eq!(v["threshold_source"], "fixed");
        assert_eq!(v["config"]["threshold_mode"], "fixed:0.5");
        assert_eq!(v["config"]["base"]["kind"], "normal");
    }
}
