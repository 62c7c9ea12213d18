use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::comparators::{classical_ks_test, wilcoxon_test, DEFAULT_PERMUTATIONS};
use crate::bench::scenario::Scenario;
use crate::error::{Error, Result};
use crate::kernel::rng::{label_key, mix};
use crate::kernel::{QuantileCache, RngStream};
use crate::two_sample::{resolve_threshold, DistanceSampler, TestConfig, ThresholdSource};

const LANE_DATA: u64 = 0x6461_7461;
const LANE_KS: u64 = 0x6b73;
const LANE_TEST: u64 = 0x7465_7374;

/// Settings shared by the comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    /// Comparators reject when `p ≤ alpha`.
    pub alpha: f64,
    pub permutations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { alpha: 0.05, permutations: DEFAULT_PERMUTATIONS }
    }
}

/// Monte Carlo standard errors `sqrt(p(1-p)/N)` of the three powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerErrors {
    pub bayes: f64,
    pub ks: f64,
    pub wilcoxon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub scenario: Scenario,
    pub replications: usize,
    pub power_bayes: f64,
    pub power_ks: f64,
    pub power_wilcoxon: f64,
    pub standard_error: PowerErrors,
    /// Threshold used for every replication.
    #[serde(rename = "U")]
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
}

/// Decisions of the three tests on one dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationOutcome {
    pub mean_d: f64,
    pub reject_bayes: bool,
    pub reject_ks: bool,
    pub reject_wilcoxon: bool,
}

/// The data of replication `replication` of `scenario`.
pub fn scenario_data(scenario: &Scenario, seed: u64, replication: u64) -> (Vec<f64>, Vec<f64>) {
    let stream = RngStream::new(seed, replication)
        .derive(LANE_DATA)
        .derive(label_key(&scenario.name))
        .derive(scenario.m1 as u64)
        .derive(scenario.m2 as u64);
    scenario.draw(&mut stream.rng())
}

/// Rejection rates of the Bayesian test, K-S and Wilcoxon over
/// `replications` fresh datasets.
///
/// The threshold does not depend on the data, so it is resolved once.
pub fn estimate_power(
    scenario: &Scenario,
    replications: usize,
    config: &TestConfig,
    options: &PowerOptions,
) -> Result<PowerResult> {
    estimate_power_cached(scenario, replications, config, options, &QuantileCache::new())
}

pub fn estimate_power_cached(
    scenario: &Scenario,
    replications: usize,
    config: &TestConfig,
    options: &PowerOptions,
    cache: &QuantileCache<f64>,
) -> Result<PowerResult> {
    if replications == 0 {
        return Err(Error::InvalidParameter("replications must be at least 1".into()));
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", options.alpha)));
    }
    config.validate()?;
    let (threshold, threshold_source) = resolve_threshold(scenario.m1, scenario.m2, config, cache)?;
    let outcomes: Vec<ReplicationOutcome> = (0..replications as u64)
        .into_par_iter()
        .map(|rep| replicate(scenario, rep, threshold, config, options, cache))
        .collect::<Result<_>>()?;

    let rate = |f: fn(&ReplicationOutcome) -> bool| {
        outcomes.iter().filter(|o| f(o)).count() as f64 / replications as f64
    };
    let se = |p: f64| (p * (1.0 - p) / replications as f64).sqrt();
    let (pb, pk, pw) = (rate(|o| o.reject_bayes), rate(|o| o.reject_ks), rate(|o| o.reject_wilcoxon));
    Ok(PowerResult {
        scenario: scenario.clone(),
        replications,
        power_bayes: pb,
        power_ks: pk,
        power_wilcoxon: pw,
        standard_error: PowerErrors { bayes: se(pb), ks: se(pk), wilcoxon: se(pw) },
        threshold,
        threshold_source,
    })
}

/// Runs all three tests on replication `rep` of the scenario.
pub fn replicate(
    scenario: &Scenario,
    rep: u64,
    threshold: f64,
    config: &TestConfig,
    options: &PowerOptions,
    cache: &QuantileCache<f64>,
) -> Result<ReplicationOutcome> {
    let (x, y) = scenario_data(scenario, config.seed, rep);
    let test_config = TestConfig { seed: mix(mix(config.seed, LANE_TEST), rep), ..config.clone() };
    let d = DistanceSampler::posterior(&x, &y, &test_config, cache)?.samples(config.r)?;
    let mean_d = d.iter().sum::<f64>() / d.len() as f64;
    let ks_stream = RngStream::new(config.seed, rep).derive(LANE_KS);
    let ks = classical_ks_test(&x, &y, options.permutations, ks_stream)?;
    let wx = wilcoxon_test(&x, &y)?;
    Ok(ReplicationOutcome {
        mean_d,
        reject_bayes: mean_d > threshold,
        reject_ks: ks.p_value <= options.alpha,
        reject_wilcoxon: wx.p_value <= options.alpha,
    })
}
