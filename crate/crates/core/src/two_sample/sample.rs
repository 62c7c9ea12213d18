use rayon::prelude::*;

use crate::distance::kolmogorov_distance;
use crate::dp::{DpParams, DpSampler};
use crate::error::{Error, Result};
use crate::kernel::{QuantileCache, RngStream};
use crate::two_sample::config::TestConfig;

const LANE_POSTERIOR: u64 = 0x706f_7374;
const LANE_PRIOR: u64 = 0x70_7269_6f72;
const LANE_X: u64 = 0x78;
const LANE_Y: u64 = 0x79;

/// Draws Kolmogorov distances between one realization of each of two DPs.
///
/// Replicate `j` uses stream id `j` under a fixed seed path, so the value of
/// every replicate is independent of evaluation order and thread count.
#[derive(Debug, Clone)]
pub struct DistanceSampler {
    x: DpSampler<f64>,
    y: DpSampler<f64>,
    root: RngStream,
}

impl DistanceSampler {
    /// Posterior DPs given the two samples.
    pub fn posterior(x: &[f64], y: &[f64], config: &TestConfig, cache: &QuantileCache<f64>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::Empty("both samples need at least one observation"));
        }
        let prior = DpParams::prior(config.a, config.base.clone())?;
        Ok(Self {
            x: DpSampler::cached(prior.posterior(x)?, config.n, cache)?,
            y: DpSampler::cached(prior.posterior(y)?, config.n, cache)?,
            root: RngStream::new(config.seed, 0).derive(LANE_POSTERIOR),
        })
    }

    /// Two independent prior DPs with concentrations `a + m1` and `a + m2`.
    pub fn prior(m1: usize, m2: usize, config: &TestConfig, cache: &QuantileCache<f64>) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidParameter("sample sizes must be at least 1".into()));
        }
        let p = |m: usize| DpParams::prior(config.a + m as f64, config.base.clone());
        Ok(Self {
            x: DpSampler::cached(p(m1)?, config.n, cache)?,
            y: DpSampler::cached(p(m2)?, config.n, cache)?,
            root: RngStream::new(config.seed, 0).derive(LANE_PRIOR).derive(m1 as u64).derive(m2 as u64),
        })
    }

    pub fn sample(&self, replicate: u64) -> Result<f64> {
        let stream = self.root.with_stream(replicate);
        let p = self.x.draw(stream.derive(LANE_X))?;
        let q = self.y.draw(stream.derive(LANE_Y))?;
        Ok(kolmogorov_distance(&p, &q))
    }

    /// Replicates `0..r`, in order, computed in parallel.
    pub fn samples(&self, r: usize) -> Result<Vec<f64>> {
        (0..r as u64).into_par_iter().map(|j| self.sample(j)).collect()
    }
}

/// One posterior distance `d` for replicate `replicate`.
pub fn posterior_distance_sample(x: &[f64], y: &[f64], config: &TestConfig, replicate: u64) -> Result<f64> {
    config.validate()?;
    DistanceSampler::posterior(x, y, config, &QuantileCache::new())?.sample(replicate)
}

/// One prior distance `d₀` for replicate `replicate`.
pub fn prior_distance_sample(m1: usize, m2: usize, config: &TestConfig, replicate: u64) -> Result<f64> {
    config.validate()?;
    DistanceSampler::prior(m1, m2, config, &QuantileCache::new())?.sample(replicate)
}

/// `config.r` posterior distances.
pub fn posterior_distance_samples(x: &[f64], y: &[f64], config: &TestConfig) -> Result<Vec<f64>> {
    config.validate()?;
    DistanceSampler::posterior(x, y, config, &QuantileCache::new())?.samples(config.r)
}

/// `config.r` prior distances.
pub fn prior_distance_samples(m1: usize, m2: usize, config: &TestConfig) -> Result<Vec<f64>> {
    prior_distance_samples_cached(m1, m2, config, &QuantileCache::new())
}

pub(crate) fn prior_distance_samples_cached(
    m1: usize,
    m2: usize,
    config: &TestConfig,
    cache: &QuantileCache<f64>,
) -> Result<Vec<f64>> {
    config.validate()?;
    DistanceSampler::prior(m1, m2, config, cache)?.samples(config.r)
}
