use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bench::power::{estimate_power_cached, scenario_data, PowerOptions};
use crate::bench::scenario::{example_case, power_case, Scenario};
use crate::bench::comparators::{classical_ks_test, wilcoxon_test};
use crate::error::{Error, Result};
use crate::kernel::{BaseMeasure, QuantileCache, RngStream};
use crate::two_sample::{
    quantile_sorted, run_test_with_cache, DistanceSampler, TestConfig, TestReport, TABLE_MAX,
};

/// Sample sizes of the size-sweep and power tables.
pub const SWEEP_SIZES: [usize; 8] = [5, 10, 15, 20, 30, 50, 100, 200];

/// Sample size of the single-dataset example tables.
pub const EXAMPLE_SIZE: usize = 100;

const LANE_KS: u64 = 0x6b73;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
}

impl TableId {
    pub const ALL: [TableId; 10] = [
        Self::T1,
        Self::T2,
        Self::T3,
        Self::T4,
        Self::T5,
        Self::T6,
        Self::T7,
        Self::T8,
        Self::T9,
        Self::T10,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&t| t == self).unwrap() + 1
    }

    /// Whether the table is a power study (uses `replications`).
    pub fn is_power(self) -> bool {
        (4..=8).contains(&self.number())
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.number())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().trim_start_matches(['T', 't']);
        digits
            .parse::<usize>()
            .ok()
            .and_then(|k| Self::ALL.get(k.wrapping_sub(1)).copied())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown table '{s}' (expected T1..T10)")))
    }
}

/// One cell of a reproduced table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: String,
    pub scenario: String,
    pub m1: usize,
    pub m2: usize,
    pub metric: String,
    pub estimate: f64,
    /// Monte Carlo standard error, when meaningful.
    pub se: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    /// Datasets per cell of the power tables.
    pub replications: usize,
    pub power: PowerOptions,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { replications: 1000, power: PowerOptions::default() }
    }
}

/// Recomputes table `id`. Rows come out in a fixed order and every random
/// stream is keyed by the seed and the cell, so the output does not depend
/// on the number of worker threads.
pub fn reproduce_table(id: TableId, config: &TestConfig, options: &TableOptions) -> Result<Vec<TableRow>> {
    config.validate()?;
    let cache = QuantileCache::new();
    let mut out = Vec::new();
    match id.number() {
        1 => {
            for case in 1..=8 {
                single_dataset(id, &example_case(case, EXAMPLE_SIZE)?, config, options, &cache, &mut out)?;
            }
        }
        n @ (2 | 3) => {
            for m in SWEEP_SIZES {
                single_dataset(id, &example_case(n - 1, m)?, config, options, &cache, &mut out)?;
            }
        }
        n @ 4..=8 => {
            for m in SWEEP_SIZES {
                let s = power_case(n - 3, m)?;
                let p = estimate_power_cached(&s, options.replications, config, &options.power, &cache)?;
                let row = |metric: &str, estimate, se| TableRow {
                    table: id.to_string(),
                    scenario: s.name.clone(),
                    m1: m,
                    m2: m,
                    metric: metric.into(),
                    estimate,
                    se: Some(se),
                };
                out.push(row("power_bayes", p.power_bayes, p.standard_error.bayes));
                out.push(row("power_ks", p.power_ks, p.standard_error.ks));
                out.push(row("power_wilcoxon", p.power_wilcoxon, p.standard_error.wilcoxon));
            }
        }
        9 => robustness(id, config, &cache, &mut out)?,
        _ => threshold_grid(id, config, &cache, &mut out)?,
    }
    Ok(out)
}

fn push_report(out: &mut Vec<TableRow>, id: TableId, s: &Scenario, suffix: &str, rep: &TestReport) {
    let row = |metric: &str, estimate, se| TableRow {
        table: id.to_string(),
        scenario: s.name.clone(),
        m1: s.m1,
        m2: s.m2,
        metric: format!("{metric}{suffix}"),
        estimate,
        se,
    };
    out.push(row("mean_d", rep.mean_d, Some(rep.sd_d / (rep.config.r as f64).sqrt())));
    out.push(row("U", rep.threshold, None));
    out.push(row("reject", if rep.reject { 1.0 } else { 0.0 }, None));
}

/// Runs the test on the first dataset of the scenario, with comparator
/// p-values.
fn single_dataset(
    id: TableId,
    s: &Scenario,
    config: &TestConfig,
    options: &TableOptions,
    cache: &QuantileCache<f64>,
    out: &mut Vec<TableRow>,
) -> Result<()> {
    let (x, y) = scenario_data(s, config.seed, 0);
    let rep = run_test_with_cache(&x, &y, config, cache)?;
    push_report(out, id, s, "", &rep);
    let ks = classical_ks_test(&x, &y, options.power.permutations, RngStream::new(config.seed, 0).derive(LANE_KS))?;
    let wx = wilcoxon_test(&x, &y)?;
    for (metric, p) in [("ks_p", ks.p_value), ("wilcoxon_p", wx.p_value)] {
        out.push(TableRow {
            table: id.to_string(),
            scenario: s.name.clone(),
            m1: s.m1,
            m2: s.m2,
            metric: metric.into(),
            estimate: p,
            se: None,
        });
    }
    Ok(())
}

/// Prior settings compared by the robustness table.
pub fn robustness_settings(config: &TestConfig) -> [(&'static str, TestConfig); 3] {
    [
        ("normal_a1", TestConfig { base: BaseMeasure::standard_normal(), a: 1.0, ..config.clone() }),
        ("uniform_a1", TestConfig { base: BaseMeasure::Uniform { lo: 0.0, hi: 1.0 }, a: 1.0, ..config.clone() }),
        ("normal_a50", TestConfig { base: BaseMeasure::standard_normal(), a: 50.0, ..config.clone() }),
    ]
}

fn robustness(id: TableId, config: &TestConfig, cache: &QuantileCache<f64>, out: &mut Vec<TableRow>) -> Result<()> {
    for case in 1..=8 {
        let s = example_case(case, EXAMPLE_SIZE)?;
        let (x, y) = scenario_data(&s, config.seed, 0);
        for (label, c) in robustness_settings(config) {
            let rep = run_test_with_cache(&x, &y, &c, cache)?;
            push_report(out, id, &s, &format!(":{label}"), &rep);
        }
    }
    Ok(())
}

/// Standard error of an empirical `p`-quantile from the spread of the
/// order statistics at `p ± sqrt(p(1-p)/r)`.
pub fn quantile_standard_error(sorted: &[f64], p: f64) -> f64 {
    let half = (p * (1.0 - p) / sorted.len() as f64).sqrt();
    (quantile_sorted(sorted, (p + half).min(1.0)) - quantile_sorted(sorted, (p - half).max(0.0))) / 2.0
}

fn threshold_grid(id: TableId, config: &TestConfig, cache: &QuantileCache<f64>, out: &mut Vec<TableRow>) -> Result<()> {
    let p = 1.0 - config.tail;
    for m2 in 1..=TABLE_MAX {
        for m1 in 1..=m2 {
            let mut d = DistanceSampler::prior(m1, m2, config, cache)?.samples(config.r)?;
            let u = crate::two_sample::upper_trimmed_max(&d, config.tail)?;
            d.sort_unstable_by(f64::total_cmp);
            out.push(TableRow {
                table: id.to_string(),
                scenario: "prior distance".into(),
                m1,
                m2,
                metric: "U".into(),
                estimate: u,
                se: Some(quantile_standard_error(&d, p)),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_ids() {
        for (k, t) in TableId::ALL.iter().enumerate() {
            assert_eq!(t.number(), k + 1);
            assert_eq!(t.to_string().parse::<TableId>().unwrap(), *t);
        }
        assert_eq!("t4".parse::<TableId>().unwrap(), TableId::T4);
        assert_eq!("10".parse::<TableId>().unwrap(), TableId::T10);
        assert!("T0".parse::<TableId>().is_err());
        assert!("T11".parse::<TableId>().is_err());
        assert!(TableId::T6.is_power() && !TableId::T9.is_power());
    }

    #[test]
    fn quantile_se_is_nonnegative() {
        let v: Vec<f64> = (0..400).map(|i| f64::from(i) / 400.0).collect();
        let se = quantile_standard_error(&v, 0.975);
        assert!(se > 0.0 && se < 0.02);
    }

    #[test]
    fn small_threshold_grid() {
        let c = TestConfig { n: 50, r: 40, ..Default::default() };
        let rows = reproduce_table(TableId::T10, &c, &TableOptions::default()).unwrap();
        assert_eq!(rows.len(), 210);
        assert_eq!((rows[0].m1, rows[0].m2), (1, 1));
        assert_eq!((rows[209].m1, rows[209].m2), (20, 20));
        assert!(rows.iter().all(|r| r.estimate > 0.0 && r.estimate <= 1.0));
    }

    #[test]
    fn small_power_table() {
        let c = TestConfig { n: 50, r: 40, ..Default::default() };
        let o = TableOptions { replications: 4, power: PowerOptions { permutations: 20, ..Default::default() } };
        let rows = reproduce_table(TableId::T8, &c, &o).unwrap();
        assert_eq!(rows.len(), SWEEP_SIZES.len() * 3);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.estimate) && r.se.is_some()));
    }
}
