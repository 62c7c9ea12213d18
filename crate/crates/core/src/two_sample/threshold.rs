use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::QuantileCache;
use crate::two_sample::config::TestConfig;
use crate::two_sample::sample::prior_distance_samples_cached;

/// Largest sample size covered by the embedded table.
pub const TABLE_MAX: usize = 20;

/// Coefficient of the large-sample approximation `U ≈ c·sqrt(1/m1 + 1/m2)`.
pub const FORMULA_COEFFICIENT: f64 = 1.41;

/// Smallest sample size for which the formula is recommended.
pub const FORMULA_MIN: usize = 20;

const TABLE_CSV: &str = include_str!("../../data/threshold_table.csv");

/// The reference 97.5% points of the prior distance for `1 ≤ m1, m2 ≤ 20`
/// (`a = 1`), stored as a full symmetric grid.
#[derive(Debug, Clone)]
pub struct ThresholdTable {
    cells: [[f64; TABLE_MAX]; TABLE_MAX],
}

impl ThresholdTable {
    /// The embedded table, parsed once.
    pub fn embedded() -> &'static Self {
        static TABLE: OnceLock<ThresholdTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::parse(TABLE_CSV).expect("embedded threshold table is well formed"))
    }

    /// Parses the lower triangle: each line is `m2,U(1,m2),…,U(m2,m2)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cells = [[f64::NAN; TABLE_MAX]; TABLE_MAX];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut fields = line.split(',').map(str::trim);
            let bad = || Error::InvalidParameter(format!("bad threshold table line '{line}'"));
            let m2: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            if !(1..=TABLE_MAX).contains(&m2) {
                return Err(bad());
            }
            let values: Vec<f64> = fields.map(|f| f.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            if values.len() != m2 {
                return Err(bad());
            }
            for (i, v) in values.into_iter().enumerate() {
                cells[m2 - 1][i] = v;
                cells[i][m2 - 1] = v;
            }
        }
        if cells.iter().flatten().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(Error::InvalidParameter("threshold table is incomplete".into()));
        }
        Ok(Self { cells })
    }

    pub fn lookup(&self, m1: usize, m2: usize) -> Result<f64> {
        if !(1..=TABLE_MAX).contains(&m1) || !(1..=TABLE_MAX).contains(&m2) {
            return Err(Error::OutsideTable { m1, m2 });
        }
        Ok(self.cells[m1 - 1][m2 - 1])
    }
}

/// Table lookup of `U`; symmetric in its arguments.
pub fn threshold_table(m1: usize, m2: usize) -> Result<f64> {
    ThresholdTable::embedded().lookup(m1, m2)
}

/// `1.41·sqrt(1/m1 + 1/m2)`. Intended for `m1, m2 ≥ 20`; see
/// [`formula_applies`].
pub fn threshold_formula(m1: usize, m2: usize) -> Result<f64> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidParameter("sample sizes must be positive".into()));
    }
    Ok(FORMULA_COEFFICIENT * regressor(m1, m2))
}

pub fn formula_applies(m1: usize, m2: usize) -> bool {
    m1 >= FORMULA_MIN && m2 >= FORMULA_MIN
}

fn regressor(m1: usize, m2: usize) -> f64 {
    (1.0 / m1 as f64 + 1.0 / m2 as f64).sqrt()
}

/// Number of largest draws removed before taking the maximum.
fn tail_count(r: usize, tail: f64) -> Result<usize> {
    let exact = tail * r as f64;
    // Guard against `0.025 * 2000 = 50.000000000000007`-style rounding.
    let k = (exact - 1e-9).ceil().max(0.0) as usize;
    if k < 1 || exact < 1.0 - 1e-9 {
        return Err(Error::TooFewReplicates {
            replicates: r,
            tail,
            needed: (1.0 / tail - 1e-9).ceil() as usize,
        });
    }
    Ok(k)
}

/// The value left as the maximum after removing the `ceil(tail·r)` largest
/// of `draws`.
pub fn upper_trimmed_max(draws: &[f64], tail: f64) -> Result<f64> {
    let k = tail_count(draws.len(), tail)?;
    let mut sorted = draws.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(sorted[sorted.len() - k - 1])
}

/// Simulated `U` from `config.r` prior distances.
pub fn threshold_simulate(m1: usize, m2: usize, config: &TestConfig) -> Result<f64> {
    threshold_simulate_cached(m1, m2, config, &QuantileCache::new())
}

pub fn threshold_simulate_cached(
    m1: usize,
    m2: usize,
    config: &TestConfig,
    cache: &QuantileCache<f64>,
) -> Result<f64> {
    config.validate()?;
    tail_count(config.r, config.tail)?;
    let draws = prior_distance_samples_cached(m1, m2, config, cache)?;
    upper_trimmed_max(&draws, config.tail)
}

/// Least-squares fit of simulated `U` on `sqrt(1/m1 + 1/m2)` through the
/// origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    pub slope: f64,
    /// Uncentered coefficient of determination, `1 - SSE / Σ U²`, the usual
    /// choice for a model without intercept.
    pub r_squared: f64,
    /// `(m1, m2, U)` for every grid point.
    pub points: Vec<(usize, usize, f64)>,
}

pub fn fit_threshold_regression(grid: &[(usize, usize)], config: &TestConfig) -> Result<RegressionFit> {
    let cache = QuantileCache::new();
    let xs: Vec<f64> = grid
        .iter()
        .map(|&(m1, m2)| {
            if m1 == 0 || m2 == 0 {
                Err(Error::DegenerateGrid("sample sizes must be positive".into()))
            } else {
                Ok(regressor(m1, m2))
            }
        })
        .collect::<Result<_>>()?;
    let mut distinct = xs.clone();
    distinct.sort_unstable_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::DegenerateGrid(format!(
            "need at least two distinct size pairs, got {}",
            distinct.len()
        )));
    }
    let points = grid
        .iter()
        .map(|&(m1, m2)| Ok((m1, m2, threshold_simulate_cached(m1, m2, config, &cache)?)))
        .collect::<Result<Vec<_>>>()?;
    let (slope, r_squared) = fit_through_origin(&xs, &points.iter().map(|p| p.2).collect::<Vec<_>>());
    Ok(RegressionFit { slope, r_squared, points })
}

fn fit_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let slope = sxy / sxx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    (slope, 1.0 - sse / syy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_cells() {
        assert_eq!(threshold_table(5, 5).unwrap(), 0.69);
        assert_eq!(threshold_table(20, 19).unwrap(), 0.42);
        assert_eq!(threshold_table(3, 2).unwrap(), 0.82);
        assert_eq!(threshold_table(2, 3).unwrap(), 0.82);
        assert_eq!(threshold_table(1, 1).unwrap(), 0.93);
        assert_eq!(threshold_table(10, 5).unwrap(), 0.62);
        assert_eq!(threshold_table(1, 11).unwrap(), 0.83);
        assert_eq!(threshold_table(20, 20).unwrap(), 0.42);
    }

    #[test]
    fn table_shape() {
        let t = ThresholdTable::embedded();
        for i in 1..=TABLE_MAX {
            for j in 1..=TABLE_MAX {
                let v = t.lookup(i, j).unwrap();
                assert!(v > 0.0 && v < 1.0);
                assert_eq!(v, t.lookup(j, i).unwrap());
            }
            if i > 1 {
                assert!(t.lookup(i, i).unwrap() <= t.lookup(i - 1, i - 1).unwrap());
            }
        }
        assert!(matches!(threshold_table(21, 5), Err(Error::OutsideTable { m1: 21, m2: 5 })));
        assert!(threshold_table(0, 5).is_err());
    }

    #[test]
    fn table_parse_rejects_gaps() {
        assert!(ThresholdTable::parse("1,0.9\n").is_err());
        assert!(ThresholdTable::parse("1,0.9,0.8\n").is_err());
    }

    #[test]
    fn formula_values() {
        assert!((threshold_formula(100, 100).unwrap() - 0.1994).abs() < 5e-5);
        assert!((threshold_formula(50, 50).unwrap() - 0.2820).abs() < 5e-5);
        assert!((threshold_formula(20, 20).unwrap() - 0.4459).abs() < 5e-5);
        assert!(threshold_formula(0, 10).is_err());
        assert!(formula_applies(20, 20) && !formula_applies(19, 200));
    }

    #[test]
    fn trimmed_max() {
        let draws: Vec<f64> = (1..=40).map(f64::from).rev().collect();
        assert_eq!(upper_trimmed_max(&draws, 0.025).unwrap(), 39.0);
        let draws: Vec<f64> = (1..=2000).map(f64::from).collect();
        assert_eq!(upper_trimmed_max(&draws, 0.025).unwrap(), 1950.0);
        assert!(matches!(
            upper_trimmed_max(&draws[..39], 0.025),
            Err(Error::TooFewReplicates { needed: 40, .. })
        ));
    }

    #[test]
    fn through_origin_fit() {
        let x = [1.0, 2.0, 3.0];
        let (b, r2) = fit_through_origin(&x, &[2.0, 4.0, 6.0]);
        assert!((b - 2.0).abs() < 1e-15 && (r2 - 1.0).abs() < 1e-15);
        // Oracle: b = Σxy/Σx² = (1+4+9.3)/14.
        let (b, r2) = fit_through_origin(&x, &[1.0, 2.0, 3.1]);
        assert!((b - 14.3 / 14.0).abs() < 1e-14);
        let sse: f64 = [(1.0, 1.0), (2.0, 2.0), (3.0, 3.1)].iter().map(|(x, y)| (y - b * x).powi(2)).sum();
        assert!((r2 - (1.0 - sse / 14.61)).abs() < 1e-14);
    }

    #[test]
    fn regression_needs_two_points() {
        let c = TestConfig { r: 40, n: 20, ..Default::default() };
        assert!(matches!(fit_threshold_regression(&[(20, 20)], &c), Err(Error::DegenerateGrid(_))));
        assert!(matches!(
            fit_threshold_regression(&[(20, 30), (30, 20)], &c),
            Err(Error::DegenerateGrid(_))
        ));
        assert!(fit_threshold_regression(&[], &c).is_err());
    }
}
