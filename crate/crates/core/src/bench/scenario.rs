use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::BaseMeasure;

/// A pair of data-generating distributions and the two sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dist_x: BaseMeasure,
    pub dist_y: BaseMeasure,
    pub m1: usize,
    pub m2: usize,
}

impl Scenario {
    pub fn new(name: impl Into<String>, dist_x: BaseMeasure, dist_y: BaseMeasure, m1: usize, m2: usize) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidParameter("scenario sample sizes must be at least 1".into()));
        }
        dist_x.validate()?;
        dist_y.validate()?;
        Ok(Self { name: name.into(), dist_x, dist_y, m1, m2 })
    }

    pub fn with_sizes(&self, m1: usize, m2: usize) -> Result<Self> {
        Self::new(self.name.clone(), self.dist_x.clone(), self.dist_y.clone(), m1, m2)
    }

    /// Draws `(x, y)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let x = (0..self.m1).map(|_| self.dist_x.sample(rng)).collect();
        let y = (0..self.m2).map(|_| self.dist_y.sample(rng)).collect();
        (x, y)
    }
}

fn n(mu: f64, sigma: f64) -> BaseMeasure {
    BaseMeasure::Normal { mu, sigma }
}

fn bimodal() -> BaseMeasure {
    BaseMeasure::normal_mixture(&[(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]).expect("valid mixture")
}

/// The eight distribution pairs of the illustrative example (`N(mu, sigma)`
/// with `sigma` the standard deviation), `case` in `1..=8`.
pub fn example_case(case: usize, m: usize) -> Result<Scenario> {
    let (name, x, y) = match case {
        1 => ("N(0,1) vs N(0,1)", n(0.0, 1.0), n(0.0, 1.0)),
        2 => ("N(0,1) vs N(1,1)", n(0.0, 1.0), n(1.0, 1.0)),
        3 => ("N(0,1) vs N(0,2)", n(0.0, 1.0), n(0.0, 2.0)),
        4 => ("N(0,1) vs 0.5N(-2,1)+0.5N(2,1)", n(0.0, 1.0), bimodal()),
        5 => ("N(0,1) vs t3", n(0.0, 1.0), BaseMeasure::StudentT { df: 3.0 }),
        6 => ("N(0,1) vs t0.5", n(0.0, 1.0), BaseMeasure::StudentT { df: 0.5 }),
        7 => (
            "logN(0,1) vs logN(1,1)",
            BaseMeasure::LogNormal { mu: 0.0, sigma: 1.0 },
            BaseMeasure::LogNormal { mu: 1.0, sigma: 1.0 },
        ),
        8 => (
            "logN(0,1) vs logN(0,2)",
            BaseMeasure::LogNormal { mu: 0.0, sigma: 1.0 },
            BaseMeasure::LogNormal { mu: 0.0, sigma: 2.0 },
        ),
        _ => return Err(Error::InvalidParameter(format!("example case must be 1..=8, got {case}"))),
    };
    Scenario::new(format!("example{case}: {name}"), x, y, m, m)
}

/// The five alternatives of the power study, `case` in `1..=5`.
pub fn power_case(case: usize, m: usize) -> Result<Scenario> {
    let (name, x, y) = match case {
        1 => ("N(0,1) vs N(1,1)", n(0.0, 1.0), n(1.0, 1.0)),
        2 => ("N(0,1) vs N(0,2)", n(0.0, 1.0), n(0.0, 2.0)),
        3 => ("N(0,1) vs 0.5N(-2,1)+0.5N(2,1)", n(0.0, 1.0), bimodal()),
        4 => ("N(0,1) vs t0.5", n(0.0, 1.0), BaseMeasure::StudentT { df: 0.5 }),
        5 => (
            "Exp(1) vs Exp(2)",
            BaseMeasure::Exponential { rate: 1.0 },
            BaseMeasure::Exponential { rate: 2.0 },
        ),
        _ => return Err(Error::InvalidParameter(format!("power case must be 1..=5, got {case}"))),
    };
    Scenario::new(format!("power{case}: {name}"), x, y, m, m)
}

/// Looks a scenario up by its short key: `example1`..`example8`,
/// `power1`..`power5`.
pub fn scenario_by_key(key: &str, m1: usize, m2: usize) -> Result<Scenario> {
    let bad = || Error::InvalidParameter(format!("unknown scenario '{key}' (expected example1..8 or power1..5)"));
    let s = if let Some(k) = key.strip_prefix("example") {
        example_case(k.parse().map_err(|_| bad())?, m1)?
    } else if let Some(k) = key.strip_prefix("power") {
        power_case(k.parse().map_err(|_| bad())?, m1)?
    } else {
        return Err(bad());
    };
    s.with_sizes(m1, m2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RngStream;

    #[test]
    fn catalog_is_complete() {
        for k in 1..=8 {
            assert!(example_case(k, 10).is_ok());
        }
        for k in 1..=5 {
            assert!(power_case(k, 10).is_ok());
        }
        assert!(example_case(9, 10).is_err());
        assert!(power_case(0, 10).is_err());
        assert!(example_case(1, 0).is_err());
    }

    #[test]
    fn lookup_by_key() {
        let s = scenario_by_key("power5", 20, 30).unwrap();
        assert_eq!((s.m1, s.m2), (20, 30));
        assert_eq!(s.dist_y, BaseMeasure::Exponential { rate: 2.0 });
        assert!(scenario_by_key("power9", 5, 5).is_err());
        assert!(scenario_by_key("nope", 5, 5).is_err());
    }

    #[test]
    fn draws_have_requested_sizes() {
        let s = example_case(4, 7).unwrap().with_sizes(7, 3).unwrap();
        let (x, y) = s.draw(&mut RngStream::new(1, 2).rng());
        assert_eq!((x.len(), y.len()), (7, 3));
    }
}
