use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dp::DEFAULT_TRUNCATION;
use crate::error::{Error, Result};
use crate::kernel::BaseMeasure;

/// How the rejection threshold `U` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ThresholdMode {
    /// Table when both sizes are ≤ 20, formula when both are ≥ 20, simulation
    /// otherwise. Falls back to simulation whenever the prior settings differ
    /// from the ones the table and formula were built for (`a = 1`, 2.5% tail).
    #[default]
    Auto,
    Simulate,
    Table,
    Formula,
    Fixed(f64),
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Simulate => f.write_str("simulate"),
            Self::Table => f.write_str("table"),
            Self::Formula => f.write_str("formula"),
            Self::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "auto" => return Ok(Self::Auto),
            "simulate" => return Ok(Self::Simulate),
            "table" => return Ok(Self::Table),
            "formula" => return Ok(Self::Formula),
            _ => {}
        }
        let value = s
            .strip_prefix("fixed:")
            .ok_or_else(|| Error::InvalidParameter(format!("unknown threshold mode '{s}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad fixed threshold '{value}'")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("fixed threshold must lie in [0, 1], got {v}")));
        }
        Ok(Self::Fixed(v))
    }
}

impl From<ThresholdMode> for String {
    fn from(m: ThresholdMode) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for ThresholdMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Where a reported threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    Simulate,
    Table,
    Formula,
    Fixed,
}

impl fmt::Display for ThresholdSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Simulate => "simulate",
            Self::Table => "table",
            Self::Formula => "formula",
            Self::Fixed => "fixed",
        })
    }
}

pub const DEFAULT_REPLICATES: usize = 2000;
pub const DEFAULT_TAIL: f64 = 0.025;
pub const DEFAULT_SEED: u64 = 1;

/// Settings for one run of the test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Truncation level of every DP realization.
    pub n: usize,
    /// Number of posterior distance replicates (also used for simulated
    /// thresholds).
    pub r: usize,
    /// Prior concentration.
    pub a: f64,
    pub base: BaseMeasure,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
    /// Upper fraction of prior distances discarded when simulating `U`.
    pub tail: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_TRUNCATION,
            r: DEFAULT_REPLICATES,
            a: 1.0,
            base: BaseMeasure::default(),
            seed: DEFAULT_SEED,
            threshold_mode: ThresholdMode::Auto,
            tail: DEFAULT_TAIL,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if self.r < 2 {
            return Err(Error::InvalidParameter(format!("r must be at least 2, got {}", self.r)));
        }
        if !(self.tail > 0.0 && self.tail < 0.5) {
            return Err(Error::InvalidParameter(format!("tail must lie in (0, 0.5), got {}", self.tail)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("a must be positive and finite, got {}", self.a)));
        }
        self.base.validate()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: ThresholdMode) -> Self {
        self.threshold_mode = mode;
        self
    }

    /// Whether the embedded table and the regression formula describe this
    /// prior setup.
    pub(crate) fn has_reference_prior(&self) -> bool {
        self.a == 1.0 && self.tail == DEFAULT_TAIL
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_round_trip() {
        for m in [
            ThresholdMode::Auto,
            ThresholdMode::Simulate,
            ThresholdMode::Table,
            ThresholdMode::Formula,
            ThresholdMode::Fixed(0.25),
        ] {
            assert_eq!(m.to_string().parse::<ThresholdMode>().unwrap(), m);
        }
        assert!("fixed:abc".parse::<ThresholdMode>().is_err());
        assert!("fixed:2".parse::<ThresholdMode>().is_err());
        assert!("median".parse::<ThresholdMode>().is_err());
    }

    #[test]
    fn validation() {
        assert!(TestConfig::default().validate().is_ok());
        let bad = [
            TestConfig { n: 0, ..Default::default() },
            TestConfig { r: 1, ..Default::default() },
            TestConfig { tail: 0.5, ..Default::default() },
            TestConfig { tail: 0.0, ..Default::default() },
            TestConfig { a: 0.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn serde_round_trip() {
        let c = TestConfig::default().with_mode(ThresholdMode::Fixed(0.3));
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"fixed:0.3\""));
        let back: TestConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
