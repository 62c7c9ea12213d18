//! Continuous distributions used as Dirichlet-process base measures and as
//! data generators for the simulation scenarios.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Continuous, Normal, StudentsT};

use crate::error::{Error, Result};

/// One component of a normal mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mu: f64,
    pub sigma: f64,
}

/// A continuous distribution on the real line: sampler, CDF and quantile.
///
/// Build through the checked constructors (or [`FromStr`]); they enforce
/// the parameter constraints every method relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseMeasure {
    Normal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    StudentT { df: f64 },
    LogNormal { mu: f64, sigma: f64 },
    NormalMixture { components: Vec<MixtureComponent> },
}

impl Default for BaseMeasure {
    fn default() -> Self {
        Self::Normal { mu: 0.0, sigma: 1.0 }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

impl BaseMeasure {
    pub fn standard_normal() -> Self {
        Self::default()
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        let m = Self::Normal { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let m = Self::Uniform { lo, hi };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let m = Self::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn student_t(df: f64) -> Result<Self> {
        let m = Self::StudentT { df };
        m.validate()?;
        Ok(m)
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self> {
        let m = Self::LogNormal { mu, sigma };
        m.validate()?;
        Ok(m)
    }

    /// Components given as `(weight, mu, sigma)`.
    pub fn normal_mixture(components: &[(f64, f64, f64)]) -> Result<Self> {
        let m = Self::NormalMixture {
            components: components
                .iter()
                .map(|&(weight, mu, sigma)| MixtureComponent { weight, mu, sigma })
                .collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { mu, sigma } | Self::LogNormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
            Self::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if lo < hi {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("uniform needs lo < hi, got [{lo}, {hi}]")))
                }
            }
            Self::Exponential { rate } => positive("rate", rate),
            Self::StudentT { df } => positive("df", df),
            Self::NormalMixture { ref components } => {
                if components.is_empty() {
                    return Err(Error::InvalidParameter("mixture needs at least one component".into()));
                }
                for c in components {
                    positive("mixture weight", c.weight)?;
                    finite("mu", c.mu)?;
                    positive("sigma", c.sigma)?;
                }
                let total: f64 = components.iter().map(|c| c.weight).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "mixture weights must sum to 1, got {total}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// A direct draw. Student-t is generated as `Z / sqrt(V / df)` with
    /// `V ~ χ²(df)`; a mixture picks a component, then draws from it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                mu + sigma * z
            }
            Self::Uniform { lo, hi } => {
                let u: f64 = rng.random();
                lo + (hi - lo) * u
            }
            Self::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            Self::StudentT { df } => {
                let z: f64 = StandardNormal.sample(rng);
                let v = ChiSquared::new(df).expect("validated df").sample(rng);
                z / (v / df).sqrt()
            }
            Self::LogNormal { mu, sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                (mu + sigma * z).exp()
            }
            Self::NormalMixture { ref components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut chosen = components.last().expect("validated mixture");
                for c in components {
                    acc += c.weight;
                    if u < acc {
                        chosen = c;
                        break;
                    }
                }
                let z: f64 = StandardNormal.sample(rng);
                chosen.mu + chosen.sigma * z
            }
        }
    }

    /// Inverse-transform draw: consumes exactly one uniform.
    ///
    /// Two measures driven by the same stream produce atoms related by the
    /// increasing map `Q₂ ∘ F₁`, which is what makes seed-coupled
    /// comparisons across base measures exact.
    pub fn sample_by_quantile<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        self.quantile(u)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => std_normal().cdf((x - mu) / sigma),
            Self::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::StudentT { df } => student(df).cdf(x),
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal().cdf((x.ln() - mu) / sigma)
                }
            }
            Self::NormalMixture { ref components } => components
                .iter()
                .map(|c| c.weight * std_normal().cdf((x - c.mu) / c.sigma))
                .sum(),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => std_normal().pdf((x - mu) / sigma) / sigma,
            Self::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
            Self::StudentT { df } => student(df).pdf(x),
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal().pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
            Self::NormalMixture { ref components } => components
                .iter()
                .map(|c| c.weight * std_normal().pdf((x - c.mu) / c.sigma) / c.sigma)
                .sum(),
        }
    }

    /// Quantile function on `[0, 1]`.
    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Self::Normal { mu, sigma } => mu + sigma * std_normal_quantile(p),
            Self::Uniform { lo, hi } => lo + (hi - lo) * p,
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
            Self::LogNormal { mu, sigma } => (mu + sigma * std_normal_quantile(p)).exp(),
            Self::StudentT { df } => {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                if p >= 1.0 {
                    return f64::INFINITY;
                }
                if p == 0.5 {
                    return 0.0;
                }
                // statrs' inverse is only a starting point; it is off in the
                // third digit for some df.
                let guess = student(df).inverse_cdf(p);
                self.refine_quantile(p, guess)
            }
            Self::NormalMixture { ref components } => {
                if p <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                if p >= 1.0 {
                    return f64::INFINITY;
                }
                let z = std_normal().inverse_cdf(p);
                let guess = components.iter().map(|c| c.weight * (c.mu + c.sigma * z)).sum();
                self.refine_quantile(p, guess)
            }
        }
    }

    /// Safeguarded Newton on the CDF around an initial guess.
    fn refine_quantile(&self, p: f64, guess: f64) -> f64 {
        let guess = if guess.is_finite() { guess } else { 0.0 };
        let mut step = guess.abs().max(1.0);
        let (mut lo, mut hi) = (guess, guess);
        while self.cdf(lo) > p {
            lo -= step;
            step *= 2.0;
        }
        step = guess.abs().max(1.0);
        while self.cdf(hi) < p {
            hi += step;
            step *= 2.0;
        }
        let mut x = guess.clamp(lo, hi);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f == 0.0 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - f / self.pdf(x);
            if !next.is_finite() || next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * x.abs().max(1.0) {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::Normal { mu, .. } => Some(mu),
            Self::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            Self::Exponential { rate } => Some(1.0 / rate),
            Self::StudentT { df } => (df > 1.0).then_some(0.0),
            Self::LogNormal { mu, sigma } => Some((mu + 0.5 * sigma * sigma).exp()),
            Self::NormalMixture { ref components } => {
                Some(components.iter().map(|c| c.weight * c.mu).sum())
            }
        }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// statrs' inverse is good to about 1e-10; one Newton step against the
/// erfc-based CDF brings it to rounding level.
fn std_normal_quantile(p: f64) -> f64 {
    let n = std_normal();
    let x = n.inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    x - (n.cdf(x) - p) / n.pdf(x)
}

fn student(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("validated df")
}

impl fmt::Display for BaseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal { mu, sigma } => write!(f, "normal:{mu},{sigma}"),
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::StudentT { df } => write!(f, "t:{df}"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
            Self::NormalMixture { components } => {
                write!(f, "mixture:")?;
                for (i, c) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{},{},{}", c.weight, c.mu, c.sigma)?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `normal[:mu,sigma]`, `uniform[:lo,hi]`, `exponential[:rate]`,
/// `t:df`, `lognormal[:mu,sigma]` and `mixture:w,mu,sigma;w,mu,sigma;...`.
impl FromStr for BaseMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n.trim().to_ascii_lowercase(), Some(a)),
            None => (s.to_ascii_lowercase(), None),
        };
        let nums = |a: &str| -> Result<Vec<f64>> {
            a.split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        Error::InvalidParameter(format!("cannot parse {v:?} in base measure {s:?}"))
                    })
                })
                .collect()
        };
        let args_or = |default: &[f64]| -> Result<Vec<f64>> {
            let v = match args {
                Some(a) => nums(a)?,
                None => default.to_vec(),
            };
            if v.len() != default.len() {
                return Err(Error::InvalidParameter(format!(
                    "{name} takes {} parameter(s), got {}",
                    default.len(),
                    v.len()
                )));
            }
            Ok(v)
        };
        match name.as_str() {
            "normal" | "gaussian" => {
                let v = args_or(&[0.0, 1.0])?;
                Self::normal(v[0], v[1])
            }
            "uniform" => {
                let v = args_or(&[0.0, 1.0])?;
                Self::uniform(v[0], v[1])
            }
            "exponential" | "exp" => {
                let v = args_or(&[1.0])?;
                Self::exponential(v[0])
            }
            "t" | "student" | "studentt" => {
                let v = args_or(&[f64::NAN])?;
                Self::student_t(v[0])
            }
            "lognormal" => {
                let v = args_or(&[0.0, 1.0])?;
                Self::log_normal(v[0], v[1])
            }
            "mixture" => {
                let a = args.ok_or_else(|| Error::InvalidParameter("mixture needs components".into()))?;
                let comps = a
                    .split(';')
                    .map(|c| {
                        let v = nums(c)?;
                        if v.len() != 3 {
                            return Err(Error::InvalidParameter(format!(
                                "mixture component {c:?} must be weight,mu,sigma"
                            )));
                        }
                        Ok((v[0], v[1], v[2]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::normal_mixture(&comps)
            }
            _ => Err(Error::InvalidParameter(format!("unknown base measure {s:?}"))),
        }
    }
}
