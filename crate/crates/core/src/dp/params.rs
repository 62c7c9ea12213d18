use crate::error::{Error, Result};
use crate::kernel::base::BaseMeasure;
use crate::scalar::Real;

/// Parameters of a Dirichlet process: a concentration and a base measure.
///
/// A posterior keeps the prior concentration `a` and the observations; its
/// concentration is `a + m` and its base measure is the mixture
/// `a/(a+m)·H + m/(a+m)·(empirical measure of the data)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpParams<T> {
    prior_concentration: T,
    base: BaseMeasure,
    data: Vec<T>,
}

impl<T: Real> DpParams<T> {
    /// A prior `DP(a, H)`.
    pub fn prior(concentration: T, base: BaseMeasure) -> Result<Self> {
        if !(concentration > T::zero()) || !concentration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "concentration must be positive and finite, got {concentration}"
            )));
        }
        base.validate()?;
        Ok(Self { prior_concentration: concentration, base, data: Vec::new() })
    }

    /// Conjugate update of a prior with observations.
    pub fn posterior(&self, observations: &[T]) -> Result<Self> {
        posterior_params(self, observations)
    }

    /// `a` for a prior, `a + m` for a posterior.
    pub fn concentration(&self) -> T {
        self.prior_concentration + T::lit(self.data.len() as f64)
    }

    pub fn prior_concentration(&self) -> T {
        self.prior_concentration
    }

    pub fn base(&self) -> &BaseMeasure {
        &self.base
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn is_prior(&self) -> bool {
        self.data.is_empty()
    }

    /// Mixture weight on `H`: `a / (a + m)`.
    pub fn base_weight(&self) -> T {
        self.prior_concentration / self.concentration()
    }

    /// Mixture weight on the empirical measure: `m / (a + m)`.
    pub fn data_weight(&self) -> T {
        T::lit(self.data.len() as f64) / self.concentration()
    }
}

/// Posterior parameters `(a + m, a/(a+m)·H + m/(a+m)·Fₘ)` given a prior
/// with no data.
pub fn posterior_params<T: Real>(prior: &DpParams<T>, observations: &[T]) -> Result<DpParams<T>> {
    if !prior.is_prior() {
        return Err(Error::InvalidParameter(
            "sequential updating is not supported; start from a prior with no data".into(),
        ));
    }
    if let Some((index, v)) = observations.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value: v.as_f64() });
    }
    Ok(DpParams {
        prior_concentration: prior.prior_concentration,
        base: prior.base.clone(),
        data: observations.to_vec(),
    })
}
