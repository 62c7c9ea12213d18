use crate::error::{Error, Result};
use crate::scalar::Real;

/// `ln Σ exp(vᵢ)` with max-shift. Entries may be `-inf`; an all `-inf`
/// input gives `-inf`.
pub fn log_sum_exp<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Empty("log_sum_exp needs at least one value"));
    }
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() || max == T::infinity() {
        return Ok(max);
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `ln(eᵃ + eᵇ)`.
#[inline]
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == T::neg_infinity() {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
