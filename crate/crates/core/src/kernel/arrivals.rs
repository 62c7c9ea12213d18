use rand::Rng;

use crate::scalar::Real;

/// Partial sums `Γ₁ < … < Γ_count` of i.i.d. unit-mean exponentials.
pub fn gamma_arrivals<T: Real, R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<T> {
    let mut acc = T::zero();
    (0..count)
        .map(|_| {
            acc = acc + T::sample_exp1(rng);
            acc
        })
        .collect()
}

/// For `n` atoms, draws `Γ₁ … Γₙ₊₁` and returns `(ln yᵢ, ln(1 - yᵢ))` for
/// `yᵢ = Γᵢ / Γₙ₊₁`, `i = 1..=n`.
///
/// `1 - yᵢ` is formed from the suffix sum `Eᵢ₊₁ + … + Eₙ₊₁`, so it keeps full
/// relative precision even when `yᵢ` is within rounding of one.
pub fn arrival_ratio_logs<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<(T, T)> {
    let gaps: Vec<T> = (0..=n).map(|_| T::sample_exp1(rng)).collect();
    let mut suffix = vec![T::zero(); n + 1];
    let mut acc = T::zero();
    for k in (1..=n).rev() {
        acc = acc + gaps[k];
        suffix[k - 1] = acc;
    }
    let mut prefix = T::zero();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        prefix = prefix + gaps[k];
        out.push((prefix, suffix[k]));
    }
    let total = prefix + gaps[n];
    let ln_total = total.ln();
    for pair in &mut out {
        *pair = (pair.0.ln() - ln_total, pair.1.ln() - ln_total);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::rng::RngStream;

    #[test]
    fn single_arrival_is_positive() {
        let v: Vec<f64> = gamma_arrivals(1, &mut RngStream::new(1, 0).rng());
        assert_eq!(v.len(), 1);
        assert!(v[0] > 0.0);
    }

    #[test]
    fn strictly_increasing() {
        let v: Vec<f64> = gamma_arrivals(10_000, &mut RngStream::new(2, 0).rng());
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn law_of_large_numbers() {
        let n = 100_000;
        let v: Vec<f64> = gamma_arrivals(n + 1, &mut RngStream::new(3, 0).rng());
        let ratio = v[n] / (n + 1) as f64;
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn ratio_logs_are_consistent() {
        let logs: Vec<(f64, f64)> = arrival_ratio_logs(500, &mut RngStream::new(4, 0).rng());
        assert_eq!(logs.len(), 500);
        for w in logs.windows(2) {
            assert!(w[0].0 < w[1].0);
            assert!(w[0].1 > w[1].1);
        }
        for &(ly, l1) in &logs {
            assert!(ly < 0.0 && l1 < 0.0);
            assert!((ly.exp() + l1.exp() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn ratio_logs_share_the_arrival_sequence() {
        let mut a = RngStream::new(5, 0).rng();
        let mut b = RngStream::new(5, 0).rng();
        let g: Vec<f64> = gamma_arrivals(21, &mut a);
        let logs: Vec<(f64, f64)> = arrival_ratio_logs(20, &mut b);
        for (i, &(ly, _)) in logs.iter().enumerate() {
            assert!((ly - (g[i] / g[20]).ln()).abs() < 1e-13);
        }
    }
}
