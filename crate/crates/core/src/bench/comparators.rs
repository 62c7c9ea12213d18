//! Frequentist two-sample tests used as comparators.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::kernel::RngStream;

/// Default number of label permutations for the K-S p-value.
pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// A test statistic and its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pooled sample sorted by value, labelled by origin.
struct Pooled {
    labels: Vec<bool>,
    /// `last_in_group[k]` is true when position `k` ends a run of ties.
    last_in_group: Vec<bool>,
}

impl Pooled {
    fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        check(x, y)?;
        let mut v: Vec<(f64, bool)> = x.iter().map(|&a| (a, true)).chain(y.iter().map(|&b| (b, false))).collect();
        v.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let last_in_group = (0..v.len()).map(|k| k + 1 == v.len() || v[k].0 != v[k + 1].0).collect();
        Ok(Self { labels: v.iter().map(|p| p.1).collect(), last_in_group })
    }

    /// `max |c1·m2 - c2·m1|` over group ends, where `c1, c2` count the
    /// x- and y-labels so far. Integer arithmetic keeps permutation
    /// comparisons exact.
    fn ks_numerator(&self, labels: &[bool], m1: i64, m2: i64) -> i64 {
        let (mut c1, mut c2, mut best) = (0i64, 0i64, 0i64);
        for (&is_x, &end) in labels.iter().zip(&self.last_in_group) {
            if is_x {
                c1 += 1;
            } else {
                c2 += 1;
            }
            if end {
                best = best.max((c1 * m2 - c2 * m1).abs());
            }
        }
        best
    }
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Empty("both samples need at least one observation"));
    }
    if let Some((index, v)) = x.iter().chain(y).enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value: *v });
    }
    Ok(())
}

/// Two-sample Kolmogorov-Smirnov test with a permutation p-value
/// `(1 + #{D* ≥ D}) / (B + 1)`.
pub fn classical_ks_test(x: &[f64], y: &[f64], permutations: usize, stream: RngStream) -> Result<TestOutcome> {
    let pooled = Pooled::new(x, y)?;
    let (m1, m2) = (x.len() as i64, y.len() as i64);
    let observed = pooled.ks_numerator(&pooled.labels, m1, m2);
    let mut rng = stream.rng();
    let mut labels = pooled.labels.clone();
    let mut at_least = 0usize;
    for _ in 0..permutations {
        labels.shuffle(&mut rng);
        if pooled.ks_numerator(&labels, m1, m2) >= observed {
            at_least += 1;
        }
    }
    Ok(TestOutcome {
        statistic: observed as f64 / (m1 * m2) as f64,
        p_value: (1 + at_least) as f64 / (permutations + 1) as f64,
    })
}

/// Mid-ranks of `values` (1-based), plus the tie sizes.
fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// Largest pooled size for which the exact null distribution is used.
pub const WILCOXON_EXACT_MAX: usize = 10;

/// Wilcoxon rank-sum test. The statistic is the sum of the mid-ranks of
/// `x` in the pooled sample.
///
/// Without ties and with `m1 + m2 ≤ 10` the p-value is exact; otherwise it
/// uses the normal approximation with tie and continuity corrections.
pub fn wilcoxon_test(x: &[f64], y: &[f64]) -> Result<TestOutcome> {
    check(x, y)?;
    let (m1, m2) = (x.len(), y.len());
    let n = m1 + m2;
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = mid_ranks(&pooled);
    let w: f64 = ranks[..m1].iter().sum();
    let has_ties = ties.iter().any(|&t| t > 1);

    let p_value = if n <= WILCOXON_EXACT_MAX && !has_ties {
        exact_rank_sum_p(w.round() as usize, m1, n)
    } else {
        let (nf, m1f, m2f) = (n as f64, m1 as f64, m2 as f64);
        let mean = m1f * (nf + 1.0) / 2.0;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (nf * (nf - 1.0));
        let var = m1f * m2f / 12.0 * (nf + 1.0 - if n > 1 { tie_term } else { 0.0 });
        if var <= 0.0 {
            1.0
        } else {
            let diff = w - mean;
            let correction = if diff == 0.0 { 0.0 } else { 0.5 * diff.signum() };
            let z = (diff - correction) / var.sqrt();
            let lower = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
            let upper = 0.5 * erfc(z / std::f64::consts::SQRT_2);
            (2.0 * lower.min(upper)).min(1.0)
        }
    };
    Ok(TestOutcome { statistic: w, p_value })
}

/// Two-sided exact p-value of a rank sum `w` of `k` ranks out of `1..=n`.
fn exact_rank_sum_p(w: usize, k: usize, n: usize) -> f64 {
    let max_sum = n * (n + 1) / 2;
    // counts[j][s]: subsets of size j of the ranks seen so far summing to s.
    let mut counts = vec![vec![0u64; max_sum + 1]; k + 1];
    counts[0][0] = 1;
    for rank in 1..=n {
        for j in (1..=k.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                counts[j][s] += counts[j - 1][s - rank];
            }
        }
    }
    let dist = &counts[k];
    let total: u64 = dist.iter().sum();
    let lower: u64 = dist[..=w].iter().sum();
    let upper: u64 = dist[w..].iter().sum();
    (2.0 * lower.min(upper) as f64 / total as f64).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::kolmogorov_distance;
    use crate::dp::WeightedDiscreteMeasure;
    use proptest::prelude::*;

    fn ks(x: &[f64], y: &[f64]) -> TestOutcome {
        classical_ks_test(x, y, DEFAULT_PERMUTATIONS, RngStream::new(3, 0)).unwrap()
    }

    #[test]
    fn ks_small_example() {
        let r = ks(&[1.0, 2.0, 3.0], &[1.5, 2.5, 3.5]);
        assert!((r.statistic - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ks_identical_samples() {
        let x = [0.3, -1.0, 2.0, 2.0, 5.0];
        let r = ks(&x, &x);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_disjoint_supports() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = (1000..1020).map(f64::from).collect();
        let r = ks(&x, &y);
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, 1.0 / 1001.0);
    }

    #[test]
    fn ks_permutations_are_seeded() {
        let x = [0.1, 0.4, 0.35, 0.8];
        let y = [0.2, 0.5, 0.9];
        assert_eq!(ks(&x, &y), ks(&x, &y));
    }

    #[test]
    fn wilcoxon_exact_small() {
        let r = wilcoxon_test(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 3.0);
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);
        // Exhaustive enumeration oracle: C(6,3) = 20 subsets.
        let r = wilcoxon_test(&[1.0, 5.0, 6.0], &[2.0, 3.0, 4.0]).unwrap();
        let mut sums = Vec::new();
        for a in 1..=6 {
            for b in a + 1..=6 {
                for c in b + 1..=6 {
                    sums.push(a + b + c);
                }
            }
        }
        let lo = sums.iter().filter(|&&s| s <= 12).count() as f64 / 20.0;
        let hi = sums.iter().filter(|&&s| s >= 12).count() as f64 / 20.0;
        assert!((r.p_value - (2.0 * lo.min(hi)).min(1.0)).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_identical_samples() {
        let x: Vec<f64> = (0..30).map(|i| f64::from(i).sqrt()).collect();
        let mut y = x.clone();
        y.reverse();
        let r = wilcoxon_test(&x, &y).unwrap();
        assert!(r.p_value >= 0.9);
    }

    #[test]
    fn wilcoxon_normal_approximation() {
        // Shift of 3σ with m = 50: practically complete separation.
        let x: Vec<f64> = (0..50).map(|i| f64::from(i) / 49.0 * 2.0 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 3.0).collect();
        let r = wilcoxon_test(&x, &y).unwrap();
        assert!(r.p_value < 0.05);
        // Oracle: W = 1275, E = 2525, Var = 50·50·101/12, continuity 0.5.
        let z: f64 = (1275.0 - 2525.0 + 0.5) / (50.0f64 * 50.0 * 101.0 / 12.0).sqrt();
        let p = 2.0 * 0.5 * erfc(-z / std::f64::consts::SQRT_2);
        assert!((r.p_value - p).abs() < 1e-15);
    }

    #[test]
    fn wilcoxon_ties_use_midranks() {
        let r = wilcoxon_test(&[1.0, 2.0, 2.0], &[2.0, 3.0]).unwrap();
        // Ranks: 1, 3, 3 | 3, 5.
        assert_eq!(r.statistic, 7.0);
        let all_tied = wilcoxon_test(&[1.0, 1.0], &[1.0]).unwrap();
        assert_eq!(all_tied.p_value, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(wilcoxon_test(&[], &[1.0]).is_err());
        assert!(classical_ks_test(&[1.0], &[f64::NAN], 10, RngStream::new(0, 0)).is_err());
    }

    proptest! {
        #[test]
        fn ks_statistic_is_the_empirical_distance(
            x in prop::collection::vec(-20i32..20, 1..30),
            y in prop::collection::vec(-20i32..20, 1..30),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = classical_ks_test(&x, &y, 20, RngStream::new(1, 1)).unwrap();
            let d = kolmogorov_distance(
                &WeightedDiscreteMeasure::empirical(&x).unwrap(),
                &WeightedDiscreteMeasure::empirical(&y).unwrap(),
            );
            prop_assert!((r.statistic - d).abs() < 1e-12);
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }

        #[test]
        fn wilcoxon_p_in_unit_interval(
            x in prop::collection::vec(-5i32..5, 1..12),
            y in prop::collection::vec(-5i32..5, 1..12),
        ) {
            let x: Vec<f64> = x.into_iter().map(f64::from).collect();
            let y: Vec<f64> = y.into_iter().map(f64::from).collect();
            let r = wilcoxon_test(&x, &y).unwrap();
            prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
            let n = (x.len() + y.len()) as f64;
            prop_assert!((r.statistic + wilcoxon_test(&y, &x).unwrap().statistic - n * (n + 1.0) / 2.0).abs() < 1e-9);
        }
    }
}
