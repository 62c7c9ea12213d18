//! Kolmogorov (sup-norm CDF) distance between discrete measures.

use crate::dp::WeightedDiscreteMeasure;
use crate::scalar::Real;

/// `sup_x |P(x) - Q(x)|` for two discrete measures.
///
/// Both CDFs are step functions that are constant between the combined
/// atoms and zero below them, so the supremum is attained at an atom. The
/// atom lists are merged in one sweep; an atom present in both measures
/// advances both CDFs before the difference is taken.
pub fn kolmogorov_distance<T: Real>(p: &WeightedDiscreteMeasure<T>, q: &WeightedDiscreteMeasure<T>) -> T {
    let (pa, pc) = (p.atoms(), p.cum_weights());
    let (qa, qc) = (q.atoms(), q.cum_weights());
    let (mut i, mut j) = (0, 0);
    let (mut fp, mut fq) = (T::zero(), T::zero());
    let mut d = T::zero();
    while i < pa.len() || j < qa.len() {
        let take_p = j == qa.len() || (i < pa.len() && pa[i] <= qa[j]);
        let take_q = i == pa.len() || (j < qa.len() && qa[j] <= pa[i]);
        if take_p {
            fp = pc[i];
            i += 1;
        }
        if take_q {
            fq = qc[j];
            j += 1;
        }
        d = d.max((fp - fq).abs());
    }
    d
}

/// Test oracle: evaluates both CDFs independently (binary search) at every
/// combined atom. Quadratic-ish; intended for small measures.
pub fn kolmogorov_distance_bruteforce<T: Real>(
    p: &WeightedDiscreteMeasure<T>,
    q: &WeightedDiscreteMeasure<T>,
) -> T {
    p.atoms()
        .iter()
        .chain(q.atoms())
        .map(|&z| (p.cdf_at(z) - q.cdf_at(z)).abs())
        .fold(T::zero(), T::max)
}
