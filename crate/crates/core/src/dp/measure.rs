use crate::error::{Error, Result};
use crate::kernel::lse::{log_add_exp, log_sum_exp};
use crate::scalar::Real;

/// A finite discrete probability measure on the real line.
///
/// Atoms are strictly ascending (equal atoms are merged on construction),
/// `log_weights` are normalized so their exponentials sum to one, and
/// `cum_weights[k]` is the mass of `(-inf, atoms[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDiscreteMeasure<T> {
    atoms: Vec<T>,
    log_weights: Vec<T>,
    cum_weights: Vec<T>,
}

impl<T: Real> WeightedDiscreteMeasure<T> {
    /// Builds a measure from `(atom, unnormalized log weight)` pairs in any
    /// order.
    pub fn from_log_weights(mut pairs: Vec<(T, T)>) -> Result<Self> {
        check_pairs(&pairs)?;
        pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("atoms checked for NaN"));
        Self::from_sorted_log_weights(pairs)
    }

    /// Like [`Self::from_log_weights`] for pairs already sorted by atom.
    pub(crate) fn from_sorted_log_weights(pairs: Vec<(T, T)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty("a discrete measure needs at least one atom"));
        }
        let mut atoms: Vec<T> = Vec::with_capacity(pairs.len());
        let mut log_weights: Vec<T> = Vec::with_capacity(pairs.len());
        for (x, lw) in pairs {
            match atoms.last() {
                Some(&last) if last == x => {
                    let tail = log_weights.last_mut().unwrap();
                    *tail = log_add_exp(*tail, lw);
                }
                _ => {
                    atoms.push(x);
                    log_weights.push(lw);
                }
            }
        }
        let total = log_sum_exp(&log_weights)?;
        if !total.is_finite() {
            return Err(Error::Domain(format!("total log weight is {total}")));
        }
        let mut acc = T::zero();
        let mut cum_weights = Vec::with_capacity(log_weights.len());
        for lw in &mut log_weights {
            *lw = *lw - total;
            acc = acc + lw.exp();
            cum_weights.push(acc);
        }
        Ok(Self { atoms, log_weights, cum_weights })
    }

    /// Builds a measure from linear (possibly unnormalized) weights.
    pub fn from_weights(atoms: &[T], weights: &[T]) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter(format!("weights must be finite and nonnegative, got {w}")));
        }
        Self::from_log_weights(atoms.iter().zip(weights).map(|(&x, &w)| (x, w.ln())).collect())
    }

    /// The empirical measure of `data`: mass `1/m` per observation.
    pub fn empirical(data: &[T]) -> Result<Self> {
        Self::from_log_weights(data.iter().map(|&x| (x, T::zero())).collect())
    }

    pub fn point_mass(x: T) -> Result<Self> {
        Self::from_log_weights(vec![(x, T::zero())])
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    pub fn cum_weights(&self) -> &[T] {
        &self.cum_weights
    }

    pub fn weights(&self) -> impl Iterator<Item = T> + '_ {
        self.log_weights.iter().map(|lw| lw.exp())
    }

    /// Right-continuous CDF: total weight of atoms `<= x`.
    pub fn cdf_at(&self, x: T) -> T {
        let k = self.atoms.partition_point(|&a| a <= x);
        if k == 0 {
            T::zero()
        } else {
            self.cum_weights[k - 1]
        }
    }

    pub fn mean(&self) -> T {
        self.atoms.iter().zip(self.weights()).map(|(&x, w)| x * w).sum()
    }

    /// Applies an increasing map to every atom, keeping the weights.
    ///
    /// The caller guarantees `f` is strictly increasing on the atoms; equal
    /// images produced by rounding are merged. Without merges the weights
    /// are carried over bit for bit.
    pub fn map_atoms(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let atoms: Vec<T> = self.atoms.iter().map(|&x| f(x)).collect();
        if let Some(index) = atoms.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index, value: atoms[index].as_f64() });
        }
        if atoms.windows(2).all(|w| w[0] < w[1]) {
            return Ok(Self { atoms, log_weights: self.log_weights.clone(), cum_weights: self.cum_weights.clone() });
        }
        if atoms.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("map_atoms needs a nondecreasing map".into()));
        }
        Self::from_sorted_log_weights(atoms.into_iter().zip(self.log_weights.iter().copied()).collect())
    }
}

fn check_pairs<T: Real>(pairs: &[(T, T)]) -> Result<()> {
    for (index, &(x, lw)) in pairs.iter().enumerate() {
        if x.is_nan() || lw.is_nan() || lw == T::infinity() {
            return Err(Error::NonFinite { index, value: if x.is_nan() { x.as_f64() } else { lw.as_f64() } });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_steps() {
        let m = WeightedDiscreteMeasure::from_weights(&[0.0f64, 2.0], &[0.5, 0.5]).unwrap();
        assert_eq!(m.cdf_at(-1.0), 0.0);
        assert_eq!(m.cdf_at(0.0), 0.5);
        assert_eq!(m.cdf_at(1.0), 0.5);
        assert!((m.cdf_at(2.0) - 1.0).abs() < 1e-12);
        assert!((m.cdf_at(1e9) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ties_are_merged() {
        let m = WeightedDiscreteMeasure::from_weights(&[3.0f64, 1.0, 3.0, 2.0], &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.atoms(), &[1.0, 2.0, 3.0]);
        let w: Vec<f64> = m.weights().collect();
        assert!((w[2] - 0.5).abs() < 1e-15);
        assert!((w[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalizes_extreme_log_weights() {
        let m = WeightedDiscreteMeasure::from_log_weights(vec![(0.0f64, -5000.0), (1.0, -5000.0 + 2f64.ln())]).unwrap();
        let w: Vec<f64> = m.weights().collect();
        // -5000 + ln 3 carries an absolute rounding error near 1e-12.
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.cum_weights()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_atom_has_unit_mass() {
        let m = WeightedDiscreteMeasure::point_mass(4.0f64).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.cum_weights()[0], 1.0);
        assert_eq!(m.mean(), 4.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WeightedDiscreteMeasure::<f64>::from_log_weights(vec![]).is_err());
        assert!(WeightedDiscreteMeasure::from_log_weights(vec![(f64::NAN, 0.0)]).is_err());
        assert!(WeightedDiscreteMeasure::from_weights(&[1.0f64], &[-1.0]).is_err());
        assert!(WeightedDiscreteMeasure::from_weights(&[1.0f64, 2.0], &[1.0]).is_err());
        assert!(WeightedDiscreteMeasure::from_weights(&[1.0f64, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn empirical_measure() {
        let m = WeightedDiscreteMeasure::empirical(&[2.0f64, 1.0, 2.0, 5.0]).unwrap();
        assert_eq!(m.atoms(), &[1.0, 2.0, 5.0]);
        assert!((m.cdf_at(2.0) - 0.75).abs() < 1e-15);
        assert!((m.mean() - 2.5).abs() < 1e-15);
    }
}
