use rand_distr::{Distribution, Open01};

use crate::dp::measure::WeightedDiscreteMeasure;
use crate::dp::params::DpParams;
use crate::error::{Error, Result};
use crate::kernel::arrivals::arrival_ratio_logs;
use crate::kernel::gamma::{QuantileCache, TailQuantile};
use crate::kernel::rng::RngStream;
use crate::scalar::Real;

/// Default number of retained atoms.
pub const DEFAULT_TRUNCATION: usize = 1000;

const LANE_WEIGHTS: u64 = 0x7765_6967_6874;
const LANE_ATOMS: u64 = 0x6174_6f6d;

/// Draws truncated realizations of one Dirichlet process.
///
/// With `n` atoms, the `i`-th weight is proportional to the Gamma(c/n, 1)
/// tail quantile at `Γᵢ / Γₙ₊₁` (`c` the concentration), so weights decrease
/// along the arrival order. Atoms are i.i.d. from the base mixture. The
/// weights and the atoms use separate child streams, which keeps the weight
/// sequence identical whatever base measure is in use.
#[derive(Debug, Clone)]
pub struct DpSampler<T> {
    params: DpParams<T>,
    n: usize,
    quantile: TailQuantile<T>,
    sorted_data: Vec<T>,
}

impl<T: Real> DpSampler<T> {
    /// Sampler using the direct root finder for every weight.
    pub fn new(params: DpParams<T>, n: usize) -> Result<Self> {
        let shape = Self::shape_for(&params, n)?;
        Self::with_quantile(params, n, TailQuantile::direct(shape)?)
    }

    /// Sampler whose weights come from a tabulated solver in `cache`.
    pub fn cached(params: DpParams<T>, n: usize, cache: &QuantileCache<T>) -> Result<Self> {
        let shape = Self::shape_for(&params, n)?;
        Self::with_quantile(params, n, cache.get(shape)?)
    }

    pub fn with_quantile(params: DpParams<T>, n: usize, quantile: TailQuantile<T>) -> Result<Self> {
        let shape = Self::shape_for(&params, n)?;
        if quantile.shape() != shape {
            return Err(Error::InvalidParameter(format!(
                "solver is for shape {} but the sampler needs {shape}",
                quantile.shape()
            )));
        }
        let mut sorted_data = params.data().to_vec();
        sorted_data.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite data"));
        Ok(Self { params, n, quantile, sorted_data })
    }

    fn shape_for(params: &DpParams<T>, n: usize) -> Result<T> {
        if n == 0 {
            return Err(Error::InvalidParameter("truncation level must be at least 1".into()));
        }
        Ok(params.concentration() / T::lit(n as f64))
    }

    pub fn params(&self) -> &DpParams<T> {
        &self.params
    }

    pub fn truncation(&self) -> usize {
        self.n
    }

    /// Unnormalized log weights in arrival order (strictly decreasing).
    pub fn draw_log_weights(&self, stream: RngStream) -> Result<Vec<T>> {
        let mut rng = stream.derive(LANE_WEIGHTS).rng();
        arrival_ratio_logs::<T, _>(self.n, &mut rng)
            .into_iter()
            .map(|(ln_y, ln_1my)| self.quantile.solve_logs(ln_y, ln_1my))
            .collect()
    }

    /// Atom locations in arrival order. Data atoms are reported by their
    /// index into the sorted observations.
    fn draw_atoms(&self, stream: RngStream) -> Vec<AtomSource<T>> {
        let mut rng = stream.derive(LANE_ATOMS).rng();
        let a = self.params.prior_concentration().as_f64();
        let m = self.sorted_data.len();
        let total = a + m as f64;
        (0..self.n)
            .map(|_| {
                let u: f64 = Open01.sample(&mut rng);
                let pos = u * total;
                if m == 0 || pos < a {
                    AtomSource::Base(T::lit(self.params.base().sample_by_quantile(&mut rng)))
                } else {
                    AtomSource::Data(((pos - a) as usize).min(m - 1))
                }
            })
            .collect()
    }

    /// One truncated realization, atoms sorted and ties merged.
    pub fn draw(&self, stream: RngStream) -> Result<WeightedDiscreteMeasure<T>> {
        let log_weights = self.draw_log_weights(stream)?;
        let atoms = self.draw_atoms(stream);
        let m = self.sorted_data.len();

        let mut base_pairs = Vec::new();
        // Weights arrive in decreasing order, so the first hit on an
        // observation is its largest term and a safe shift for the rest.
        let mut lead = vec![T::neg_infinity(); m];
        let mut rel = vec![T::zero(); m];
        for (src, &lw) in atoms.iter().zip(&log_weights) {
            match *src {
                AtomSource::Base(x) => base_pairs.push((x, lw)),
                AtomSource::Data(j) => {
                    if lead[j] == T::neg_infinity() {
                        lead[j] = lw;
                        rel[j] = T::one();
                    } else {
                        rel[j] = rel[j] + (lw - lead[j]).exp();
                    }
                }
            }
        }
        base_pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));

        let data_pairs = (0..m)
            .filter(|&j| lead[j] > T::neg_infinity())
            .map(|j| (self.sorted_data[j], lead[j] + rel[j].ln()));
        let merged = merge_sorted(base_pairs, data_pairs);
        WeightedDiscreteMeasure::from_sorted_log_weights(merged)
    }

    /// Reference construction: pairs every atom with its weight and leaves
    /// sorting and tie merging to the generic constructor. Same stream, same
    /// measure as [`Self::draw`] up to rounding.
    pub fn draw_unbucketed(&self, stream: RngStream) -> Result<WeightedDiscreteMeasure<T>> {
        let log_weights = self.draw_log_weights(stream)?;
        let pairs = self
            .draw_atoms(stream)
            .into_iter()
            .zip(log_weights)
            .map(|(src, lw)| match src {
                AtomSource::Base(x) => (x, lw),
                AtomSource::Data(j) => (self.sorted_data[j], lw),
            })
            .collect();
        WeightedDiscreteMeasure::from_log_weights(pairs)
    }

    /// Whether each atom of a realization came from the base measure, in
    /// arrival order, together with the normalized weights.
    pub fn draw_with_provenance(&self, stream: RngStream) -> Result<Vec<(bool, T)>> {
        let log_weights = self.draw_log_weights(stream)?;
        let total = crate::kernel::lse::log_sum_exp(&log_weights)?;
        Ok(self
            .draw_atoms(stream)
            .into_iter()
            .zip(log_weights)
            .map(|(src, lw)| (matches!(src, AtomSource::Base(_)), (lw - total).exp()))
            .collect())
    }
}

#[derive(Debug, Clone, Copy)]
enum AtomSource<T> {
    Base(T),
    Data(usize),
}

fn merge_sorted<T: Real>(a: Vec<(T, T)>, b: impl Iterator<Item = (T, T)>) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(a.len());
    let mut a = a.into_iter().peekable();
    let mut b = b.peekable();
    loop {
        let take_a = match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => x.0 <= y.0,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        out.push(if take_a { a.next() } else { b.next() }.unwrap());
    }
    out
}

/// One truncated realization of `DP(params)` with `n` atoms.
pub fn draw_realization<T: Real>(
    params: &DpParams<T>,
    n: usize,
    stream: RngStream,
) -> Result<WeightedDiscreteMeasure<T>> {
    DpSampler::new(params.clone(), n)?.draw(stream)
}
