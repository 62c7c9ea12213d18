//! Log-domain regularized incomplete gamma functions and the inverse of the
//! Gamma upper tail used to weight truncated Dirichlet-process atoms.
//!
//! Everything is expressed in `t = ln x`. For shapes around `10⁻³` the
//! quantiles of interest sit near `x = e⁻⁷⁰⁰` and below, far outside the
//! range where `x` itself is representable, while `ln x` stays well scaled.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_ITER: usize = 500;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // Γ(x) = Γ(x + 1) / x keeps the argument in the accurate range.
        return ln_gamma(x + T::one()) - x.ln();
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::lit(k as f64));
    }
    let tt = z + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * T::TAU().ln() + (z + T::lit(0.5)) * tt.ln() - tt + acc.ln()
}

/// `ln P(s, x)` and `ln Q(s, x)` at `x = e^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogIncGamma<T> {
    pub ln_lower: T,
    pub ln_upper: T,
}

/// Shape-dependent constants shared by every evaluation at one shape.
#[derive(Debug, Clone, Copy)]
pub struct GammaShape<T> {
    shape: T,
    ln_gamma: T,
    ln_gamma_1p: T,
}

impl<T: Real> GammaShape<T> {
    pub fn new(shape: T) -> Result<Self> {
        if !(shape > T::zero()) || !shape.is_finite() {
            return Err(Error::Domain(format!("gamma shape must be positive and finite, got {shape}")));
        }
        let ln_gamma_1p = ln_gamma(shape + T::one());
        Ok(Self {
            shape,
            ln_gamma: ln_gamma_1p - shape.ln(),
            ln_gamma_1p,
        })
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    /// `ln(x · density(x))` at `x = e^t`; the derivative of `P(s, e^t)` in `t`.
    #[inline]
    pub fn ln_scaled_density(&self, t: T) -> T {
        self.shape * t - t.exp() - self.ln_gamma
    }

    /// Regularized lower and upper incomplete gamma, both in log domain.
    ///
    /// Series for `x < s + 1`, Lentz continued fraction otherwise; the
    /// complement is taken with `ln_1p` so the small side is always exact.
    pub fn log_inc(&self, t: T) -> LogIncGamma<T> {
        let s = self.shape;
        let one = T::one();
        let x = t.exp();
        if x == T::infinity() {
            return LogIncGamma { ln_lower: T::zero(), ln_upper: T::neg_infinity() };
        }
        let eps = T::epsilon();
        if x < s + one {
            let mut term = one;
            let mut sum = one;
            let mut denom = s;
            for _ in 0..MAX_ITER {
                denom = denom + one;
                term = term * x / denom;
                sum = sum + term;
                if term < sum * eps {
                    break;
                }
            }
            let ln_lower = s * t - x - self.ln_gamma_1p + sum.ln();
            let ln_upper = (-ln_lower.exp()).ln_1p();
            LogIncGamma { ln_lower, ln_upper }
        } else {
            let tiny = T::min_positive_value() / eps;
            let mut b = x + one - s;
            let mut c = one / tiny;
            let mut d = one / b;
            let mut h = d;
            for i in 1..MAX_ITER {
                let fi = T::lit(i as f64);
                let an = -fi * (fi - s);
                b = b + T::lit(2.0);
                d = an * d + b;
                if d.abs() < tiny {
                    d = tiny;
                }
                c = b + an / c;
                if c.abs() < tiny {
                    c = tiny;
                }
                d = one / d;
                let delta = d * c;
                h = h * delta;
                if (delta - one).abs() < eps {
                    break;
                }
            }
            let ln_upper = s * t - x - self.ln_gamma + h.ln();
            let ln_lower = (-ln_upper.exp()).ln_1p();
            LogIncGamma { ln_lower, ln_upper }
        }
    }
}

/// Which tail the root finder works on. Each branch keeps its target
/// probability at most one half, where its logarithm is well conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// Solve `ln P(s, e^t) = ln(1 - y)`; increasing in `t`.
    Lower,
    /// Solve `ln Q(s, e^t) = ln y`; decreasing in `t`.
    Upper,
}

/// Inverse of the Gamma(shape, 1) upper tail, returned as `ln x`.
#[derive(Debug, Clone, Copy)]
pub struct GammaTailQuantile<T> {
    gamma: GammaShape<T>,
}

impl<T: Real> GammaTailQuantile<T> {
    pub fn new(shape: T) -> Result<Self> {
        Ok(Self { gamma: GammaShape::new(shape)? })
    }

    pub fn shape(&self) -> T {
        self.gamma.shape
    }

    pub fn gamma(&self) -> &GammaShape<T> {
        &self.gamma
    }

    fn tolerance(t: T) -> T {
        T::epsilon() * T::lit(256.0) * (T::one() + t.abs())
    }

    /// `ln x` with `Q(shape, x) = y`, given `ln y` and `ln(1 - y)`.
    ///
    /// Passing both logs lets callers that know `1 - y` exactly (for
    /// instance from a suffix sum) avoid the cancellation in `1 - y`.
    pub fn solve_logs(&self, ln_y: T, ln_1my: T) -> Result<T> {
        let s = self.gamma.shape;
        let ln_half = -T::LN_2();
        // P(s, x) ≤ xˢ / Γ(s + 1), so this asymptote never exceeds the root.
        let asymptote = |ln_p: T| (self.gamma.ln_gamma_1p + ln_p) / s;

        if ln_y >= ln_half {
            let lo = asymptote(ln_1my);
            // The root lies below the median, which is below the mean s.
            let hi = s.ln().max(lo);
            // lnP(e^t) is concave in t: Newton from the left bound climbs
            // monotonically to the root.
            self.newton(Branch::Lower, ln_1my, lo, hi, lo)
        } else {
            let lo = asymptote(ln_half);
            let hi = self.upper_bracket(ln_y, lo)?;
            self.newton(Branch::Upper, ln_y, lo, hi, hi)
        }
    }

    /// Finds `t` with `Q(s, e^t) ≤ y`, starting from a Chernoff-style guess.
    fn upper_bracket(&self, ln_y: T, lo: T) -> Result<T> {
        let s = self.gamma.shape;
        // (e x / s)^s e^{-x} bounds Q for x > s; iterate towards its root.
        let mut x = s - ln_y;
        for _ in 0..8 {
            x = s - ln_y + s * (x / s).ln();
        }
        let mut hi = x.ln().max(lo + T::one());
        for _ in 0..200 {
            if self.gamma.log_inc(hi).ln_upper <= ln_y {
                return Ok(hi);
            }
            hi = hi + T::one();
        }
        Err(Error::NoConvergence { shape: s.as_f64(), y: ln_y.exp().as_f64() })
    }

    #[inline]
    fn residual(&self, branch: Branch, target: T, t: T) -> (T, T) {
        let v = self.gamma.log_inc(t);
        let ld = self.gamma.ln_scaled_density(t);
        match branch {
            Branch::Lower => (v.ln_lower - target, (ld - v.ln_lower).exp()),
            Branch::Upper => (v.ln_upper - target, -(ld - v.ln_upper).exp()),
        }
    }

    /// Newton iteration on `t` safeguarded by the bracket `[lo, hi]`.
    fn newton(&self, branch: Branch, target: T, mut lo: T, mut hi: T, mut t: T) -> Result<T> {
        let two = T::lit(2.0);
        for _ in 0..MAX_ITER {
            let (f, df) = self.residual(branch, target, t);
            if f == T::zero() {
                return Ok(t);
            }
            let root_above = match branch {
                Branch::Lower => f < T::zero(),
                Branch::Upper => f > T::zero(),
            };
            if root_above {
                lo = lo.max(t);
            } else {
                hi = hi.min(t);
            }
            let mut next = t - f / df;
            if !next.is_finite() || next < lo || next > hi {
                next = (lo + hi) / two;
            }
            let tol = Self::tolerance(t);
            if (next - t).abs() <= tol || hi - lo <= tol {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::NoConvergence {
            shape: self.gamma.shape.as_f64(),
            y: target.exp().as_f64(),
        })
    }

    /// One Newton correction from a starting point already close to the root.
    /// Returns the corrected value and the size of the step taken.
    #[inline]
    fn polish(&self, ln_y: T, ln_1my: T, t: T) -> (T, T) {
        let (f, df) = if ln_y >= -T::LN_2() {
            self.residual(Branch::Lower, ln_1my, t)
        } else {
            self.residual(Branch::Upper, ln_y, t)
        };
        let step = f / df;
        (t - step, step.abs())
    }
}

/// `ln x` where `x` solves `Q(shape, x) = y` and `Q` is the regularized
/// upper incomplete gamma function.
pub fn gamma_tail_quantile_log<T: Real>(shape: T, y: T) -> Result<T> {
    if !(y > T::zero() && y < T::one()) {
        return Err(Error::Domain(format!("tail probability must lie in (0, 1), got {y}")));
    }
    GammaTailQuantile::new(shape)?.solve_logs(y.ln(), (-y).ln_1p())
}

/// Number of interpolation knots in [`TabulatedTailQuantile`].
pub const TABLE_KNOTS: usize = 1024;
/// The table covers `logit(y)` in `[-TABLE_LOGIT_SPAN, TABLE_LOGIT_SPAN]`.
pub const TABLE_LOGIT_SPAN: f64 = 40.0;

/// Tail quantile for a fixed shape, memoized as a monotone cubic Hermite
/// interpolant in `logit(y)` and refined by a single Newton step.
///
/// Building costs [`TABLE_KNOTS`] direct solves; each lookup afterwards is
/// one incomplete-gamma evaluation.
#[derive(Debug, Clone)]
pub struct TabulatedTailQuantile<T> {
    direct: GammaTailQuantile<T>,
    v0: T,
    inv_h: T,
    h: T,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> TabulatedTailQuantile<T> {
    pub fn new(shape: T) -> Result<Self> {
        let direct = GammaTailQuantile::new(shape)?;
        let span = T::lit(TABLE_LOGIT_SPAN);
        let h = T::lit(2.0) * span / T::lit((TABLE_KNOTS - 1) as f64);
        let mut values = Vec::with_capacity(TABLE_KNOTS);
        let mut slopes = Vec::with_capacity(TABLE_KNOTS);
        for k in 0..TABLE_KNOTS {
            let v = -span + h * T::lit(k as f64);
            let (ln_y, ln_1my) = logit_to_logs(v);
            let t = direct.solve_logs(ln_y, ln_1my)?;
            // dt/dv = -y(1 - y) / (x · density(x)).
            let dt = -(ln_y + ln_1my - direct.gamma.ln_scaled_density(t)).exp();
            values.push(t);
            slopes.push(dt);
        }
        limit_slopes(&values, &mut slopes, h);
        Ok(Self {
            direct,
            v0: -span,
            inv_h: h.recip(),
            h,
            values,
            slopes,
        })
    }

    pub fn shape(&self) -> T {
        self.direct.shape()
    }

    /// Interpolated `ln x` before refinement; `None` outside the table.
    pub fn interpolate(&self, v: T) -> Option<T> {
        let pos = (v - self.v0) * self.inv_h;
        if !(pos >= T::zero()) {
            return None;
        }
        let k = pos.floor().to_usize()?;
        if k >= TABLE_KNOTS - 1 {
            return if k == TABLE_KNOTS - 1 && pos == pos.floor() {
                Some(self.values[k])
            } else {
                None
            };
        }
        let u = pos - T::lit(k as f64);
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.h, self.slopes[k + 1] * self.h);
        let u2 = u * u;
        let u3 = u2 * u;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * u3 - three * u2 + T::one();
        let h10 = u3 - two * u2 + u;
        let h01 = three * u2 - two * u3;
        let h11 = u3 - u2;
        Some(h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1)
    }

    /// Same contract as [`GammaTailQuantile::solve_logs`].
    pub fn solve_logs(&self, ln_y: T, ln_1my: T) -> Result<T> {
        let v = ln_y - ln_1my;
        if let Some(t0) = self.interpolate(v) {
            let (t1, step) = self.direct.polish(ln_y, ln_1my, t0);
            // Quadratic convergence: a step this small leaves an error far
            // below the solver tolerance.
            if t1.is_finite() && step <= T::lit(1e-5) * (T::one() + t1.abs()) {
                return Ok(t1);
            }
        }
        self.direct.solve_logs(ln_y, ln_1my)
    }
}

#[inline]
fn logit_to_logs<T: Real>(v: T) -> (T, T) {
    // ln y = -ln(1 + e^{-v}), ln(1 - y) = -ln(1 + e^{v})
    (-(-v).exp().ln_1p(), -v.exp().ln_1p())
}

/// Fritsch–Carlson limiter: keeps the Hermite interpolant monotone
/// (here decreasing) on every interval.
fn limit_slopes<T: Real>(values: &[T], slopes: &mut [T], h: T) {
    let three = T::lit(3.0);
    for k in 0..values.len() - 1 {
        let secant = (values[k + 1] - values[k]) / h;
        if secant == T::zero() {
            slopes[k] = T::zero();
            slopes[k + 1] = T::zero();
            continue;
        }
        let a = slopes[k] / secant;
        let b = slopes[k + 1] / secant;
        if a < T::zero() {
            slopes[k] = T::zero();
        }
        if b < T::zero() {
            slopes[k + 1] = T::zero();
        }
        let (a, b) = (a.max(T::zero()), b.max(T::zero()));
        let r2 = a * a + b * b;
        if r2 > three * three {
            let tau = three / r2.sqrt();
            slopes[k] = tau * a * secant;
            slopes[k + 1] = tau * b * secant;
        }
    }
}

/// A tail-quantile solver for one shape: direct root finding or a table.
#[derive(Debug, Clone)]
pub enum TailQuantile<T> {
    Direct(GammaTailQuantile<T>),
    Tabulated(Arc<TabulatedTailQuantile<T>>),
}

impl<T: Real> TailQuantile<T> {
    pub fn direct(shape: T) -> Result<Self> {
        Ok(Self::Direct(GammaTailQuantile::new(shape)?))
    }

    pub fn tabulated(shape: T) -> Result<Self> {
        Ok(Self::Tabulated(Arc::new(TabulatedTailQuantile::new(shape)?)))
    }

    pub fn shape(&self) -> T {
        match self {
            Self::Direct(q) => q.shape(),
            Self::Tabulated(q) => q.shape(),
        }
    }

    #[inline]
    pub fn solve_logs(&self, ln_y: T, ln_1my: T) -> Result<T> {
        match self {
            Self::Direct(q) => q.solve_logs(ln_y, ln_1my),
            Self::Tabulated(q) => q.solve_logs(ln_y, ln_1my),
        }
    }
}

/// Thread-safe memo of tabulated solvers keyed by shape.
///
/// A single test evaluates at most two shapes, and a power study reuses the
/// same ones across every replication.
#[derive(Debug, Default)]
pub struct QuantileCache<T> {
    tables: Mutex<HashMap<u64, Arc<TabulatedTailQuantile<T>>>>,
}

impl<T: Real> QuantileCache<T> {
    pub fn new() -> Self {
        Self { tables: Mutex::new(HashMap::new()) }
    }

    pub fn get(&self, shape: T) -> Result<TailQuantile<T>> {
        let key = shape.as_f64().to_bits();
        if let Some(table) = self.tables.lock().unwrap().get(&key) {
            return Ok(TailQuantile::Tabulated(Arc::clone(table)));
        }
        // Built outside the lock; a racing duplicate build is harmless.
        let table = Arc::new(TabulatedTailQuantile::new(shape)?);
        let table = Arc::clone(self.tables.lock().unwrap().entry(key).or_insert(table));
        Ok(TailQuantile::Tabulated(table))
    }

    pub fn len(&self) -> usize {
        self.tables.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
