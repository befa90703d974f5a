//! Piecewise-linear functions on the uniform grid `{0, 1/M, …, 1}`.
//!
//! A [`GridFn`] stores `M + 1` samples and interpolates linearly between
//! them. Integrals are exact for that interpolant (composite trapezoid with
//! interpolated cut points), and the running integral from `0` is cached so
//! any `∫_a^b` costs `O(1)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFn<T> {
    samples: Vec<T>,
    /// `prefix[i] = ∫_0^{i/M} f`.
    prefix: Vec<T>,
}

/// Splits a position in `[0, 1]` into a cell index and the offset inside it.
#[inline]
pub(crate) fn locate<T: Scalar>(x: T, m: usize) -> (usize, T) {
    let x = x.max(T::zero()).min(T::one());
    let p = x * T::from_usize_exact(m);
    let i = p.floor().to_usize().unwrap_or(0).min(m - 1);
    (i, p - T::from_usize_exact(i))
}

impl<T: Scalar> GridFn<T> {
    pub fn from_samples(samples: Vec<T>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(
                "a grid function needs at least two samples".into(),
            ));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid sample".into()));
        }
        let m = samples.len() - 1;
        let half_h = T::lit(0.5) / T::from_usize_exact(m);
        let mut prefix = Vec::with_capacity(samples.len());
        let mut acc = T::zero();
        prefix.push(acc);
        for w in samples.windows(2) {
            acc = acc + half_h * (w[0] + w[1]);
            prefix.push(acc);
        }
        Ok(Self { samples, prefix })
    }

    /// Samples `f` at every grid node.
    pub fn from_fn(m: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let mf = T::from_usize_exact(m.max(1));
        Self::from_samples((0..=m).map(|i| f(T::from_usize_exact(i) / mf)).collect())
    }

    pub fn constant(m: usize, value: T) -> Self {
        Self::from_samples(vec![value; m.max(1) + 1]).expect("constant grid is valid")
    }

    /// Number of cells `M`.
    #[inline]
    pub fn grid_size(&self) -> usize {
        self.samples.len() - 1
    }

    #[inline]
    pub fn step(&self) -> T {
        T::one() / T::from_usize_exact(self.grid_size())
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        T::from_usize_exact(i) / T::from_usize_exact(self.grid_size())
    }

    #[inline]
    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    #[inline]
    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    #[inline]
    pub fn first(&self) -> T {
        self.samples[0]
    }

    #[inline]
    pub fn last(&self) -> T {
        self.samples[self.grid_size()]
    }

    /// Linear interpolation; arguments outside `[0, 1]` are clamped.
    pub fn eval(&self, x: T) -> T {
        let (i, theta) = locate(x, self.grid_size());
        let a = self.samples[i];
        a + theta * (self.samples[i + 1] - a)
    }

    /// `∫_0^a f` for `a` clamped to `[0, 1]`.
    pub fn integral_to(&self, a: T) -> T {
        let m = self.grid_size();
        let (i, theta) = locate(a, m);
        let s0 = self.samples[i];
        let sa = s0 + theta * (self.samples[i + 1] - s0);
        self.prefix[i] + theta * self.step() * (s0 + sa) * T::lit(0.5)
    }

    /// `∫_a^b f`, with limits clamped to `[0, 1]`; negative when `b < a`.
    pub fn integral(&self, a: T, b: T) -> T {
        self.integral_to(b) - self.integral_to(a)
    }

    /// `sup { x ∈ [0,1] : f(x) ≤ v }`, or `None` when `f(0) > v`.
    ///
    /// Assumes `f` is nondecreasing. Flat runs at level `v` resolve to their
    /// right end.
    pub fn generalized_inverse(&self, v: T) -> Option<T> {
        let s = &self.samples;
        let m = self.grid_size();
        if s[0] > v {
            return None;
        }
        if s[m] <= v {
            return Some(T::one());
        }
        // last index with s[i] <= v; s[0] <= v < s[m]
        let i = s.partition_point(|&x| x <= v) - 1;
        let (a, b) = (s[i], s[i + 1]);
        let theta = if b > a { (v - a) / (b - a) } else { T::zero() };
        Some((T::from_usize_exact(i) + theta) / T::from_usize_exact(m))
    }

    /// Largest downward step between consecutive samples (zero when nondecreasing).
    pub fn max_decrease(&self) -> T {
        self.samples
            .windows(2)
            .map(|w| (w[0] - w[1]).max(T::zero()))
            .fold(T::zero(), T::max)
    }

    pub fn is_nondecreasing(&self, tol: T) -> bool {
        self.max_decrease() <= tol
    }

    /// `Σ w_i f_i` over grids of equal size.
    pub fn weighted_sum<'a>(m: usize, terms: impl IntoIterator<Item = (T, &'a GridFn<T>)>) -> Self {
        let mut acc = vec![T::zero(); m + 1];
        for (w, f) in terms {
            debug_assert_eq!(f.grid_size(), m);
            for (a, &s) in acc.iter_mut().zip(f.samples.iter()) {
                *a = *a + w * s;
            }
        }
        Self::from_samples(acc).expect("finite weighted sum")
    }
}
