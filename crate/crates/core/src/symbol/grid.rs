use crate::error::{Error, Result};
use crate::scalar::Real;

/// Probe points in `t`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid<T> {
    points: Vec<T>,
}

impl<T: Real> TGrid<T> {
    pub fn new(mut points: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("t-grid must not be empty".into()));
        }
        if points.iter().any(|t| !(*t > T::zero()) || !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "t-grid points must be finite and positive".into(),
            ));
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Ok(Self { points })
    }

    /// `t = 2^k` for `k` in `kmin..=kmax`.
    pub fn dyadic(kmin: i32, kmax: i32) -> Self {
        let two = T::lit(2.0);
        let points = (kmin.min(kmax)..=kmax.max(kmin)).map(|k| two.powi(k)).collect();
        Self { points }
    }

    /// `count` points geometrically spaced from `lo` to `hi` inclusive.
    pub fn geometric(lo: T, hi: T, count: usize) -> Self {
        let count = count.max(2);
        let (ulo, uhi) = (lo.ln(), hi.ln());
        let step = (uhi - ulo) / T::lit((count - 1) as f64);
        let points = (0..count).map(|j| (ulo + step * T::lit(j as f64)).exp()).collect();
        Self { points }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Union with another grid.
    pub fn merged(&self, other: &Self) -> Self {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        points.dedup();
        Self { points }
    }
}

impl<T: Real> Default for TGrid<T> {
    fn default() -> Self {
        Self::dyadic(-20, 20)
    }
}

/// Probe points in `x`, symmetric and clustered at the origin (`x = sinh(s)`, `s` uniform).
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid<T> {
    points: Vec<T>,
}

impl<T: Real> XGrid<T> {
    pub fn sinh(reach: T, count: usize) -> Self {
        let count = count.max(3) | 1;
        let smax = reach.asinh();
        let half = (count / 2) as f64;
        let points = (0..count)
            .map(|j| (smax * T::lit((j as f64 - half) / half)).sinh())
            .collect();
        Self { points }
    }

    pub fn uniform(lo: T, hi: T, count: usize) -> Self {
        let count = count.max(2);
        let step = (hi - lo) / T::lit((count - 1) as f64);
        Self {
            points: (0..count).map(|j| lo + step * T::lit(j as f64)).collect(),
        }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }
}

impl<T: Real> Default for XGrid<T> {
    fn default() -> Self {
        Self::sinh(T::lit(64.0), 257)
    }
}
