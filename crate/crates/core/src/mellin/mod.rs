//! Discrete Mellin transform on log-uniform grids.
//!
//! In `u = ln t` the Mellin transform is the Fourier transform, so a log-uniform
//! `t`-grid paired with a centered frequency grid turns `M` into one FFT plus a
//! scaling by `du` and a phase for `u_min`. The pair is normalized so that the
//! inverse undoes the forward map exactly and `|Mf|^2 dx/2pi = |f|^2 du`.

mod section;

use std::sync::Arc;

use num_traits::Float;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Cx, FftReal, Real};

pub use section::{
    apply_op, assemble_op_section, multiplier_section, op_norm_estimate, read_section, semi_commutator_residual,
    singular_decay, write_section, OperatorSection, SectionHeader,
};

/// Largest grid accepted for dense work.
pub const MAX_DENSE_N: usize = 2048;

/// Log-uniform `t`-grid `t_k = exp(u_min + k du)`, `du = (u_max - u_min)/n`, with the
/// dual frequencies `x_j = (j - n/2) dx`, `dx = 2 pi / (n du)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogGrid<T> {
    n: usize,
    u_min: T,
    u_max: T,
}

impl<T: Real> LogGrid<T> {
    pub fn new(n: usize, u_min: T, u_max: T) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !(u_max > u_min) || !u_min.is_finite() || !u_max.is_finite() {
            return Err(Error::InvalidArgument(format!("empty u-range [{u_min}, {u_max}]")));
        }
        Ok(Self { n, u_min, u_max })
    }

    /// Symmetric grid `u in [-half, half]`.
    pub fn symmetric(n: usize, half: T) -> Result<Self> {
        Self::new(n, -half, half)
    }

    /// Widens a symmetric `u`-range by doubling until `|f|` at both ends drops below
    /// `decay` times its largest sampled value, so periodization stays negligible.
    pub fn covering<F: Fn(T) -> Cx<T>>(n: usize, f: F, decay: T, max_half: T) -> Result<Self> {
        let mut half = T::lit(8.0);
        loop {
            let grid = Self::symmetric(n, half)?;
            let peak = grid.t_points().into_iter().map(|t| f(t).norm()).fold(T::zero(), T::max);
            let edge = f(half.neg().exp()).norm().max(f(half.exp()).norm());
            if edge <= decay * peak {
                return Ok(grid);
            }
            if half >= max_half {
                return Err(Error::InvalidArgument(format!(
                    "sample does not decay to {decay:?} of its peak within |u| <= {max_half}"
                )));
            }
            half = (half + half).min(max_half);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn u_min(&self) -> T {
        self.u_min
    }

    pub fn u_max(&self) -> T {
        self.u_max
    }

    pub fn du(&self) -> T {
        (self.u_max - self.u_min) / T::lit(self.n as f64)
    }

    pub fn dx(&self) -> T {
        T::lit(2.0) * T::PI() / (T::lit(self.n as f64) * self.du())
    }

    pub fn u(&self, k: usize) -> T {
        self.u_min + T::lit(k as f64) * self.du()
    }

    pub fn t(&self, k: usize) -> T {
        self.u(k).exp()
    }

    pub fn x(&self, j: usize) -> T {
        T::lit(j as f64 - (self.n / 2) as f64) * self.dx()
    }

    pub fn u_points(&self) -> Vec<T> {
        (0..self.n).map(|k| self.u(k)).collect()
    }

    pub fn t_points(&self) -> Vec<T> {
        (0..self.n).map(|k| self.t(k)).collect()
    }

    pub fn x_freqs(&self) -> Vec<T> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.u_min == other.u_min && self.u_max == other.u_max
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }
}

fn plan<T: FftReal>(n: usize, inverse: bool) -> Arc<dyn Fft<T>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

#[inline]
fn alternating<T: Real>(k: usize) -> T {
    if k.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// `(f(t_k))_k`, which is `(Ef)(u_k)` on the uniform `u`-grid.
pub fn log_sample<T: Real, F: Fn(T) -> Cx<T>>(f: F, grid: &LogGrid<T>) -> Vec<Cx<T>> {
    grid.t_points().into_iter().map(f).collect()
}

/// `(Mf)(x_j) ~ du sum_k f_k e^{-i x_j u_k}`.
pub fn mellin_transform<T: FftReal>(fvec: &[Cx<T>], grid: &LogGrid<T>) -> Result<Vec<Cx<T>>> {
    grid.check_len(fvec.len())?;
    let n = grid.n();
    let mut buf = fvec.to_vec();
    plan::<T>(n, false).process(&mut buf);
    let du = grid.du();
    Ok((0..n)
        .map(|j| {
            let phase = Cx::from_polar(du, -grid.x(j) * grid.u_min());
            buf[(j + n / 2) % n] * phase
        })
        .collect())
}

/// `f_k = (dx/2pi) sum_j F_j e^{i x_j u_k}`, the exact inverse of [`mellin_transform`].
pub fn inverse_mellin<T: FftReal>(fhat: &[Cx<T>], grid: &LogGrid<T>) -> Result<Vec<Cx<T>>> {
    grid.check_len(fhat.len())?;
    let n = grid.n();
    let mut buf: Vec<Cx<T>> = (0..n)
        .map(|j| fhat[j] * Cx::from_polar(T::one(), grid.x(j) * grid.u_min()))
        .collect();
    plan::<T>(n, true).process(&mut buf);
    let scale = grid.dx() / (T::lit(2.0) * T::PI());
    Ok(buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| v * (scale * alternating::<T>(k)))
        .collect())
}

/// `M^{-1} a M f` on the grid.
pub fn apply_multiplier<T: FftReal, A: Fn(T) -> Cx<T>>(a: A, fvec: &[Cx<T>], grid: &LogGrid<T>) -> Result<Vec<Cx<T>>> {
    let mut fhat = mellin_transform(fvec, grid)?;
    for (j, v) in fhat.iter_mut().enumerate() {
        *v = *v * a(grid.x(j));
    }
    inverse_mellin(&fhat, grid)
}

/// Euclidean norm of a sample vector.
pub fn l2<T: Real>(v: &[Cx<T>]) -> T {
    Float::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<T>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    use rand::{Rng, SeedableRng};

    fn gauss(t: f64) -> Cx<f64> {
        Cx::new((-t.ln().powi(2) / 2.0).exp(), 0.0)
    }

    #[test]
    fn grid_validation() {
        assert!(LogGrid::new(6, -1.0, 1.0).is_err());
        assert!(LogGrid::new(12, -1.0, 1.0).is_err());
        assert!(LogGrid::new(16, 1.0, 1.0).is_err());
        let g = LogGrid::new(64, -4.0, 4.0).unwrap();
        assert!((g.du() * g.dx() - 2.0 * PI / 64.0).abs() < 1e-15);
        assert_eq!(g.x(32), 0.0);
        assert_eq!(g.u(0), -4.0);
    }

    #[test]
    fn samples() {
        let g = LogGrid::new(32, -3.0, 3.0).unwrap();
        assert!(log_sample(|_| Cx::new(1.0, 0.0), &g)
            .iter()
            .all(|v| *v == Cx::new(1.0, 0.0)));
        let h = log_sample(|t: f64| Cx::from_polar(1.0, 3.0 * t.ln()), &g);
        for (k, v) in h.iter().enumerate() {
            assert!((v - Cx::from_polar(1.0, 3.0 * g.u(k))).norm() < 1e-13);
        }
    }

    #[test]
    fn gaussian_pair() {
        let g = LogGrid::new(4096, -20.0, 20.0).unwrap();
        let fhat = mellin_transform(&log_sample(gauss, &g), &g).unwrap();
        let exact: Vec<Cx<f64>> = g
            .x_freqs()
            .into_iter()
            .map(|x| Cx::new((2.0 * PI).sqrt() * (-x * x / 2.0).exp(), 0.0))
            .collect();
        let diff: Vec<Cx<f64>> = fhat.iter().zip(&exact).map(|(a, b)| a - b).collect();
        assert!(l2(&diff) / l2(&exact) < 1e-6);
    }

    #[test]
    fn round_trip_and_plancherel() {
        let g = LogGrid::new(256, -7.0, 9.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let f: Vec<Cx<f64>> = (0..256)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let fhat = mellin_transform(&f, &g).unwrap();
        let back = inverse_mellin(&fhat, &g).unwrap();
        assert!(f.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-12));
        let lhs = l2(&fhat) * (g.dx() / (2.0 * PI)).sqrt();
        let rhs = l2(&f) * g.du().sqrt();
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
        assert!(mellin_transform(&f[..10], &g).is_err());
        assert!(inverse_mellin(&f[..10], &g).is_err());
    }

    #[test]
    fn windowed_harmonic_peaks_at_its_frequency() {
        let g = LogGrid::new(1024, -30.0, 30.0).unwrap();
        let xi = 40.0 * g.dx();
        let f = |t: f64| Cx::from_polar((-t.ln().powi(2) / 50.0).exp(), xi * t.ln());
        let fhat = mellin_transform(&log_sample(f, &g), &g).unwrap();
        let peak = (0..1024)
            .max_by(|&a, &b| fhat[a].norm().total_cmp(&fhat[b].norm()))
            .unwrap();
        assert!((g.x(peak) - xi).abs() < 1e-12);
        // Direct trapezoid quadrature in u at three frequencies.
        for j in [peak - 3, peak, peak + 5] {
            let x = g.x(j);
            let q: Cx<f64> = g
                .u_points()
                .into_iter()
                .map(|u| f(u.exp()) * Cx::from_polar(g.du(), -x * u))
                .sum();
            assert!((q - fhat[j]).norm() < 1e-9 * q.norm().max(1.0));
        }
    }

    #[test]
    fn dilation_is_a_grid_shift() {
        // du = ln2/8 makes the multiplier 2^{-ix} an exact shift by eight cells.
        let s = 8usize;
        let du = 2f64.ln() / s as f64;
        let n = 256;
        let g = LogGrid::new(n, -du * n as f64 / 2.0, du * n as f64 / 2.0).unwrap();
        let f = log_sample(gauss, &g);
        let out = apply_multiplier(|x: f64| Cx::from_polar(1.0, -x * 2f64.ln()), &f, &g).unwrap();
        for k in 0..n {
            assert!((out[k] - f[(k + n - s) % n]).norm() < 1e-12);
        }
        // Interior samples agree with f(t/2).
        for (k, v) in out.iter().enumerate().take(3 * n / 4).skip(n / 4) {
            let want = gauss(g.t(k) / 2.0);
            assert!((v - want).norm() <= 1e-6 * want.norm().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn multiplier_identity_and_contraction() {
        let g = LogGrid::new(128, -10.0, 10.0).unwrap();
        let f = log_sample(gauss, &g);
        let same = apply_multiplier(|_| Cx::new(1.0, 0.0), &f, &g).unwrap();
        assert!(f.iter().zip(&same).all(|(a, b)| (a - b).norm() < 1e-14));
        let out = apply_multiplier(|x| Cx::new(crate::regularizer::p_plus(x), 0.0), &f, &g).unwrap();
        assert!(l2(&out) <= l2(&f));
    }

    #[test]
    fn covering_widens_until_decay() {
        let g = LogGrid::covering(256, |t: f64| Cx::new((-t.ln().powi(2) / 50.0).exp(), 0.0), 1e-12, 256.0).unwrap();
        assert!(g.u_max() >= 32.0);
        assert!(LogGrid::covering(64, |_| Cx::new(1.0, 0.0), 1e-12, 64.0).is_err());
    }
}
