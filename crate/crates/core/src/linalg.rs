//! Dense complex matrices, the power-iteration norm estimate and singular values.
//!
//! Singular values come from a Householder reduction to bidiagonal form followed
//! by Sturm-count bisection on the Golub-Kahan tridiagonal matrix, whose
//! eigenvalues are `+-sigma_i`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{cx, Cx, Real};

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![cx(T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cx(T::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn<F: Fn(usize, usize) -> Cx<T> + Sync>(rows: usize, cols: usize, f: F) -> Self {
        let mut data = vec![cx(T::zero()); rows * cols];
        data.par_chunks_mut(cols.max(1)).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        });
        Self { rows, cols, data }
    }

    pub fn diagonal(d: &[Cx<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Cx<T>] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::GridMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { data, ..*self })
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self {
            data: self.data.iter().map(|v| v * s).collect(),
            ..*self
        }
    }

    /// `self * other`, parallel over output rows.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::GridMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (n, m) = (self.rows, other.cols);
        let mut data = vec![cx(T::zero()); n * m];
        data.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, out)| {
            for (k, a) in self.row(i).iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(other.row(k)) {
                    *o = *o + a * b;
                }
            }
        });
        Ok(Self { rows: n, cols: m, data })
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .into_par_iter()
            .map(|i| self.row(i).iter().zip(v).fold(cx(T::zero()), |acc, (a, b)| acc + a * b))
            .collect())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt()
    }
}

fn vec_norm<T: Real>(v: &[Cx<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Settings of the power iteration.
#[derive(Debug, Clone, Copy)]
pub struct PowerConfig<T> {
    pub tol: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for PowerConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_iterations: 20_000,
        }
    }
}

/// Largest singular value by power iteration on `A^H A`.
pub fn power_norm<T: Real>(a: &CMatrix<T>, cfg: &PowerConfig<T>) -> Result<T> {
    let n = a.cols();
    if n == 0 || a.rows() == 0 {
        return Ok(T::zero());
    }
    let ah = a.adjoint();
    // Deterministic start with components in every direction.
    let mut v: Vec<Cx<T>> = (0..n)
        .map(|i| {
            let s = T::lit(((i as f64 + 1.0) * 0.618_033_988_749_895).fract() + 0.5);
            Cx::new(s, T::lit(0.3) * s)
        })
        .collect();
    let nv = vec_norm(&v);
    v.iter_mut().for_each(|z| *z = *z / cx(nv));
    let mut lambda = T::zero();
    let mut gap = T::infinity();
    for _ in 0..cfg.max_iterations {
        let w = ah.mul_vec(&a.mul_vec(&v)?)?;
        let next = vec_norm(&w);
        if next == T::zero() {
            return Ok(T::zero());
        }
        gap = (next - lambda).abs();
        lambda = next;
        v = w.into_iter().map(|z| z / cx(next)).collect();
        if gap <= cfg.tol * lambda {
            return Ok(lambda.sqrt());
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        gap: (gap / lambda).as_f64(),
    })
}

/// Complex Householder vector `v` with `(I - 2 v v^H / v^H v) x = alpha e_1`; returns `(v, v^H v)`.
fn householder<T: Real>(x: &[Cx<T>]) -> Option<(Vec<Cx<T>>, T)> {
    let norm = vec_norm(x);
    if norm == T::zero() {
        return None;
    }
    let x0 = x[0];
    let phase = if x0.norm() == T::zero() {
        cx(T::one())
    } else {
        x0 / cx(x0.norm())
    };
    let alpha = -phase * cx(norm);
    let mut v = x.to_vec();
    v[0] = v[0] - alpha;
    let vv = v.iter().map(|z| z.norm_sqr()).sum::<T>();
    if vv == T::zero() {
        return None;
    }
    Some((v, vv))
}

/// Moduli of the diagonal and superdiagonal of a bidiagonal form of `a` (rows >= cols).
fn bidiagonalize<T: Real>(mut a: CMatrix<T>) -> (Vec<T>, Vec<T>) {
    let (m, n) = (a.rows(), a.cols());
    let two = T::lit(2.0);
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n.saturating_sub(1)];
    for k in 0..n {
        // Left reflector on column k, rows k..m.
        let col: Vec<Cx<T>> = (k..m).map(|i| a.get(i, k)).collect();
        if let Some((v, vv)) = householder(&col) {
            let tau = cx(two / vv);
            let cols = n - k;
            let w: Vec<Cx<T>> = (0..cols)
                .into_par_iter()
                .map(|jj| {
                    let j = k + jj;
                    v.iter()
                        .enumerate()
                        .fold(cx(T::zero()), |acc, (ii, vi)| acc + vi.conj() * a.get(k + ii, j))
                })
                .collect();
            let cols_total = a.cols;
            a.data[k * cols_total..]
                .par_chunks_mut(cols_total)
                .zip(v.par_iter())
                .for_each(|(row, vi)| {
                    let f = tau * vi;
                    for (jj, wj) in w.iter().enumerate() {
                        row[k + jj] = row[k + jj] - f * wj;
                    }
                });
        }
        d[k] = a.get(k, k).norm();
        if k + 1 < n {
            // Right reflector on row k, columns k+1..n.
            let row: Vec<Cx<T>> = (k + 1..n).map(|j| a.get(k, j).conj()).collect();
            if let Some((u, uu)) = householder(&row) {
                let tau = cx(two / uu);
                let cols_total = a.cols;
                a.data[k * cols_total..].par_chunks_mut(cols_total).for_each(|r| {
                    let s = u
                        .iter()
                        .enumerate()
                        .fold(cx(T::zero()), |acc, (jj, uj)| acc + r[k + 1 + jj] * uj);
                    let f = tau * s;
                    for (jj, uj) in u.iter().enumerate() {
                        r[k + 1 + jj] = r[k + 1 + jj] - f * uj.conj();
                    }
                });
            }
            e[k] = a.get(k, k + 1).norm();
        }
    }
    (d, e)
}

/// Number of eigenvalues below `lambda` of the symmetric tridiagonal matrix with
/// zero diagonal and off-diagonal `b`.
fn sturm_count<T: Real>(b: &[T], lambda: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    // A vanishing pivot is replaced by a tiny negative one and counted as such.
    let guard = |q: T| if q.abs() < tiny { -tiny } else { q };
    let mut q = guard(-lambda);
    let mut count = usize::from(q < T::zero());
    for &bi in b {
        q = guard(-lambda - bi * bi / q);
        count += usize::from(q < T::zero());
    }
    count
}

/// All singular values, descending.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    let owned = if a.rows() >= a.cols() { a.clone() } else { a.adjoint() };
    let n = owned.cols();
    if n == 0 {
        return Vec::new();
    }
    let (d, e) = bidiagonalize(owned);
    // Golub-Kahan off-diagonal: d1, e1, d2, e2, ..., dn.
    let mut b = Vec::with_capacity(2 * n - 1);
    for i in 0..n {
        b.push(d[i]);
        if i + 1 < n {
            b.push(e[i]);
        }
    }
    let bound = b.iter().fold(T::zero(), |m, v| m.max(*v)) * T::lit(2.0);
    let dim = 2 * n;
    let eps = T::epsilon();
    let mut sigma: Vec<T> = (1..=n)
        .into_par_iter()
        .map(|k| {
            // k-th largest eigenvalue: the point where fewer than k eigenvalues lie above.
            let (mut lo, mut hi) = (T::zero(), bound);
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                if mid <= lo || mid >= hi || hi - lo <= eps * bound {
                    break;
                }
                if dim - sturm_count(&b, mid) >= k {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) / T::lit(2.0)
        })
        .collect();
    sigma.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    #[test]
    fn identity_and_rank_one() {
        let id = CMatrix::<f64>::identity(16);
        assert!(singular_values(&id).iter().all(|s| (s - 1.0).abs() < 1e-14));
        assert!((power_norm(&id, &PowerConfig::default()).unwrap() - 1.0).abs() < 1e-12);
        let u: Vec<Cx<f64>> = (0..12).map(|i| c(i as f64 + 1.0, 0.5)).collect();
        let w: Vec<Cx<f64>> = (0..12).map(|j| c(0.2, -(j as f64))).collect();
        let r1 = CMatrix::from_fn(12, 12, |i, j| u[i] * w[j].conj());
        let s = singular_values(&r1);
        assert!((s[0] - vec_norm(&u) * vec_norm(&w)).abs() < 1e-10 * s[0]);
        assert!(s[1] <= 1e-12 * s[0].max(1.0), "{s:?}");
    }

    #[test]
    fn diagonal_singular_values_are_sorted_moduli() {
        let d = [c(3.0, 4.0), c(-1.0, 0.0), c(0.0, 0.25), c(2.0, 0.0)];
        let s = singular_values(&CMatrix::diagonal(&d));
        let expected = [5.0, 2.0, 1.0, 0.25];
        for (a, b) in s.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rectangular_and_zero() {
        let a = CMatrix::from_fn(3, 5, |i, j| if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) });
        let s = singular_values(&a);
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|v| (v - 2.0).abs() < 1e-14));
        assert_eq!(
            power_norm(&CMatrix::<f64>::zeros(4, 4), &PowerConfig::default()).unwrap(),
            0.0
        );
    }

    proptest! {
        #[test]
        fn singular_values_match_frobenius_and_power_norm(seed in 0u64..1000, n in 2usize..24) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = CMatrix::from_vec(n, n, (0..n * n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).unwrap();
            let s = singular_values(&a);
            let fro2: f64 = s.iter().map(|v| v * v).sum();
            prop_assert!((fro2 - a.frobenius().powi(2)).abs() < 1e-10 * fro2);
            let p = power_norm(&a, &PowerConfig { tol: 1e-13, max_iterations: 200_000 }).unwrap();
            prop_assert!((p - s[0]).abs() < 1e-5 * s[0]);
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
