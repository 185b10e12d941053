//! Finite sections of `Op(a)` and the norm and singular-value probes on them.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{alternating, mellin_transform, plan, LogGrid, MAX_DENSE_N};
use crate::error::{Error, Result};
use crate::linalg::{power_norm, singular_values, CMatrix, PowerConfig};
use crate::scalar::{cone, Cx, FftReal, Real};
use crate::symbol::Symbol;

/// `n x n` matrix acting on samples `(f(t_k))_k` like `Op(a)`.
#[derive(Debug, Clone)]
pub struct OperatorSection<T> {
    pub grid: LogGrid<T>,
    pub entries: CMatrix<T>,
    pub symbol_label: String,
}

impl<T: Real> OperatorSection<T> {
    pub fn identity(grid: LogGrid<T>) -> Self {
        Self {
            entries: CMatrix::identity(grid.n()),
            grid,
            symbol_label: "1".into(),
        }
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "n={} u=[{}, {}] vs n={} u=[{}, {}]",
                self.grid.n(),
                self.grid.u_min(),
                self.grid.u_max(),
                other.grid.n(),
                other.grid.u_min(),
                other.grid.u_max()
            )));
        }
        Ok(())
    }

    /// `self * other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            entries: self.entries.matmul(&other.entries)?,
            symbol_label: format!("Op({}) Op({})", self.symbol_label, other.symbol_label),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            entries: self.entries.sub(&other.entries)?,
            symbol_label: format!("{} - {}", self.symbol_label, other.symbol_label),
        })
    }

    pub fn minus_identity(&self) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.n() {
            entries.set(i, i, entries.get(i, i) - cone());
        }
        Self {
            grid: self.grid,
            entries,
            symbol_label: format!("{} - I", self.symbol_label),
        }
    }

    pub fn apply(&self, fvec: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
        self.entries.mul_vec(fvec)
    }
}

fn check_dense<T: Real>(grid: &LogGrid<T>) -> Result<()> {
    if grid.n() > MAX_DENSE_N {
        return Err(Error::InvalidArgument(format!(
            "dense sections are capped at n={MAX_DENSE_N}, got {}",
            grid.n()
        )));
    }
    Ok(())
}

/// Rows `M_{k,m} = w_k((k - m) mod n)` with `w_k(d) = (1/n) sum_j row(k, j) e^{2 pi i (j - n/2) d / n}`.
fn section_from_rows<T, R>(grid: &LogGrid<T>, row: R, label: String) -> OperatorSection<T>
where
    T: FftReal,
    R: Fn(usize, &mut [Cx<T>]) + Sync,
{
    let n = grid.n();
    let fft = plan::<T>(n, true);
    let inv_n = T::lit(1.0 / n as f64);
    let mut data = vec![Cx::new(T::zero(), T::zero()); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(k, out)| {
        let mut buf = vec![Cx::new(T::zero(), T::zero()); n];
        row(k, &mut buf);
        fft.process(&mut buf);
        for (m, v) in out.iter_mut().enumerate() {
            let d = (k + n - m) % n;
            *v = buf[d] * (inv_n * alternating::<T>(d));
        }
    });
    OperatorSection {
        grid: *grid,
        entries: CMatrix::from_vec(n, n, data).expect("n*n entries"),
        symbol_label: label,
    }
}

/// Matrix of `f -> M^{-1} a M f`.
pub fn multiplier_section<T: FftReal, A: Fn(T) -> Cx<T> + Sync>(
    a: A,
    grid: &LogGrid<T>,
    label: &str,
) -> Result<OperatorSection<T>> {
    check_dense(grid)?;
    let xs = grid.x_freqs();
    let values: Vec<Cx<T>> = xs.iter().map(|&x| a(x)).collect();
    Ok(section_from_rows(
        grid,
        |_, buf| buf.copy_from_slice(&values),
        label.to_string(),
    ))
}

/// Left quantization in `u = ln t`: row `k` applies the multiplier `a(t_k, .)`
/// and keeps only the output sample at `u_k`.
pub fn assemble_op_section<T: FftReal>(sym: &Symbol<T>, grid: &LogGrid<T>) -> Result<OperatorSection<T>> {
    check_dense(grid)?;
    let xs = grid.x_freqs();
    Ok(section_from_rows(
        grid,
        |k, buf| {
            let t = grid.t(k);
            for (v, &x) in buf.iter_mut().zip(&xs) {
                *v = sym.eval(t, x);
            }
        },
        sym.label().to_string(),
    ))
}

/// `Op(a) f` on the grid without forming the matrix.
pub fn apply_op<T: FftReal>(sym: &Symbol<T>, fvec: &[Cx<T>], grid: &LogGrid<T>) -> Result<Vec<Cx<T>>> {
    let fhat = mellin_transform(fvec, grid)?;
    let xs = grid.x_freqs();
    let scale = grid.dx() / (T::lit(2.0) * T::PI());
    Ok((0..grid.n())
        .into_par_iter()
        .map(|k| {
            let (t, u) = (grid.t(k), grid.u(k));
            let s = xs
                .iter()
                .zip(&fhat)
                .fold(Cx::new(T::zero(), T::zero()), |acc, (&x, f)| {
                    acc + sym.eval(t, x) * f * Cx::from_polar(T::one(), x * u)
                });
            s * scale
        })
        .collect())
}

/// Largest singular value by power iteration, tolerance `1e-8`.
pub fn op_norm_estimate<T: Real>(sec: &OperatorSection<T>) -> Result<T> {
    power_norm(&sec.entries, &PowerConfig::default())
}

/// Leading `k_max` singular values, descending.
pub fn singular_decay<T: Real>(sec: &OperatorSection<T>, k_max: usize) -> Result<Vec<T>> {
    if k_max > sec.n() {
        return Err(Error::InvalidArgument(format!("k_max={k_max} exceeds n={}", sec.n())));
    }
    let mut s = singular_values(&sec.entries);
    s.truncate(k_max);
    Ok(s)
}

/// `Op(a) Op(b) - Op(ab)` on the grid.
pub fn semi_commutator_residual<T: FftReal>(
    a: &Symbol<T>,
    b: &Symbol<T>,
    grid: &LogGrid<T>,
) -> Result<OperatorSection<T>> {
    let sa = assemble_op_section(a, grid)?;
    let sb = assemble_op_section(b, grid)?;
    let sab = assemble_op_section(&a.mul(b), grid)?;
    let mut r = sa.compose(&sb)?.sub(&sab)?;
    r.symbol_label = format!("Op({})Op({}) - Op(ab)", a.label(), b.label());
    Ok(r)
}

/// First line of an exported section file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SectionHeader {
    pub n: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub symbol_label: String,
    pub format: String,
}

const SECTION_FORMAT: &str = "row-major complex f64 little-endian (re, im)";

/// JSON header line, then `n*n` little-endian `(re, im)` f64 pairs in row-major order.
pub fn write_section<T: Real, W: Write>(sec: &OperatorSection<T>, mut w: W) -> Result<()> {
    let header = SectionHeader {
        n: sec.n(),
        u_min: sec.grid.u_min().as_f64(),
        u_max: sec.grid.u_max().as_f64(),
        symbol_label: sec.symbol_label.clone(),
        format: SECTION_FORMAT.into(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::SymbolFile(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut bytes = Vec::with_capacity(sec.n() * sec.n() * 16);
    for v in sec.entries.data() {
        bytes.extend_from_slice(&v.re.as_f64().to_le_bytes());
        bytes.extend_from_slice(&v.im.as_f64().to_le_bytes());
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_section<T: Real, R: BufRead>(mut r: R) -> Result<OperatorSection<T>> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SectionHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::SymbolFile(format!("section header: {e}")))?;
    if header.format != SECTION_FORMAT {
        return Err(Error::SymbolFile(format!("unknown section format {:?}", header.format)));
    }
    let grid = LogGrid::new(header.n, T::lit(header.u_min), T::lit(header.u_max))?;
    let count = header.n * header.n;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 16 {
        return Err(Error::LengthMismatch {
            expected: count * 16,
            got: bytes.len(),
        });
    }
    let f = |c: &[u8]| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes")));
    let data = bytes
        .chunks_exact(16)
        .map(|c| Cx::new(f(&c[..8]), f(&c[8..])))
        .collect();
    Ok(OperatorSection {
        grid,
        entries: CMatrix::from_vec(header.n, header.n, data)?,
        symbol_label: header.symbol_label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mellin::{apply_multiplier, log_sample};
    use crate::regularizer::p_plus;

    fn c(re: f64) -> Cx<f64> {
        Cx::new(re, 0.0)
    }

    fn grid(n: usize) -> LogGrid<f64> {
        LogGrid::new(n, -16.0, 16.0).unwrap()
    }

    #[test]
    fn t_independent_section_is_the_multiplier() {
        let g = grid(64);
        let a = |x: f64| Cx::new(2.0 + p_plus(x), 0.3 * x.tanh());
        let sym = Symbol::in_x("m", a);
        let sec = assemble_op_section(&sym, &g).unwrap();
        let mult = multiplier_section(a, &g, "m").unwrap();
        assert!(sec.entries.sub(&mult.entries).unwrap().max_abs() < 1e-12);
        // Column j of the multiplier matrix is the multiplier applied to e_j.
        for j in [0, 17, 63] {
            let mut e = vec![c(0.0); 64];
            e[j] = c(1.0);
            let col = apply_multiplier(a, &e, &g).unwrap();
            for (k, v) in col.iter().enumerate() {
                assert!((v - mult.entries.get(k, j)).norm() < 1e-12);
            }
        }
        // Normal, with singular values |a(x_k)|.
        let ah = mult.entries.adjoint();
        let comm = mult
            .entries
            .matmul(&ah)
            .unwrap()
            .sub(&ah.matmul(&mult.entries).unwrap())
            .unwrap();
        assert!(comm.max_abs() < 1e-12);
        let mut want: Vec<f64> = g.x_freqs().into_iter().map(|x| a(x).norm()).collect();
        want.sort_by(|x, y| y.total_cmp(x));
        for (s, w) in singular_decay(&mult, 64).unwrap().iter().zip(&want) {
            assert!((s - w).abs() < 1e-12);
        }
    }

    #[test]
    fn x_independent_section_is_diagonal() {
        let g = grid(64);
        let phi = |t: f64| c(1.0 + (-t.ln().powi(2) / 4.0).exp());
        let sec = assemble_op_section(&Symbol::in_t("phi", phi), &g).unwrap();
        let diag = CMatrix::diagonal(&log_sample(phi, &g));
        assert!(sec.entries.sub(&diag).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn product_symbol_section_and_apply() {
        let g = grid(128);
        let phi = |t: f64| (-t.ln().powi(2) / 20.0).exp();
        let sym = Symbol::new("phi p+", move |t, x| c(phi(t) * p_plus(x)));
        let sec = assemble_op_section(&sym, &g).unwrap();
        let mult = multiplier_section(|x| c(p_plus(x)), &g, "p+").unwrap();
        let d = CMatrix::diagonal(&log_sample(|t| c(phi(t)), &g));
        assert!(sec.entries.sub(&d.matmul(&mult.entries).unwrap()).unwrap().max_abs() < 1e-12);
        let f = log_sample(|t: f64| Cx::from_polar((-t.ln().powi(2) / 8.0).exp(), t.ln()), &g);
        let direct = apply_op(&sym, &f, &g).unwrap();
        for (a, b) in direct.iter().zip(sec.apply(&f).unwrap()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn norms_and_decay_probes() {
        let g = grid(32);
        let id = OperatorSection::identity(g);
        assert!((op_norm_estimate(&id).unwrap() - 1.0).abs() < 1e-12);
        assert!(singular_decay(&id, 32).unwrap().iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(singular_decay(&id, 33).is_err());
        let g = LogGrid::new(32, -100.0, 100.0).unwrap();
        let mult = multiplier_section(|x| c(p_plus(x)), &g, "p+").unwrap();
        let sup = g.x_freqs().into_iter().map(p_plus).fold(0.0, f64::max);
        let norm = op_norm_estimate(&mult).unwrap();
        assert!(norm < 1.0 && (norm - sup).abs() < 1e-6, "{norm} {sup}");
    }

    #[test]
    fn semi_commutator_with_constant_vanishes() {
        let g = grid(64);
        let a = Symbol::new("a", |t: f64, x: f64| c(2.0 + p_plus(x) * (-t.ln().powi(2) / 9.0).exp()));
        let two = Symbol::real_constant(2.0);
        for (l, r) in [(&a, &two), (&two, &a)] {
            assert!(semi_commutator_residual(l, r, &g).unwrap().entries.max_abs() < 1e-10);
        }
        let b = Symbol::in_x("b", |x: f64| c(1.0 / (1.0 + x * x)));
        let m = Symbol::in_x("m", |x: f64| c(p_plus(x)));
        assert!(semi_commutator_residual(&b, &m, &g).unwrap().entries.max_abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = OperatorSection::identity(grid(16));
        let b = OperatorSection::identity(LogGrid::new(16, -8.0, 8.0).unwrap());
        assert!(matches!(a.compose(&b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn export_round_trip() {
        let g = grid(16);
        let sec = assemble_op_section(&Symbol::new("a", |t: f64, x: f64| Cx::new(t.ln().sin(), x)), &g).unwrap();
        let mut buf = Vec::new();
        write_section(&sec, &mut buf).unwrap();
        let back: OperatorSection<f64> = read_section(&buf[..]).unwrap();
        assert_eq!(back.entries, sec.entries);
        assert_eq!(back.symbol_label, "a");
        assert!(back.grid.same_as(&g));
        assert!(read_section::<f64, _>(&buf[..buf.len() - 3]).is_err());
    }
}
