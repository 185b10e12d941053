//! Sequential limits of `a(t, .)` as `t -> 0` and `t -> inf`.
//!
//! The fibre values over the ends of `R+` are only reachable through sequences
//! `t_j -> 0` or `t_j -> inf`; a profile probes one such sequence at the
//! deepest scale the scalar type can represent and records whether the
//! sections `a(t_j, .)` still move in `V(R)`.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::XGrid;
use super::norms::{v_norm, x_limits, NormConfig};
use super::Symbol;
use crate::scalar::{cx, Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TSide {
    #[serde(rename = "t->0")]
    Zero,
    #[serde(rename = "t->inf")]
    Infinity,
}

impl std::fmt::Display for TSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TSide::Zero => f.write_str("t->0"),
            TSide::Infinity => f.write_str("t->inf"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProfileConfig<T> {
    /// Ratio between consecutive probes, `t_{j+1} = t_j * ratio^{+-1}`.
    pub ratio: T,
    /// Number of probes (at least 3).
    pub probes: usize,
    /// `|ln t|` of the deepest probe.
    pub depth: T,
    /// The profile counts as converged when the Cauchy defect is below this.
    pub tol: T,
    pub xgrid: XGrid<T>,
    pub norm: NormConfig<T>,
}

impl<T: Real> Default for ProfileConfig<T> {
    fn default() -> Self {
        Self {
            ratio: T::lit(2.0),
            probes: 8,
            depth: T::max_log() * T::lit(0.95),
            tol: T::lit(1e-5),
            xgrid: XGrid::default(),
            norm: NormConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryProfile<T> {
    pub side: TSide,
    /// Probes in order of approach to the boundary.
    pub sample_ts: Vec<T>,
    pub xgrid: Vec<T>,
    pub limit_values: Vec<Cx<T>>,
    /// Limits at `x = -inf, +inf` of the deepest section, when they exist.
    pub corner_values: Option<(Cx<T>, Cx<T>)>,
    /// `max_j ||a(t_j, .) - a(t_{j+1}, .)||_V`.
    pub cauchy_defect: T,
    pub converged: bool,
    /// True when the limit values come from declared `t`-limits.
    pub declared: bool,
}

impl<T: Real> BoundaryProfile<T> {
    /// Smallest modulus over the limit values and corner values.
    pub fn min_modulus(&self) -> T {
        let mut m = self.limit_values.iter().fold(T::infinity(), |m, v| m.min(v.norm()));
        if let Some((a, b)) = self.corner_values {
            m = m.min(a.norm()).min(b.norm());
        }
        m
    }
}

/// Probes `a(t_j, .)` along a geometric sequence `t_j -> side`.
pub fn t_limit_profile<T: Real>(sym: &Symbol<T>, side: TSide, cfg: &ProfileConfig<T>) -> BoundaryProfile<T> {
    let probes = cfg.probes.max(3);
    let step = cfg.ratio.ln().abs();
    let us: Vec<T> = (0..probes)
        .map(|j| cfg.depth - step * T::lit((probes - 1 - j) as f64))
        .collect();
    let sample_ts: Vec<T> = us
        .iter()
        .map(|&u| match side {
            TSide::Zero => (-u).exp(),
            TSide::Infinity => u.exp(),
        })
        .collect();

    let defects: Vec<T> = sample_ts
        .par_windows(2)
        .map(|w| {
            let diff = sym.frozen(w[0]).sub(&sym.frozen(w[1]));
            // A section pair that is not even of bounded variation cannot be Cauchy.
            v_norm(&diff, T::one(), &cfg.norm)
                .map(|v| v.v_norm)
                .unwrap_or(T::infinity())
        })
        .collect();
    let cauchy_defect = defects.into_iter().fold(T::zero(), T::max);

    let xs = cfg.xgrid.points().to_vec();
    let (limit_values, declared) = match sym.declared_tlim() {
        Some(tl) => {
            let f = match side {
                TSide::Zero => tl.at_zero.clone(),
                TSide::Infinity => tl.at_infinity.clone(),
            };
            (xs.iter().map(|&x| f(x)).collect(), true)
        }
        None => {
            let (u1, u2) = (us[probes - 2], us[probes - 1]);
            let (t1, t2) = (sample_ts[probes - 2], sample_ts[probes - 1]);
            // Richardson step for an O(1/|ln t|) approach.
            let vals = xs
                .iter()
                .map(|&x| (sym.eval(t2, x) * cx(u2) - sym.eval(t1, x) * cx(u1)) / cx(u2 - u1))
                .collect();
            (vals, false)
        }
    };

    let corner_values = x_limits(sym, sample_ts[probes - 1], &cfg.norm.limits)
        .ok()
        .map(|l| (l.minus, l.plus));

    BoundaryProfile {
        side,
        sample_ts,
        xgrid: xs,
        limit_values,
        corner_values,
        cauchy_defect,
        converged: cauchy_defect < cfg.tol,
        declared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizer::{p_plus, p_plus_symbol};

    #[test]
    fn t_independent_symbol_converges_to_itself() {
        let a = p_plus_symbol::<f64>();
        let p = t_limit_profile(&a, TSide::Infinity, &ProfileConfig::default());
        assert!(p.converged);
        assert_eq!(p.cauchy_defect, 0.0);
        for (x, v) in p.xgrid.iter().zip(&p.limit_values) {
            assert!((v.re - p_plus(*x)).abs() < 1e-12);
        }
        assert!(p.sample_ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn probes_are_geometric() {
        let a = Symbol::real_constant(1.0f64);
        let p = t_limit_profile(&a, TSide::Zero, &ProfileConfig::default());
        assert!(p.sample_ts.len() >= 3);
        for w in p.sample_ts.windows(2) {
            assert!((w[0] / w[1] - 2.0).abs() < 1e-9);
        }
    }
}
