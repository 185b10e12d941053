//! `A+-`, the boundary constant `C` and the search for a radius `r` with `|a|` bounded away from zero on `T_r`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, XSide};
use crate::scalar::Real;
use crate::symbol::{
    t_limit_profile, x_limits, BoundaryProfile, LimitConfig, ProfileConfig, Symbol, TGrid, TSide, XGrid,
};

/// `A+- = sup_t 1/|a(t, +-inf)|` over a t-grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct APm<T> {
    pub a_minus: T,
    pub a_plus: T,
    pub argmax_minus: T,
    pub argmax_plus: T,
}

pub fn estimate_a_pm<T: Real>(sym: &Symbol<T>, tgrid: &TGrid<T>, limits: &LimitConfig<T>, floor: T) -> Result<APm<T>> {
    let per_t: Vec<Result<(T, T, T)>> = tgrid
        .points()
        .par_iter()
        .map(|&t| {
            let l = x_limits(sym, t, limits)?;
            for (side, v) in [(XSide::MinusInf, l.minus), (XSide::PlusInf, l.plus)] {
                if !(v.norm() >= floor) {
                    return Err(Error::DegenerateAtInfinity {
                        t: t.as_f64(),
                        side,
                        modulus: v.norm().as_f64(),
                    });
                }
            }
            Ok((t, l.minus.norm().recip(), l.plus.norm().recip()))
        })
        .collect();
    let mut out = APm {
        a_minus: T::zero(),
        a_plus: T::zero(),
        argmax_minus: tgrid.points()[0],
        argmax_plus: tgrid.points()[0],
    };
    for r in per_t {
        let (t, m, p) = r?;
        if m > out.a_minus {
            out.a_minus = m;
            out.argmax_minus = t;
        }
        if p > out.a_plus {
            out.a_plus = p;
            out.argmax_plus = t;
        }
    }
    Ok(out)
}

/// Settings of the regularizer construction.
#[derive(Debug, Clone)]
pub struct RegularizerConfig<T> {
    pub tgrid: TGrid<T>,
    pub xgrid: XGrid<T>,
    pub profile: ProfileConfig<T>,
    pub limits: LimitConfig<T>,
    /// Radii `2^k`, `k = 1..=ladder_max`.
    pub ladder_max: i32,
    /// Moduli below this count as zeros.
    pub floor: T,
    /// Use extrapolated boundary values even when a profile did not converge.
    pub allow_nonconverged: bool,
}

impl<T: Real> Default for RegularizerConfig<T> {
    fn default() -> Self {
        Self {
            tgrid: TGrid::default(),
            xgrid: XGrid::default(),
            profile: ProfileConfig::default(),
            limits: LimitConfig::default(),
            ladder_max: 20,
            floor: T::lit(1e-6),
            allow_nonconverged: false,
        }
    }
}

/// Estimate of `C = min |a|` over the fibres at `t = 0` and `t = inf`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryConstant<T> {
    pub c: T,
    pub profiles: Vec<BoundaryProfile<T>>,
}

pub fn estimate_c<T: Real>(sym: &Symbol<T>, cfg: &RegularizerConfig<T>) -> Result<BoundaryConstant<T>> {
    let profiles: Vec<BoundaryProfile<T>> = [TSide::Zero, TSide::Infinity]
        .into_iter()
        .map(|side| t_limit_profile(sym, side, &cfg.profile))
        .collect();
    if !cfg.allow_nonconverged {
        if let Some(p) = profiles.iter().find(|p| !p.converged) {
            return Err(Error::BoundaryNotVerified(format!(
                "the profile toward {} did not converge (Cauchy defect {:e}); pass the override to use it anyway",
                p.side,
                p.cauchy_defect.as_f64()
            )));
        }
    }
    let c = profiles.iter().fold(T::infinity(), |m, p| m.min(p.min_modulus()));
    Ok(BoundaryConstant { c, profiles })
}

/// Outcome of the radius search.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusSearch<T> {
    pub r: T,
    /// `A(r) = sup_{T_r x R} 1/|a|`
    pub a_of_r: T,
    pub c: T,
    /// `(r, inf_{T_r x R} |a|)` for every rung tried.
    pub ladder: Vec<(T, T)>,
}

/// `|ln t|` levels sampled on `T_r`: fine steps near the ladder, then geometric to the profile depth.
fn u_levels<T: Real>(cfg: &RegularizerConfig<T>) -> Vec<T> {
    let ln2 = T::LN_2();
    let mut us: Vec<T> = (1..=cfg.ladder_max).map(|k| ln2 * T::lit(k as f64)).collect();
    let fine_end = T::lit(16.0).max(ln2 * T::lit(cfg.ladder_max as f64));
    let mut u = ln2;
    while u < fine_end {
        us.push(u);
        u = u + T::lit(0.05);
    }
    let depth = cfg.profile.depth.max(fine_end);
    let steps = 48;
    let ratio = (depth / fine_end).ln() / T::lit(steps as f64);
    for j in 0..=steps {
        us.push(fine_end * (ratio * T::lit(j as f64)).exp());
    }
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();
    us
}

/// Sampled `min |a(t, .)|` over the x-grid and `x = +-inf`.
pub(crate) fn section_min<T: Real>(sym: &Symbol<T>, t: T, xgrid: &XGrid<T>, limits: &LimitConfig<T>) -> T {
    let mut m = xgrid
        .points()
        .iter()
        .fold(T::infinity(), |m, &x| m.min(sym.eval(t, x).norm()));
    if let Ok(l) = x_limits(sym, t, limits) {
        m = m.min(l.minus.norm()).min(l.plus.norm());
    }
    if m.is_nan() {
        T::zero()
    } else {
        m
    }
}

/// Smallest `r = 2^k` with sampled `inf_{T_r x R} |a| > C/2`.
pub fn find_r<T: Real>(sym: &Symbol<T>, cfg: &RegularizerConfig<T>) -> Result<RadiusSearch<T>> {
    let c = estimate_c(sym, cfg)?.c;
    let us = u_levels(cfg);
    let mins: Vec<T> = us
        .par_iter()
        .map(|&u| {
            section_min(sym, u.exp(), &cfg.xgrid, &cfg.limits).min(section_min(
                sym,
                (-u).exp(),
                &cfg.xgrid,
                &cfg.limits,
            ))
        })
        .collect();
    // suffix[i] = min over levels i.. of the section minima
    let mut suffix = mins.clone();
    for i in (0..suffix.len().saturating_sub(1)).rev() {
        suffix[i] = suffix[i].min(suffix[i + 1]);
    }
    let threshold = c / T::lit(2.0);
    let mut ladder = Vec::new();
    for k in 1..=cfg.ladder_max {
        let r = T::lit(2.0).powi(k);
        let ln_r = r.ln();
        let i = us.partition_point(|&u| u < ln_r * (T::one() - T::lit(1e-12)));
        let inf = suffix.get(i).copied().unwrap_or(T::infinity());
        ladder.push((r, inf));
        if inf > threshold && inf >= cfg.floor {
            return Ok(RadiusSearch {
                r,
                a_of_r: inf.recip(),
                c,
                ladder,
            });
        }
    }
    let (best_r, best_inf) =
        ladder.iter().copied().fold(
            (T::nan(), T::neg_infinity()),
            |acc, v| if v.1 > acc.1 { v } else { acc },
        );
    Err(Error::NoBoundedAwayRadius {
        best_inf: best_inf.as_f64(),
        best_r: best_r.as_f64(),
        threshold: threshold.as_f64(),
    })
}

/// `sup_{T_r x R} 1/|a|` for a given radius.
pub fn a_of_r<T: Real>(sym: &Symbol<T>, r: T, cfg: &RegularizerConfig<T>) -> T {
    let ln_r = r.ln();
    let inf = u_levels(cfg)
        .into_iter()
        .filter(|&u| u > ln_r)
        .chain(std::iter::once(ln_r))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&u| {
            section_min(sym, u.exp(), &cfg.xgrid, &cfg.limits).min(section_min(
                sym,
                (-u).exp(),
                &cfg.xgrid,
                &cfg.limits,
            ))
        })
        .reduce(|| T::infinity(), T::min);
    inf.recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse, to_symbol};

    fn sym(src: &str) -> Symbol<f64> {
        to_symbol(&parse(src).unwrap())
    }

    #[test]
    fn a_pm_of_two_plus_pplus() {
        let a = estimate_a_pm(
            &sym("2 + pplus(x)"),
            &TGrid::dyadic(-4, 4),
            &LimitConfig::default(),
            1e-6,
        )
        .unwrap();
        assert_eq!((a.a_minus, a.a_plus), (0.5, 1.0 / 3.0));
        let c = estimate_a_pm(&sym("2"), &TGrid::dyadic(-4, 4), &LimitConfig::default(), 1e-6).unwrap();
        assert_eq!((c.a_minus, c.a_plus), (0.5, 0.5));
    }

    #[test]
    fn degenerate_limit_is_named() {
        match estimate_a_pm(&sym("pplus(x)"), &TGrid::dyadic(0, 1), &LimitConfig::default(), 1e-6) {
            Err(Error::DegenerateAtInfinity { side, .. }) => assert_eq!(side, XSide::MinusInf),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn radius_of_constant_one() {
        let s = find_r(&sym("1"), &RegularizerConfig::default()).unwrap();
        assert_eq!((s.r, s.a_of_r, s.c), (2.0, 1.0, 1.0));
    }

    #[test]
    fn interior_zero_defeats_the_search() {
        let cfg = RegularizerConfig {
            allow_nonconverged: true,
            ..RegularizerConfig::default()
        };
        assert!(matches!(
            find_r(&sym("tanh(pi*x)"), &cfg),
            Err(Error::NoBoundedAwayRadius { .. })
        ));
    }

    #[test]
    fn gaussian_bump_in_log_t() {
        let a = sym("1 + 0.5*pplus(x)*exp(-ln(t)^2)");
        let s = find_r(&a, &RegularizerConfig::default()).unwrap();
        // Oracle: a >= 1 everywhere with equality at x = -inf, and C = 1.
        assert_eq!(s.r, 2.0);
        assert!((s.c - 1.0).abs() < 1e-12);
        assert!((s.a_of_r - 1.0).abs() < 1e-12);
    }
}
