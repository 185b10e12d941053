//! Pointwise inversion and the inequalities that make the symbol classes inverse closed.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{TGrid, XGrid};
use super::norms::{
    cb_norm, cm_modulus, sup_modulus, tail_variation, translate_defect, v_norm, x_limits, CmConfig, NormConfig,
};
use super::Symbol;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct InverseConfig<T> {
    pub tgrid: TGrid<T>,
    pub xgrid: XGrid<T>,
    /// Sampled `|a|` below this is treated as a zero.
    pub floor: T,
    /// Slack allowed when comparing a measured quantity with its bound.
    pub tol: T,
    pub norm: NormConfig<T>,
}

impl<T: Real> Default for InverseConfig<T> {
    fn default() -> Self {
        Self {
            tgrid: TGrid::default(),
            xgrid: XGrid::default(),
            floor: T::lit(1e-6),
            tol: T::lit(1e-6),
            norm: NormConfig::default(),
        }
    }
}

/// One measured-versus-bound comparison.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck<T> {
    pub name: String,
    pub parameter: Option<T>,
    pub measured: T,
    pub bound: T,
    pub holds: bool,
}

impl<T: Real> InequalityCheck<T> {
    pub fn new(name: impl Into<String>, parameter: Option<T>, measured: T, bound: T, tol: T) -> Self {
        Self {
            name: name.into(),
            parameter,
            measured,
            bound,
            holds: measured <= bound + tol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseClosednessReport<T> {
    /// Sampled `inf |a|` over the probe set, including the values at `x = +-inf`.
    pub inf_modulus: T,
    /// `||a^{-1}||_{C_b(R+ x R)} = 1 / inf |a|`.
    pub inverse_sup: T,
    pub a_cb_norm: T,
    pub inverse_cb_norm: T,
    /// `||a^{-1}||_inf^2 * ||a||_{C_b(V)}`.
    pub bound: T,
    pub holds: bool,
    pub checks: Vec<InequalityCheck<T>>,
}

/// Sampled `sup |1/a|` over `tgrid x (xgrid + {+-inf})`, failing at the first
/// point where `|a|` drops below the floor.
pub(crate) fn sampled_inverse_sup<T: Real>(
    sym: &Symbol<T>,
    tgrid: &TGrid<T>,
    xgrid: &XGrid<T>,
    floor: T,
    cfg: &NormConfig<T>,
) -> Result<T> {
    let per_t: Vec<Result<T>> = tgrid
        .points()
        .par_iter()
        .map(|&t| {
            let mut at_inf = Vec::new();
            if let Ok(l) = x_limits(sym, t, &cfg.limits) {
                for (x, v) in [(f64::NEG_INFINITY, l.minus), (f64::INFINITY, l.plus)] {
                    if v.norm() < floor {
                        return Err(Error::NotInvertible {
                            t: t.as_f64(),
                            x,
                            modulus: v.norm().as_f64(),
                            floor: floor.as_f64(),
                        });
                    }
                    at_inf.push(v.norm().recip());
                }
            }
            for &x in xgrid.points() {
                let m = sym.eval(t, x).norm();
                if m < floor {
                    return Err(Error::NotInvertible {
                        t: t.as_f64(),
                        x: x.as_f64(),
                        modulus: m.as_f64(),
                        floor: floor.as_f64(),
                    });
                }
            }
            let sup = sup_modulus(&|x| sym.eval(t, x).norm().recip(), xgrid.points(), &at_inf);
            if sup.value.recip() < floor {
                return Err(Error::NotInvertible {
                    t: t.as_f64(),
                    x: sup.argmax.map(|x| x.as_f64()).unwrap_or(f64::INFINITY),
                    modulus: sup.value.recip().as_f64(),
                    floor: floor.as_f64(),
                });
            }
            Ok(sup.value)
        })
        .collect();
    let mut best = T::zero();
    for r in per_t {
        best = best.max(r?);
    }
    Ok(best)
}

/// `1/a` with `d/dx (1/a) = -a'/a^2` and limits `1/a(t, +-inf)`, together with
/// the measured `||a^{-1}||_{C_b(V)}` against `||a^{-1}||_inf^2 ||a||_{C_b(V)}`
/// (and the per-`t` version of the same inequality).
pub fn reciprocal<T: Real>(sym: &Symbol<T>, cfg: &InverseConfig<T>) -> Result<(Symbol<T>, InverseClosednessReport<T>)> {
    let inverse_sup = sampled_inverse_sup(sym, &cfg.tgrid, &cfg.xgrid, cfg.floor, &cfg.norm)?;
    let inv = sym.recip_unchecked().with_label(format!("1/({})", sym.label()));
    let a_cb = cb_norm(sym, &cfg.tgrid, &cfg.norm)?;
    let inv_cb = cb_norm(&inv, &cfg.tgrid, &cfg.norm)?;
    let factor = inverse_sup * inverse_sup;
    let bound = factor * a_cb.value;
    let mut checks: Vec<InequalityCheck<T>> = a_cb
        .per_t
        .iter()
        .zip(&inv_cb.per_t)
        .map(|(a, i)| InequalityCheck::new("pointwise-in-t", Some(a.t), i.v_norm, factor * a.v_norm, cfg.tol))
        .collect();
    checks.push(InequalityCheck::new("sup-over-t", None, inv_cb.value, bound, cfg.tol));
    let holds = checks.iter().all(|c| c.holds);
    let report = InverseClosednessReport {
        inf_modulus: inverse_sup.recip(),
        inverse_sup,
        a_cb_norm: a_cb.value,
        inverse_cb_norm: inv_cb.value,
        bound,
        holds,
        checks,
    };
    Ok((inv, report))
}

/// The remaining inverse-closedness inequalities: continuity in `t`, the
/// oscillation modulus, the translation defect and the derivative tails of
/// `1/a`, each against its bound in terms of `a`.
pub fn inverse_closedness_suite<T: Real>(
    sym: &Symbol<T>,
    cfg: &InverseConfig<T>,
    rs: &[T],
    hs: &[T],
    ms: &[T],
) -> Result<InverseClosednessReport<T>> {
    let (inv, mut report) = reciprocal(sym, cfg)?;
    let k2 = report.inverse_sup * report.inverse_sup;
    let k4 = k2 * k2;
    let a_cb = report.a_cb_norm;
    let tol = cfg.tol;

    let pairs: Vec<(T, T)> = cfg.tgrid.points().windows(2).map(|w| (w[0], w[1])).collect();
    let continuity: Vec<Result<Vec<InequalityCheck<T>>>> = pairs
        .par_iter()
        .map(|&(t, tau)| {
            let lhs = v_norm(&inv.frozen(t).sub(&inv.frozen(tau)), T::one(), &cfg.norm)?.v_norm;
            let da = v_norm(&sym.frozen(t).sub(&sym.frozen(tau)), T::one(), &cfg.norm)?.v_norm;
            let it = v_norm(&inv, t, &cfg.norm)?.v_norm;
            let itau = v_norm(&inv, tau, &cfg.norm)?.v_norm;
            Ok(vec![
                InequalityCheck::new("t-continuity (product form)", Some(t), lhs, it * itau * da, tol),
                InequalityCheck::new("t-continuity (uniform form)", Some(t), lhs, k4 * a_cb * a_cb * da, tol),
            ])
        })
        .collect();
    for c in continuity {
        report.checks.extend(c?);
    }

    let cm_cfg = CmConfig::default();
    for &r in rs {
        let lhs = cm_modulus(&inv, r, &cm_cfg)?;
        let rhs = k2 * cm_modulus(sym, r, &cm_cfg)?;
        report
            .checks
            .push(InequalityCheck::new("oscillation modulus", Some(r), lhs, rhs, tol));
    }
    for &h in hs {
        let (lhs, _) = translate_defect(&inv, h, &cfg.tgrid, &cfg.norm)?;
        let (da, _) = translate_defect(sym, h, &cfg.tgrid, &cfg.norm)?;
        report.checks.push(InequalityCheck::new(
            "translation defect",
            Some(h),
            lhs,
            k4 * a_cb * a_cb * da,
            tol,
        ));
    }
    for &m in ms {
        let (lhs, _) = tail_variation(&inv, m, &cfg.tgrid, &cfg.norm.quad)?;
        let (rhs, _) = tail_variation(sym, m, &cfg.tgrid, &cfg.norm.quad)?;
        report
            .checks
            .push(InequalityCheck::new("derivative tails", Some(m), lhs, k2 * rhs, tol));
    }
    report.holds = report.checks.iter().all(|c| c.holds);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizer::p_plus_symbol;
    use crate::scalar::cx;

    fn small_cfg() -> InverseConfig<f64> {
        InverseConfig {
            tgrid: TGrid::dyadic(-3, 3),
            ..InverseConfig::default()
        }
    }

    #[test]
    fn constant_two() {
        let (inv, rep) = reciprocal(&Symbol::real_constant(2.0), &small_cfg()).unwrap();
        assert_eq!(inv.eval(5.0, 1.0), cx(0.5));
        assert!((rep.inverse_cb_norm - 0.5).abs() < 1e-15);
        assert!((rep.bound - 0.5).abs() < 1e-15);
        assert!(rep.holds);
    }

    #[test]
    fn two_plus_p_plus() {
        let a = Symbol::real_constant(2.0).add(&p_plus_symbol());
        let (inv, rep) = reciprocal(&a, &small_cfg()).unwrap();
        // sup 1/2, variation 1/2 - 1/3.
        assert!(
            (rep.inverse_cb_norm - (0.5 + 1.0 / 6.0)).abs() < 1e-8,
            "{}",
            rep.inverse_cb_norm
        );
        assert!((rep.bound - 1.0).abs() < 1e-8);
        assert!(rep.holds);
        let (m, p) = inv.declared_xlim(1.0).unwrap();
        assert!((m.re - 0.5).abs() < 1e-15 && (p.re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn p_plus_is_not_invertible() {
        let err = reciprocal(&p_plus_symbol::<f64>(), &small_cfg()).unwrap_err();
        match err {
            Error::NotInvertible { x, .. } => assert_eq!(x, f64::NEG_INFINITY),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_suite_on_t_dependent_symbol() {
        let a = Symbol::new("2+p+ e^{-ln^2 t}", |t: f64, x: f64| {
            cx(2.0 + crate::regularizer::p_plus(x) * (-t.ln().powi(2)).exp())
        });
        let rep = inverse_closedness_suite(&a, &small_cfg(), &[0.5, 2.0], &[0.1], &[1.0]).unwrap();
        assert!(
            rep.holds,
            "{:#?}",
            rep.checks.iter().filter(|c| !c.holds).collect::<Vec<_>>()
        );
    }
}
