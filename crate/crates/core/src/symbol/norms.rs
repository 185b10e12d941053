//! `V(R)` norms of `x`-sections and the moduli defining the symbol classes.

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{TGrid, XGrid};
use super::Symbol;
use crate::error::{Error, Result, XSide};
use crate::quad::{integrate_line, integrate_line_with_breaks, integrate_tails, Integral, QuadConfig, TailFailure};
use crate::scalar::{Cx, Real};

/// Settings shared by the norm computations.
#[derive(Debug, Clone)]
pub struct NormConfig<T> {
    pub quad: QuadConfig<T>,
    /// Number of points of the dense sup-norm sampling.
    pub sup_samples: usize,
    /// The sup-norm sampling covers `[-R, R]` with `R` the quadrature reach capped here.
    pub sup_reach_cap: T,
    pub limits: LimitConfig<T>,
}

impl<T: Real> Default for NormConfig<T> {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            sup_samples: 2049,
            sup_reach_cap: T::lit(1e6),
            limits: LimitConfig::default(),
        }
    }
}

impl<T: Real> NormConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            quad: QuadConfig::with_tol(tol),
            ..Self::default()
        }
    }
}

/// Result of a sampled-and-refined supremum. The value is a lower bound of the
/// true supremum; `refinement_gain` is what golden-section search added over
/// the raw samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupRefinement<T> {
    pub value: T,
    /// `None` when the supremum is attained at `x = +-inf`.
    pub argmax: Option<T>,
    pub refinement_gain: T,
}

/// `||a(t, .)||_V` split into its two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VNorm<T> {
    pub t: T,
    pub sup_norm: T,
    pub variation: T,
    pub v_norm: T,
    pub error_bound: T,
    pub sup: SupRefinement<T>,
}

/// `sup_t ||a(t, .)||_V` over a t-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CbNorm<T> {
    pub value: T,
    pub argmax_t: T,
    pub per_t: Vec<VNorm<T>>,
}

fn golden_max<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T, iterations: usize) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Supremum of `f` over `R`, from dense samples on `xs`, golden-section
/// refinement around the three largest local maxima, and the values at
/// infinity supplied in `at_infinity`.
pub fn sup_modulus<T: Real, F: Fn(T) -> T>(f: &F, xs: &[T], at_infinity: &[T]) -> SupRefinement<T> {
    let vals: Vec<T> = xs.iter().map(|&x| f(x)).collect();
    let mut peaks: Vec<usize> = (0..vals.len())
        .filter(|&i| {
            let left = i == 0 || vals[i] >= vals[i - 1];
            let right = i + 1 == vals.len() || vals[i] >= vals[i + 1];
            left && right
        })
        .collect();
    peaks.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap_or(std::cmp::Ordering::Equal));
    peaks.truncate(3);
    let (mut best, mut argmax) = (T::neg_infinity(), None);
    for (i, v) in vals.iter().enumerate() {
        if *v > best {
            best = *v;
            argmax = Some(xs[i]);
        }
    }
    let raw = best;
    for i in peaks {
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(xs.len() - 1)];
        if hi > lo {
            let (x, v) = golden_max(f, lo, hi, 60);
            if v > best {
                best = v;
                argmax = Some(x);
            }
        }
    }
    let refined = best;
    for &v in at_infinity {
        if v >= best {
            best = v;
            argmax = None;
        }
    }
    SupRefinement {
        value: best.max(T::zero()),
        argmax,
        refinement_gain: (refined - raw).max(T::zero()),
    }
}

fn tail_error<T: Real>(t: T, failure: TailFailure<T>) -> Error {
    match failure {
        TailFailure::NotDecreasing { last_increment } => Error::NotBoundedVariation {
            t: t.as_f64(),
            last_increment: last_increment.as_f64(),
        },
        TailFailure::Exhausted { reach } => Error::QuadratureDiverged {
            t: t.as_f64(),
            reach: reach.as_f64(),
        },
    }
}

/// `int_R |d/dx a(t, x)| dx`.
/// Refined local minima of `g` that come close to zero: the places where
/// `|a'|` may have a kink.
fn kink_candidates<T: Real, G: Fn(T) -> T>(g: &G, reach: T) -> Vec<T> {
    let xs = XGrid::sinh(reach, 1025);
    let xs = xs.points();
    let vals: Vec<T> = xs.iter().map(|&x| g(x)).collect();
    let peak = vals.iter().fold(T::zero(), |m, v| m.max(*v));
    if !(peak > T::zero()) || !peak.is_finite() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 1..xs.len() - 1 {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] && vals[i] < peak {
            let (x, v) = golden_max(&|x| -g(x), xs[i - 1], xs[i + 1], 80);
            if -v <= peak * T::lit(1e-3) {
                out.push(x);
            }
        }
        if out.len() >= 256 {
            break;
        }
    }
    out
}

pub(crate) fn variation<T: Real>(sym: &Symbol<T>, t: T, quad: &QuadConfig<T>) -> Result<Integral<T>> {
    let g = |x| sym.dx(t, x).norm();
    let breaks = kink_candidates(&g, T::lit(64.0));
    if breaks.is_empty() {
        integrate_line(&g, quad)
    } else {
        integrate_line_with_breaks(&g, &breaks, quad)
    }
    .map_err(|e| tail_error(t, e))
}

/// `||a(t, .)||_V = ||a(t, .)||_inf + V(a(t, .))`.
pub fn v_norm<T: Real>(sym: &Symbol<T>, t: T, cfg: &NormConfig<T>) -> Result<VNorm<T>> {
    if !(t > T::zero()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let var = variation(sym, t, &cfg.quad)?;
    let reach = var.reach.min(cfg.sup_reach_cap).max(T::lit(16.0));
    let xs = XGrid::sinh(reach, cfg.sup_samples);
    let limits = match sym.declared_xlim(t) {
        Some((m, p)) => vec![m.norm(), p.norm()],
        None => match x_limits(sym, t, &cfg.limits) {
            Ok(l) => vec![l.minus.norm(), l.plus.norm()],
            Err(_) => Vec::new(),
        },
    };
    let sup = sup_modulus(&|x| sym.eval(t, x).norm(), xs.points(), &limits);
    Ok(VNorm {
        t,
        sup_norm: sup.value,
        variation: var.value,
        v_norm: sup.value + var.value,
        error_bound: var.error + sup.refinement_gain,
        sup,
    })
}

/// `sup_t ||a(t, .)||_V` over the grid, with the maximizing `t`.
pub fn cb_norm<T: Real>(sym: &Symbol<T>, tgrid: &TGrid<T>, cfg: &NormConfig<T>) -> Result<CbNorm<T>> {
    let per_t: Vec<VNorm<T>> = tgrid
        .points()
        .par_iter()
        .map(|&t| v_norm(sym, t, cfg))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let best = per_t
        .iter()
        .fold(None::<&VNorm<T>>, |acc, v| match acc {
            Some(b) if b.v_norm >= v.v_norm => Some(b),
            _ => Some(v),
        })
        .expect("t-grid is non-empty");
    Ok(CbNorm {
        value: best.v_norm,
        argmax_t: best.t,
        per_t,
    })
}

/// Sampling used by [`cm_modulus`].
#[derive(Debug, Clone)]
pub struct CmConfig<T> {
    pub xgrid: XGrid<T>,
    /// Refinement stops once doubling the t-sampling changes the value by less than this.
    pub tol: T,
    pub max_t_samples: usize,
}

impl<T: Real> Default for CmConfig<T> {
    fn default() -> Self {
        Self {
            xgrid: XGrid::default(),
            tol: T::lit(1e-9),
            max_t_samples: 129,
        }
    }
}

fn diameter<T: Real>(values: &[Cx<T>]) -> T {
    let mut d = T::zero();
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

/// `cm_r(a) = max { ||a(t, .) - a(tau, .)||_inf : t, tau in [r, 2r] }`, sampled.
pub fn cm_modulus<T: Real>(sym: &Symbol<T>, r: T, cfg: &CmConfig<T>) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let mut previous: Option<T> = None;
    let mut samples = 9usize;
    loop {
        let ts = TGrid::geometric(r, r * T::lit(2.0), samples);
        let per_x: Vec<T> = cfg
            .xgrid
            .points()
            .par_iter()
            .map(|&x| {
                let column: Vec<Cx<T>> = ts.points().iter().map(|&t| sym.eval(t, x)).collect();
                diameter(&column)
            })
            .collect();
        let mut value = per_x.into_iter().fold(T::zero(), T::max);
        if sym.has_declared_xlim() {
            let lims: Vec<(Cx<T>, Cx<T>)> = ts.points().iter().map(|&t| sym.declared_xlim(t).unwrap()).collect();
            let minus: Vec<Cx<T>> = lims.iter().map(|l| l.0).collect();
            let plus: Vec<Cx<T>> = lims.iter().map(|l| l.1).collect();
            value = value.max(diameter(&minus)).max(diameter(&plus));
        }
        if let Some(p) = previous {
            if (value - p).abs() <= cfg.tol * T::one().max(value) || samples >= cfg.max_t_samples {
                return Ok(value);
            }
        }
        previous = Some(value);
        samples = 2 * samples - 1;
    }
}

/// `sup_t ||a(t, .) - a(t, . + h)||_V` over the grid, with the maximizing `t`.
pub fn translate_defect<T: Real>(sym: &Symbol<T>, h: T, tgrid: &TGrid<T>, cfg: &NormConfig<T>) -> Result<(T, T)> {
    if h == T::zero() {
        return Ok((T::zero(), tgrid.points()[0]));
    }
    let diff = sym.sub(&sym.shifted(h));
    let cb = cb_norm(&diff, tgrid, cfg)?;
    Ok((cb.value, cb.argmax_t))
}

/// `sup_t int_{|x| > m} |d/dx a(t, x)| dx` over the grid, with the maximizing `t`.
pub fn tail_variation<T: Real>(sym: &Symbol<T>, m: T, tgrid: &TGrid<T>, quad: &QuadConfig<T>) -> Result<(T, T)> {
    if !(m > T::zero()) {
        return Err(Error::InvalidArgument(format!("m must be positive, got {m}")));
    }
    let per_t: Vec<(T, T)> = tgrid
        .points()
        .par_iter()
        .map(|&t| {
            integrate_tails(&|x| sym.dx(t, x).norm(), m, quad)
                .map(|i| (i.value, t))
                .map_err(|e| tail_error(t, e))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(per_t.into_iter().fold(
        (T::neg_infinity(), T::zero()),
        |acc, v| if v.0 > acc.0 { v } else { acc },
    ))
}

/// Richardson extrapolation of `a(t, +-2^k)`.
#[derive(Debug, Clone, Copy)]
pub struct LimitConfig<T> {
    pub k_start: i32,
    pub k_end: i32,
    pub tol: T,
}

impl<T: Real> Default for LimitConfig<T> {
    fn default() -> Self {
        Self {
            k_start: 2,
            k_end: 48,
            tol: T::lit(1e-10),
        }
    }
}

/// `(a(t, -inf), a(t, +inf))` with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XLimits<T> {
    pub minus: Cx<T>,
    pub plus: Cx<T>,
    pub error: T,
    pub declared: bool,
}

fn extrapolate_side<T: Real>(sym: &Symbol<T>, t: T, side: XSide, cfg: &LimitConfig<T>) -> Result<(Cx<T>, T)> {
    let sign = match side {
        XSide::MinusInf => -T::one(),
        XSide::PlusInf => T::one(),
    };
    let two = T::lit(2.0);
    let at = |k: i32| sym.eval(t, sign * two.powi(k));
    let mut v_prev = at(cfg.k_start);
    let mut r_prev: Option<Cx<T>> = None;
    let mut gap = T::infinity();
    for k in cfg.k_start..cfg.k_end {
        let v_next = at(k + 1);
        // Eliminates an O(1/x) error term.
        let r = v_next * two - v_prev;
        if let Some(rp) = r_prev {
            gap = (r - rp).norm();
            if gap <= cfg.tol * T::one().max(r.norm()) {
                return Ok((r, gap));
            }
        }
        r_prev = Some(r);
        v_prev = v_next;
    }
    Err(Error::NoFiniteLimit {
        t: t.as_f64(),
        side,
        gap: gap.as_f64(),
    })
}

/// Limits of `a(t, .)` at `-inf` and `+inf`: the declared ones when present,
/// otherwise extrapolated from `a(t, +-2^k)`.
pub fn x_limits<T: Real>(sym: &Symbol<T>, t: T, cfg: &LimitConfig<T>) -> Result<XLimits<T>> {
    if let Some((minus, plus)) = sym.declared_xlim(t) {
        return Ok(XLimits {
            minus,
            plus,
            error: T::zero(),
            declared: true,
        });
    }
    let (minus, em) = extrapolate_side(sym, t, XSide::MinusInf, cfg)?;
    let (plus, ep) = extrapolate_side(sym, t, XSide::PlusInf, cfg)?;
    Ok(XLimits {
        minus,
        plus,
        error: em.max(ep),
        declared: false,
    })
}

/// Norms and class-membership defects of a symbol.
#[derive(Debug, Clone, Serialize)]
pub struct VNormReport<T> {
    pub label: String,
    /// Both parts are taken at `argmax_t`, so `v_norm = sup_norm + variation`.
    pub sup_norm: T,
    pub variation: T,
    pub v_norm: T,
    pub argmax_t: T,
    pub per_t: Vec<VNorm<T>>,
    pub cm_values: Vec<(T, T)>,
    pub translate_defect: Vec<(T, T)>,
    pub tail_defect: Vec<(T, T)>,
    pub quadrature_error_bound: T,
}

/// Assembles a [`VNormReport`] over the given parameter ladders.
pub fn v_norm_report<T: Real>(
    sym: &Symbol<T>,
    tgrid: &TGrid<T>,
    rs: &[T],
    hs: &[T],
    ms: &[T],
    cfg: &NormConfig<T>,
) -> Result<VNormReport<T>> {
    let cb = cb_norm(sym, tgrid, cfg)?;
    let at = cb
        .per_t
        .iter()
        .find(|v| v.t == cb.argmax_t)
        .copied()
        .expect("argmax in grid");
    let cm_cfg = CmConfig::default();
    let cm_values = rs
        .iter()
        .map(|&r| cm_modulus(sym, r, &cm_cfg).map(|v| (r, v)))
        .collect::<Result<Vec<_>>>()?;
    let translate = hs
        .iter()
        .map(|&h| translate_defect(sym, h, tgrid, cfg).map(|v| (h, v.0)))
        .collect::<Result<Vec<_>>>()?;
    let tails = ms
        .iter()
        .map(|&m| tail_variation(sym, m, tgrid, &cfg.quad).map(|v| (m, v.0)))
        .collect::<Result<Vec<_>>>()?;
    let quadrature_error_bound = cb.per_t.iter().fold(T::zero(), |acc, v| acc.max(v.error_bound));
    Ok(VNormReport {
        label: sym.label().to_string(),
        sup_norm: at.sup_norm,
        variation: at.variation,
        v_norm: at.v_norm,
        argmax_t: at.t,
        per_t: cb.per_t,
        cm_values,
        translate_defect: translate,
        tail_defect: tails,
        quadrature_error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizer::p_plus_symbol;
    use crate::scalar::cx;
    use std::f64::consts::PI;

    fn tanh_pi() -> Symbol<f64> {
        Symbol::in_x("tanh", |x: f64| cx((PI * x).tanh()))
    }

    #[test]
    fn p_plus_has_v_norm_two() {
        let v = v_norm(&p_plus_symbol::<f64>(), 1.0, &NormConfig::default()).unwrap();
        assert!((v.v_norm - 2.0).abs() < 1e-8, "{v:?}");
        assert_eq!(v.sup.argmax, None);
    }

    #[test]
    fn constant_and_tanh() {
        let c = Symbol::real_constant(1.0);
        assert_eq!(v_norm(&c, 7.0, &NormConfig::default()).unwrap().v_norm, 1.0);
        // tanh has no declared limits here, so the sup comes from extrapolation.
        let v = v_norm(&tanh_pi(), 1.0, &NormConfig::default()).unwrap();
        assert!((v.v_norm - 3.0).abs() < 1e-8, "{v:?}");
    }

    #[test]
    fn sin_x_is_not_of_bounded_variation() {
        let s = Symbol::in_x("sin x", |x: f64| cx(x.sin()));
        assert!(matches!(
            v_norm(&s, 1.0, &NormConfig::default()),
            Err(Error::NotBoundedVariation { .. })
        ));
    }

    #[test]
    fn interior_maximum_is_refined() {
        // |exp(-(x-0.3)^2)| peaks at 0.3 with value 1; variation is 2.
        let s = Symbol::in_x("bump", |x: f64| cx((-(x - 0.3) * (x - 0.3)).exp()));
        let v = v_norm(&s, 1.0, &NormConfig::default()).unwrap();
        assert!((v.sup_norm - 1.0).abs() < 1e-12);
        assert!((v.sup.argmax.unwrap() - 0.3).abs() < 1e-5);
        assert!((v.variation - 2.0).abs() < 1e-8);
    }

    #[test]
    fn translation_leaves_norm_unchanged() {
        let a = p_plus_symbol::<f64>();
        let base = v_norm(&a, 1.0, &NormConfig::default()).unwrap().v_norm;
        for h in [-3.0, -0.4, 0.25, 1.7, 5.0] {
            let shifted = v_norm(&a.shifted(h), 1.0, &NormConfig::default()).unwrap().v_norm;
            assert!((shifted - base).abs() < 1e-8);
        }
    }

    #[test]
    fn adding_a_constant_keeps_variation() {
        let a = p_plus_symbol::<f64>();
        let b = a.add(&Symbol::real_constant(-0.75));
        let (va, vb) = (
            v_norm(&a, 1.0, &NormConfig::default()).unwrap(),
            v_norm(&b, 1.0, &NormConfig::default()).unwrap(),
        );
        assert!((va.variation - vb.variation).abs() < 1e-10);
        assert!(vb.sup_norm <= va.sup_norm + 0.75 + 1e-12);
    }

    #[test]
    fn limits_of_tanh_and_arctan() {
        let l = x_limits(&tanh_pi(), 1.0, &LimitConfig::default()).unwrap();
        assert!((l.minus.re + 1.0).abs() < 1e-12 && (l.plus.re - 1.0).abs() < 1e-12);
        let atan = Symbol::in_x("atan", |x: f64| cx(x.atan()));
        let l = x_limits(&atan, 1.0, &LimitConfig::default()).unwrap();
        assert!((l.plus.re - PI / 2.0).abs() < 1e-9, "{l:?}");
        let sin = Symbol::in_x("sin", |x: f64| cx(x.sin()));
        assert!(matches!(
            x_limits(&sin, 1.0, &LimitConfig::default()),
            Err(Error::NoFiniteLimit { .. })
        ));
    }

    #[test]
    fn cm_of_t_independent_symbol_is_zero() {
        assert_eq!(
            cm_modulus(&p_plus_symbol::<f64>(), 3.0, &CmConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn tail_variation_is_monotone() {
        let tg = TGrid::dyadic(0, 0);
        let mut prev = f64::INFINITY;
        for m in [0.1, 0.5, 1.0, 2.0, 4.0] {
            let (v, _) = tail_variation(&p_plus_symbol::<f64>(), m, &tg, &QuadConfig::default()).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }
}
