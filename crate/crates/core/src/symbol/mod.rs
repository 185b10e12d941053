//! Symbols `a(t, x)` on `R+ x R` and the quantities the symbol classes are built from.
//!
//! A [`Symbol`] is an immutable bundle of closures: the values, optionally the
//! analytic `x`-derivative, optionally the limits at `x = -inf, +inf`, and
//! optionally the limits as `t -> 0` and `t -> inf`. Symbols compiled from the
//! expression language also keep their expression tree so that derived
//! symbols can be printed back.

mod boundary;
mod classify;
mod grid;
mod inverse;
mod norms;

use std::fmt;
use std::sync::Arc;

use crate::dsl::Expr;
use crate::scalar::{cone, cx, Cx, Real};

pub use boundary::{t_limit_profile, BoundaryProfile, ProfileConfig, TSide};
pub use classify::{classify, trend_of, ClassifyConfig, Condition, Membership, Trend, Verdict};
pub use grid::{TGrid, XGrid};
pub use inverse::{inverse_closedness_suite, reciprocal, InequalityCheck, InverseClosednessReport, InverseConfig};
pub use norms::{
    cb_norm, cm_modulus, sup_modulus, tail_variation, translate_defect, v_norm, v_norm_report, x_limits, CbNorm,
    CmConfig, LimitConfig, NormConfig, SupRefinement, VNorm, VNormReport, XLimits,
};

type Values<T> = dyn Fn(T, T) -> Cx<T> + Send + Sync;
type Limits<T> = dyn Fn(T) -> (Cx<T>, Cx<T>) + Send + Sync;
type Section<T> = dyn Fn(T) -> Cx<T> + Send + Sync;

/// Expression-language provenance of a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSource {
    pub expr: Expr,
    /// Limits at `x = -inf` and `x = +inf` as expressions in `t`, when known.
    pub xlim: Option<(Expr, Expr)>,
}

/// Declared limits of a symbol as `t -> 0` and `t -> inf`, as functions of `x`.
#[derive(Clone)]
pub struct TLimits<T> {
    pub at_zero: Arc<Section<T>>,
    pub at_infinity: Arc<Section<T>>,
}

/// A function `a(t, x)` on `R+ x R` with complex values.
///
/// Cloning is cheap; all closures are shared.
#[derive(Clone)]
pub struct Symbol<T> {
    values: Arc<Values<T>>,
    dx: Option<Arc<Values<T>>>,
    xlim: Option<Arc<Limits<T>>>,
    tlim: Option<TLimits<T>>,
    label: String,
    source: Option<Arc<SymbolSource>>,
}

impl<T> fmt::Debug for Symbol<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("label", &self.label)
            .field("analytic_dx", &self.dx.is_some())
            .field("declared_xlim", &self.xlim.is_some())
            .field("declared_tlim", &self.tlim.is_some())
            .finish()
    }
}

/// Step of the central-difference fallback for `d/dx`, before scaling by `1 + |x|`.
pub const DIFF_STEP: f64 = 1e-5;

impl<T: Real> Symbol<T> {
    pub fn new<F>(label: impl Into<String>, values: F) -> Self
    where
        F: Fn(T, T) -> Cx<T> + Send + Sync + 'static,
    {
        Self {
            values: Arc::new(values),
            dx: None,
            xlim: None,
            tlim: None,
            label: label.into(),
            source: None,
        }
    }

    /// Symbol depending on `x` only.
    pub fn in_x<F>(label: impl Into<String>, values: F) -> Self
    where
        F: Fn(T) -> Cx<T> + Send + Sync + 'static,
    {
        Self::new(label, move |_t, x| values(x))
    }

    /// Symbol depending on `t` only; its `x`-derivative vanishes and its
    /// limits at `x = +-inf` are its values.
    pub fn in_t<F>(label: impl Into<String>, values: F) -> Self
    where
        F: Fn(T) -> Cx<T> + Send + Sync + 'static,
    {
        let values = Arc::new(values);
        let v = values.clone();
        let l = values.clone();
        Self::new(label, move |t, _x| v(t))
            .with_dx(|_t, _x| cx(T::zero()))
            .with_xlim(move |t| {
                let a = l(t);
                (a, a)
            })
    }

    pub fn constant(c: Cx<T>) -> Self {
        Self::new(format!("{c}"), move |_t, _x| c)
            .with_dx(|_t, _x| cx(T::zero()))
            .with_xlim(move |_t| (c, c))
            .with_tlim(move |_x| c, move |_x| c)
    }

    pub fn real_constant(c: T) -> Self {
        Self::constant(cx(c))
    }

    pub fn with_dx<F>(mut self, dx: F) -> Self
    where
        F: Fn(T, T) -> Cx<T> + Send + Sync + 'static,
    {
        self.dx = Some(Arc::new(dx));
        self
    }

    pub fn with_xlim<F>(mut self, xlim: F) -> Self
    where
        F: Fn(T) -> (Cx<T>, Cx<T>) + Send + Sync + 'static,
    {
        self.xlim = Some(Arc::new(xlim));
        self
    }

    pub fn with_tlim<F, G>(mut self, at_zero: F, at_infinity: G) -> Self
    where
        F: Fn(T) -> Cx<T> + Send + Sync + 'static,
        G: Fn(T) -> Cx<T> + Send + Sync + 'static,
    {
        self.tlim = Some(TLimits {
            at_zero: Arc::new(at_zero),
            at_infinity: Arc::new(at_infinity),
        });
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_source(mut self, source: SymbolSource) -> Self {
        self.source = Some(Arc::new(source));
        self
    }

    #[cfg(test)]
    pub(crate) fn without_dx(mut self) -> Self {
        self.dx = None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> Option<&SymbolSource> {
        self.source.as_deref()
    }

    #[inline]
    pub fn eval(&self, t: T, x: T) -> Cx<T> {
        (self.values)(t, x)
    }

    pub fn has_analytic_dx(&self) -> bool {
        self.dx.is_some()
    }

    /// `d/dx a(t, x)`: the analytic derivative when present, otherwise a
    /// central difference with step `1e-5 (1 + |x|)`.
    #[inline]
    pub fn dx(&self, t: T, x: T) -> Cx<T> {
        match &self.dx {
            Some(d) => d(t, x),
            None => central_difference(&*self.values, t, x),
        }
    }

    /// Declared limits `(a(t, -inf), a(t, +inf))`, if the symbol carries them.
    pub fn declared_xlim(&self, t: T) -> Option<(Cx<T>, Cx<T>)> {
        self.xlim.as_ref().map(|l| l(t))
    }

    pub fn has_declared_xlim(&self) -> bool {
        self.xlim.is_some()
    }

    pub fn declared_tlim(&self) -> Option<&TLimits<T>> {
        self.tlim.as_ref()
    }

    /// The translate `a^h(t, x) = a(t, x + h)`.
    pub fn shifted(&self, h: T) -> Self {
        let v = self.values.clone();
        let mut out = Self::new(format!("{}(x+{h})", self.label), move |t, x| v(t, x + h));
        if let Some(d) = self.dx.clone() {
            out = out.with_dx(move |t, x| d(t, x + h));
        }
        out.xlim = self.xlim.clone();
        out
    }

    /// The `x`-section `a(t0, .)` as a `t`-independent symbol.
    pub fn frozen(&self, t0: T) -> Self {
        let v = self.values.clone();
        let mut out = Self::new(format!("{}|t={t0}", self.label), move |_t, x| v(t0, x));
        if let Some(d) = self.dx.clone() {
            out = out.with_dx(move |_t, x| d(t0, x));
        }
        if let Some(l) = self.xlim.clone() {
            out = out.with_xlim(move |_t| l(t0));
        }
        out
    }

    pub fn scaled(&self, lambda: Cx<T>) -> Self {
        self.mul(&Symbol::constant(lambda))
    }

    pub fn add(&self, other: &Self) -> Self {
        algebra_add(self, other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        algebra_add(self, &other.scaled(-cone::<T>())).with_label(format!("({}) - ({})", self.label, other.label))
    }

    pub fn mul(&self, other: &Self) -> Self {
        algebra_mul(self, other)
    }

    /// Pointwise `1/a` with derivative `-a'/a^2`; no invertibility check.
    pub(crate) fn recip_unchecked(&self) -> Self {
        let v = self.values.clone();
        let mut out = Self::new(format!("1/({})", self.label), move |t, x| v(t, x).inv());
        if let Some(d) = self.dx.clone() {
            let v = self.values.clone();
            out = out.with_dx(move |t, x| {
                let a = v(t, x);
                -d(t, x) / (a * a)
            });
        }
        if let Some(l) = self.xlim.clone() {
            out = out.with_xlim(move |t| {
                let (m, p) = l(t);
                (m.inv(), p.inv())
            });
        }
        if let Some(tl) = self.tlim.clone() {
            let z = tl.at_zero.clone();
            let i = tl.at_infinity.clone();
            out = out.with_tlim(move |x| z(x).inv(), move |x| i(x).inv());
        }
        if let Some(src) = &self.source {
            out = out.with_source(SymbolSource {
                expr: Expr::recip(src.expr.clone()),
                xlim: src
                    .xlim
                    .as_ref()
                    .map(|(m, p)| (Expr::recip(m.clone()), Expr::recip(p.clone()))),
            });
        }
        out
    }
}

fn central_difference<T: Real>(f: &Values<T>, t: T, x: T) -> Cx<T> {
    let h = T::lit(DIFF_STEP) * (T::one() + x.abs());
    (f(t, x + h) - f(t, x - h)) / cx(h + h)
}

fn combine_tlim<T: Real>(
    a: &Option<TLimits<T>>,
    b: &Option<TLimits<T>>,
    op: fn(Cx<T>, Cx<T>) -> Cx<T>,
) -> Option<TLimits<T>> {
    let (a, b) = (a.as_ref()?, b.as_ref()?);
    let (az, bz) = (a.at_zero.clone(), b.at_zero.clone());
    let (ai, bi) = (a.at_infinity.clone(), b.at_infinity.clone());
    Some(TLimits {
        at_zero: Arc::new(move |x| op(az(x), bz(x))),
        at_infinity: Arc::new(move |x| op(ai(x), bi(x))),
    })
}

fn combine_source<T: Real>(a: &Symbol<T>, b: &Symbol<T>, op: fn(Expr, Expr) -> Expr) -> Option<SymbolSource> {
    let (sa, sb) = (a.source.as_ref()?, b.source.as_ref()?);
    let xlim = match (&sa.xlim, &sb.xlim) {
        (Some((am, ap)), Some((bm, bp))) => Some((op(am.clone(), bm.clone()), op(ap.clone(), bp.clone()))),
        _ => None,
    };
    Some(SymbolSource {
        expr: op(sa.expr.clone(), sb.expr.clone()),
        xlim,
    })
}

/// Pointwise sum; the derivative and limits are summed when both operands carry them.
pub fn algebra_add<T: Real>(a: &Symbol<T>, b: &Symbol<T>) -> Symbol<T> {
    let (va, vb) = (a.values.clone(), b.values.clone());
    let mut out = Symbol::new(format!("({}) + ({})", a.label, b.label), move |t, x| {
        va(t, x) + vb(t, x)
    });
    if let (Some(da), Some(db)) = (a.dx.clone(), b.dx.clone()) {
        out = out.with_dx(move |t, x| da(t, x) + db(t, x));
    }
    if let (Some(la), Some(lb)) = (a.xlim.clone(), b.xlim.clone()) {
        out = out.with_xlim(move |t| {
            let (am, ap) = la(t);
            let (bm, bp) = lb(t);
            (am + bm, ap + bp)
        });
    }
    out.tlim = combine_tlim(&a.tlim, &b.tlim, |p, q| p + q);
    out.source = combine_source(a, b, Expr::sum).map(Arc::new);
    out
}

/// Pointwise product with the product rule for the derivative.
pub fn algebra_mul<T: Real>(a: &Symbol<T>, b: &Symbol<T>) -> Symbol<T> {
    let (va, vb) = (a.values.clone(), b.values.clone());
    let mut out = Symbol::new(format!("({})*({})", a.label, b.label), move |t, x| va(t, x) * vb(t, x));
    if let (Some(da), Some(db)) = (a.dx.clone(), b.dx.clone()) {
        let (va, vb) = (a.values.clone(), b.values.clone());
        out = out.with_dx(move |t, x| da(t, x) * vb(t, x) + va(t, x) * db(t, x));
    }
    if let (Some(la), Some(lb)) = (a.xlim.clone(), b.xlim.clone()) {
        out = out.with_xlim(move |t| {
            let (am, ap) = la(t);
            let (bm, bp) = lb(t);
            (am * bm, ap * bp)
        });
    }
    out.tlim = combine_tlim(&a.tlim, &b.tlim, |p, q| p * q);
    out.source = combine_source(a, b, Expr::product).map(Arc::new);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizer::{p_minus_symbol, p_plus_symbol};

    fn tanh_pi() -> Symbol<f64> {
        Symbol::in_x("tanh(pi x)", |x: f64| cx((std::f64::consts::PI * x).tanh()))
    }

    #[test]
    fn p_plus_plus_p_minus_is_one() {
        let s = algebra_add(&p_plus_symbol::<f64>(), &p_minus_symbol());
        for k in -50..=50 {
            let x = k as f64 * 0.37;
            assert!((s.eval(1.0, x) - cone()).norm() < 1e-15);
            assert!(s.dx(1.0, x).norm() < 1e-15);
        }
        let (m, p) = s.declared_xlim(3.0).unwrap();
        assert_eq!((m.re, p.re), (1.0, 1.0));
    }

    #[test]
    fn unit_is_multiplicative_identity() {
        let a = p_plus_symbol::<f64>();
        let one = Symbol::real_constant(1.0);
        let prod = algebra_mul(&one, &a);
        for k in -20..=20 {
            let (t, x) = (2f64.powi(k), k as f64 * 0.21);
            assert_eq!(prod.eval(t, x), a.eval(t, x));
        }
    }

    #[test]
    fn tanh_squared_matches_direct_evaluation() {
        let sq = algebra_mul(&tanh_pi(), &tanh_pi());
        for k in 0..100 {
            let x = -5.0 + 0.1 * k as f64;
            let direct = (std::f64::consts::PI * x).tanh().powi(2);
            assert!((sq.eval(1.0, x).re - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn fallback_derivative_tracks_analytic_one() {
        let a = p_plus_symbol::<f64>();
        let numeric = a.clone().without_dx();
        for k in -30..=30 {
            let x = k as f64 * 0.1;
            let exact = a.dx(1.0, x);
            assert!((numeric.dx(1.0, x) - exact).norm() <= 1e-8 * exact.norm().max(1e-3));
        }
    }

    #[test]
    fn shift_and_freeze() {
        let a = Symbol::new("tx", |t: f64, x: f64| cx(t * x));
        assert_eq!(a.shifted(0.5).eval(2.0, 1.0).re, 3.0);
        assert_eq!(a.frozen(3.0).eval(100.0, 2.0).re, 6.0);
    }
}
