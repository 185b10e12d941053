//! The transition functions `p+-` and the interpolation data on `[1/r, r]`.

use std::sync::Arc;

use serde::Serialize;

use crate::dsl::{to_symbol, Expr, Func};
use crate::error::{Error, Result, XSide};
use crate::scalar::{cx, Cx, Real};
use crate::symbol::{x_limits, LimitConfig, Symbol};

/// Which of the two transition functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PSign {
    Minus,
    Plus,
}

/// `p+(x) = (1 + tanh(pi x))/2`, evaluated as `1/(1 + e^{-2 pi x})`.
#[inline]
pub fn p_plus<T: Real>(x: T) -> T {
    (T::one() + (-(T::PI() + T::PI()) * x).exp()).recip()
}

/// `p-(x) = (1 - tanh(pi x))/2 = p+(-x)`.
#[inline]
pub fn p_minus<T: Real>(x: T) -> T {
    p_plus(-x)
}

pub fn transition_p<T: Real>(sign: PSign, x: T) -> T {
    match sign {
        PSign::Plus => p_plus(x),
        PSign::Minus => p_minus(x),
    }
}

/// `p+-'(x) = +-2 pi p+(x) p-(x) = +-pi / (2 cosh^2(pi x))`.
#[inline]
pub fn transition_dp<T: Real>(sign: PSign, x: T) -> T {
    let v = (T::PI() + T::PI()) * p_plus(x) * p_minus(x);
    match sign {
        PSign::Plus => v,
        PSign::Minus => -v,
    }
}

pub fn p_plus_symbol<T: Real>() -> Symbol<T> {
    to_symbol(&Expr::call(Func::PPlus, Expr::x()))
}

pub fn p_minus_symbol<T: Real>() -> Symbol<T> {
    to_symbol(&Expr::call(Func::PMinus, Expr::x()))
}

type LimitFn<T> = dyn Fn(T) -> Result<(Cx<T>, Cx<T>)> + Send + Sync;

/// `l+-`, `c+-` and the frozen sections `a(1/r, .)`, `a(r, .)`.
#[derive(Clone)]
pub struct TransitionPack<T> {
    pub r: T,
    pub ln_r: T,
    pub a_at_rinv: Symbol<T>,
    pub a_at_r: Symbol<T>,
    /// `(a(1/r, -inf), a(1/r, +inf))`
    pub lim_rinv: (Cx<T>, Cx<T>),
    /// `(a(r, -inf), a(r, +inf))`
    pub lim_r: (Cx<T>, Cx<T>),
    a_limits: Arc<LimitFn<T>>,
}

impl<T: std::fmt::Debug> std::fmt::Debug for TransitionPack<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionPack")
            .field("r", &self.r)
            .field("lim_rinv", &self.lim_rinv)
            .field("lim_r", &self.lim_r)
            .finish()
    }
}

impl<T: Real> TransitionPack<T> {
    pub fn r_inv(&self) -> T {
        self.r.recip()
    }

    /// `l-(t) = (ln r - ln t) / (2 ln r)`
    pub fn ell_minus(&self, t: T) -> T {
        (self.ln_r - t.ln()) / (self.ln_r + self.ln_r)
    }

    /// `l+(t) = (ln r + ln t) / (2 ln r)`
    pub fn ell_plus(&self, t: T) -> T {
        (self.ln_r + t.ln()) / (self.ln_r + self.ln_r)
    }

    /// `(a(t, -inf), a(t, +inf))`
    pub fn a_limits(&self, t: T) -> Result<(Cx<T>, Cx<T>)> {
        (self.a_limits)(t)
    }

    fn c(&self, t: T, lim_t: Cx<T>, lim_rinv: Cx<T>, lim_r: Cx<T>) -> Cx<T> {
        lim_t.inv() - cx(self.ell_minus(t)) / lim_rinv - cx(self.ell_plus(t)) / lim_r
    }

    /// `(c-(t), c+(t))`
    pub fn c_pm(&self, t: T) -> Result<(Cx<T>, Cx<T>)> {
        let (m, p) = self.a_limits(t)?;
        Ok((
            self.c(t, m, self.lim_rinv.0, self.lim_r.0),
            self.c(t, p, self.lim_rinv.1, self.lim_r.1),
        ))
    }

    pub fn c_minus(&self, t: T) -> Result<Cx<T>> {
        self.c_pm(t).map(|c| c.0)
    }

    pub fn c_plus(&self, t: T) -> Result<Cx<T>> {
        self.c_pm(t).map(|c| c.1)
    }
}

fn check_limits<T: Real>(t: T, (m, p): (Cx<T>, Cx<T>), floor: T) -> Result<(Cx<T>, Cx<T>)> {
    for (side, v) in [(XSide::MinusInf, m), (XSide::PlusInf, p)] {
        if !(v.norm() >= floor) {
            return Err(Error::DegenerateAtInfinity {
                t: t.as_f64(),
                side,
                modulus: v.norm().as_f64(),
            });
        }
    }
    Ok((m, p))
}

/// Materializes the transition data for a radius `r > 1`.
pub fn build_transition<T: Real>(
    sym: &Symbol<T>,
    r: T,
    limits: &LimitConfig<T>,
    floor: T,
) -> Result<TransitionPack<T>> {
    if !(r > T::one()) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("the radius must exceed 1, got {r}")));
    }
    let s = sym.clone();
    let cfg = *limits;
    let a_limits: Arc<LimitFn<T>> = Arc::new(move |t| {
        let l = x_limits(&s, t, &cfg)?;
        Ok((l.minus, l.plus))
    });
    let r_inv = r.recip();
    let lim_rinv = check_limits(r_inv, a_limits(r_inv)?, floor)?;
    let lim_r = check_limits(r, a_limits(r)?, floor)?;
    // Interior points of [1/r, r] are checked on a probe ladder.
    let ln_r = r.ln();
    for j in 1..32 {
        let t = (ln_r * T::lit(j as f64 / 16.0 - 1.0)).exp();
        check_limits(t, a_limits(t)?, floor)?;
    }
    Ok(TransitionPack {
        r,
        ln_r,
        a_at_rinv: sym.frozen(r_inv),
        a_at_r: sym.frozen(r),
        lim_rinv,
        lim_r,
        a_limits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transition_values() {
        assert_eq!(p_plus(0.0f64), 0.5);
        assert!((p_plus(1.0f64) - (1.0 + std::f64::consts::PI.tanh()) / 2.0).abs() < 1e-15);
        for k in -100..=100 {
            let x = k as f64 * 0.173;
            let tanh = (std::f64::consts::PI * x).tanh();
            assert!((p_plus(x) + p_minus(x) - 1.0).abs() < 1e-15);
            assert!((p_plus(x) - (1.0 + tanh) / 2.0).abs() < 1e-15);
        }
        assert_eq!(p_plus(-1e4f64), 0.0);
        assert_eq!(p_plus(1e4f32), 1.0);
    }

    #[test]
    fn transition_identities() {
        let a = Symbol::new("2+p+ e^{-ln^2 t}", |t: f64, x: f64| {
            cx(2.0 + p_plus(x) * (-t.ln().powi(2)).exp())
        });
        let pack = build_transition(&a, 3.0, &LimitConfig::default(), 1e-6).unwrap();
        for t in [pack.r_inv(), pack.r] {
            let (cm, cp) = pack.c_pm(t).unwrap();
            assert!(cm.norm() < 1e-12 && cp.norm() < 1e-12, "{cm} {cp}");
        }
        assert_eq!(pack.ell_plus(3.0), 1.0);
        assert_eq!(pack.ell_minus(3.0), 0.0);
        assert!(pack.ell_plus(1.0 / 3.0).abs() < 1e-15);
        assert!((pack.ell_minus(1.0 / 3.0) - 1.0).abs() < 1e-15);
        let (cm, cp) = pack.c_pm(1.0).unwrap();
        assert!(cm.norm() < 1e-15 && cp.norm() > 1e-3);
    }
}
