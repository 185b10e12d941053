//! Numerical checks of the properties of `p+-` and of the inverse-closedness
//! inequalities, plus the shared test-symbol suite.

use serde::Serialize;

use crate::dsl::{parse, to_symbol};
use crate::error::Result;
use crate::regularizer::{p_minus_symbol, p_plus_symbol};
use crate::scalar::Real;
use crate::symbol::{
    inverse_closedness_suite, tail_variation, v_norm, InverseClosednessReport, InverseConfig, NormConfig, Symbol, TGrid,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|measured - reference| <= tol`
    Equal,
    /// `measured < reference`, or `<=` when `strict` is off
    Below,
}

/// One measured quantity against a claimed value or bound.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck<T> {
    pub name: String,
    pub parameter: Option<T>,
    pub measured: T,
    pub reference: T,
    pub relation: Relation,
    pub tol: T,
    /// `measured / reference`
    pub ratio: T,
    /// Quadrature error estimate of `measured`.
    pub error_bound: T,
    pub holds: bool,
}

impl<T: Real> LemmaCheck<T> {
    fn new(
        name: &str,
        parameter: Option<T>,
        measured: T,
        reference: T,
        relation: Relation,
        tol: T,
        error_bound: T,
    ) -> Self {
        let holds = match relation {
            Relation::Equal => (measured - reference).abs() <= tol,
            Relation::Below => measured <= reference + tol,
        };
        Self {
            name: name.to_string(),
            parameter,
            measured,
            reference,
            relation,
            tol,
            ratio: measured / reference,
            error_bound,
            holds,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LemmaConfig<T> {
    pub norm: NormConfig<T>,
    pub shifts: Vec<T>,
    pub tails: Vec<T>,
    /// Tolerance of the norm identity.
    pub norm_tol: T,
    pub shift_tol: T,
    pub tail_tol: T,
}

impl<T: Real> Default for LemmaConfig<T> {
    fn default() -> Self {
        Self {
            norm: NormConfig::with_tol(T::lit(1e-12)),
            shifts: [1e-3, 1e-2, 1e-1, 1.0].into_iter().map(T::lit).collect(),
            tails: [0.5, 1.0, 2.0].into_iter().map(T::lit).collect(),
            norm_tol: T::lit(1e-8),
            shift_tol: T::lit(1e-9),
            tail_tol: T::lit(1e-10),
        }
    }
}

fn transitions<T: Real>() -> [(&'static str, Symbol<T>); 2] {
    [("p-", p_minus_symbol()), ("p+", p_plus_symbol())]
}

/// `||p+-||_V = 2`.
pub fn transition_norms<T: Real>(cfg: &LemmaConfig<T>) -> Result<Vec<LemmaCheck<T>>> {
    transitions()
        .iter()
        .map(|(name, p)| {
            let v = v_norm(p, T::one(), &cfg.norm)?;
            Ok(LemmaCheck::new(
                &format!("||{name}||_V"),
                None,
                v.v_norm,
                T::lit(2.0),
                Relation::Equal,
                cfg.norm_tol,
                v.error_bound,
            ))
        })
        .collect()
}

/// `||p+- - p+-(. + h)||_V <= 5 pi |h| / 2`.
pub fn shift_bounds<T: Real>(cfg: &LemmaConfig<T>) -> Result<Vec<LemmaCheck<T>>> {
    let mut out = Vec::new();
    for (name, p) in transitions::<T>() {
        for &h in &cfg.shifts {
            let v = v_norm(&p.sub(&p.shifted(h)), T::one(), &cfg.norm)?;
            let bound = T::lit(2.5) * T::PI() * h.abs();
            out.push(LemmaCheck::new(
                &format!("||{name} - {name}^h||_V"),
                Some(h),
                v.v_norm,
                bound,
                Relation::Below,
                cfg.shift_tol,
                v.error_bound,
            ));
        }
    }
    Ok(out)
}

/// `int_{|x|>m} |p+-'|` against the claimed closed form `1/(e^{2 pi m} + 1)`
/// and against the bound `e^{-2 pi m}`.
pub fn tail_bounds<T: Real>(cfg: &LemmaConfig<T>) -> Result<Vec<LemmaCheck<T>>> {
    let one_t = TGrid::new(vec![T::one()])?;
    let mut out = Vec::new();
    for (name, p) in transitions::<T>() {
        for &m in &cfg.tails {
            let (value, _) = tail_variation(&p, m, &one_t, &cfg.norm.quad)?;
            let e = (T::lit(2.0) * T::PI() * m).exp();
            let err = cfg.norm.quad.tol;
            out.push(LemmaCheck::new(
                &format!("tail of {name}' equals 1/(e^(2 pi m)+1)"),
                Some(m),
                value,
                (e + T::one()).recip(),
                Relation::Equal,
                cfg.tail_tol,
                err,
            ));
            out.push(LemmaCheck::new(
                &format!("tail of {name}' below e^(-2 pi m)"),
                Some(m),
                value,
                e.recip(),
                Relation::Below,
                T::zero(),
                err,
            ));
        }
    }
    Ok(out)
}

/// Every check on `p+-`.
pub fn elementary_suite<T: Real>(cfg: &LemmaConfig<T>) -> Result<Vec<LemmaCheck<T>>> {
    let mut out = transition_norms(cfg)?;
    out.extend(shift_bounds(cfg)?);
    out.extend(tail_bounds(cfg)?);
    Ok(out)
}

/// Symbols exercised throughout the tests and by `verify-lemmas`. All stay
/// away from zero on the boundary; `bounded_away` marks those that also do so
/// on all of `R+ x R`.
pub struct SuiteSymbol<T> {
    pub source: &'static str,
    pub symbol: Symbol<T>,
    pub bounded_away: bool,
    pub t_dependent: bool,
}

pub const SUITE_SOURCES: [(&str, bool, bool); 6] = [
    ("2", true, false),
    ("2 + pplus(x)", true, false),
    ("1 + 0.5*pplus(x)*exp(-ln(t)^2)", true, true),
    ("2 + so(1)*pplus(x)*exp(-ln(t)^2/100)", true, true),
    ("1.5 + atan(x)/pi*exp(-ln(t)^2/4)", true, true),
    ("2 + 1i*pminus(x)*exp(-ln(t)^2/9)", true, true),
];

/// The acceptance symbol of the Fredholm pipeline.
pub const FREDHOLM_SYMBOL: &str = "2 + so(1)*pplus(x)*exp(-ln(t)^2/100)";

pub fn suite_symbols<T: Real>() -> Vec<SuiteSymbol<T>> {
    SUITE_SOURCES
        .iter()
        .map(|&(source, bounded_away, t_dependent)| SuiteSymbol {
            source,
            symbol: to_symbol(&parse(source).expect("suite symbols parse")),
            bounded_away,
            t_dependent,
        })
        .collect()
}

/// The inverse-closedness inequalities on every bounded-away suite symbol.
pub fn inverse_closedness_suites<T: Real>(cfg: &InverseConfig<T>) -> Result<Vec<InverseClosednessReport<T>>> {
    let rs = [T::lit(1e-3), T::lit(0.5), T::lit(2.0), T::lit(1e3)];
    let hs = [T::lit(1e-2), T::lit(0.1), T::one()];
    let ms = [T::one(), T::lit(4.0)];
    suite_symbols::<T>()
        .into_iter()
        .filter(|s| s.bounded_away)
        .map(|s| inverse_closedness_suite(&s.symbol, cfg, &rs, &hs, &ms))
        .collect()
}
