//! Assembly of the regularizer symbol `b` and its verification.

use rayon::prelude::*;
use serde::Serialize;

use super::radius::{a_of_r, estimate_a_pm, estimate_c, find_r, RegularizerConfig};
use super::transition::{build_transition, p_minus, p_plus, transition_dp, PSign, TransitionPack};
use crate::dsl::{s_add, s_div, s_mul, s_sub, Expr, Func, Var};
use crate::error::Result;
use crate::scalar::{cx, Cx, Real};
use crate::symbol::{
    cb_norm, classify, v_norm, x_limits, ClassifyConfig, Membership, NormConfig, Symbol, SymbolSource, TGrid, Trend,
};

/// The regularizer symbol with the constants of the bounded-away analysis.
#[derive(Debug, Clone, Serialize)]
pub struct RegularizerResult<T> {
    #[serde(skip)]
    pub b: Symbol<T>,
    #[serde(skip)]
    pub transition: TransitionPack<T>,
    pub r: T,
    #[serde(rename = "A_minus")]
    pub a_minus: T,
    #[serde(rename = "A_plus")]
    pub a_plus: T,
    #[serde(rename = "A_of_r")]
    pub a_of_r: T,
    #[serde(rename = "C")]
    pub c: T,
    pub certificates: Option<RegularizerCertificate<T>>,
}

fn middle<T: Real>(pack: &TransitionPack<T>, t: T, x: T) -> Cx<T> {
    let lm = cx(pack.ell_minus(t));
    let lp = cx(pack.ell_plus(t));
    let (cm, cp) = pack.c_pm(t).unwrap_or((cx(T::nan()), cx(T::nan())));
    lm / pack.a_at_rinv.eval(t, x) + lp / pack.a_at_r.eval(t, x) + cm * cx(p_minus(x)) + cp * cx(p_plus(x))
}

fn middle_dx<T: Real>(pack: &TransitionPack<T>, t: T, x: T) -> Cx<T> {
    let lm = cx(pack.ell_minus(t));
    let lp = cx(pack.ell_plus(t));
    let (cm, cp) = pack.c_pm(t).unwrap_or((cx(T::nan()), cx(T::nan())));
    let a0 = pack.a_at_rinv.eval(t, x);
    let a1 = pack.a_at_r.eval(t, x);
    -lm * pack.a_at_rinv.dx(t, x) / (a0 * a0) - lp * pack.a_at_r.dx(t, x) / (a1 * a1)
        + cm * cx(transition_dp(PSign::Minus, x))
        + cp * cx(transition_dp(PSign::Plus, x))
}

/// `(l-(t)/a(1/r, +-inf) + l+(t)/a(r, +-inf) + c+-(t))` for `t` in `[1/r, r]`, `1/a(t, +-inf)` elsewhere.
fn b_limits<T: Real>(pack: &TransitionPack<T>, t: T) -> (Cx<T>, Cx<T>) {
    let nan = (cx(T::nan()), cx(T::nan()));
    if t < pack.r_inv() || t > pack.r {
        return pack.a_limits(t).map(|(m, p)| (m.inv(), p.inv())).unwrap_or(nan);
    }
    let (Ok((cm, cp)), lm, lp) = (pack.c_pm(t), cx(pack.ell_minus(t)), cx(pack.ell_plus(t))) else {
        return nan;
    };
    (
        lm / pack.lim_rinv.0 + lp / pack.lim_r.0 + cm,
        lm / pack.lim_rinv.1 + lp / pack.lim_r.1 + cp,
    )
}

/// Expression of `b` when `a` carries an expression with symbolic limits.
fn b_source<T: Real>(sym: &Symbol<T>, pack: &TransitionPack<T>) -> Option<SymbolSource> {
    let src = sym.source()?;
    let (lm_a, lp_a) = src.xlim.clone()?;
    let (r, r_inv) = (pack.r.as_f64(), pack.r_inv().as_f64());
    let ln_r = pack.ln_r.as_f64();
    let ln_t = Expr::call(Func::Ln, Expr::t());
    let ell_m = s_div(s_sub(Expr::Num(ln_r), ln_t.clone()), Expr::Num(2.0 * ln_r));
    let ell_p = s_div(s_add(Expr::Num(ln_r), ln_t), Expr::Num(2.0 * ln_r));
    let at = |e: &Expr, t0: f64| e.substitute(Var::T, &Expr::Num(t0));
    let recip = |e: Expr| s_div(Expr::Num(1.0), e);
    let interp = |e: &Expr| {
        s_add(
            s_mul(ell_m.clone(), recip(at(e, r_inv))),
            s_mul(ell_p.clone(), recip(at(e, r))),
        )
    };
    let c = |lim: &Expr| s_sub(recip(lim.clone()), interp(lim));
    let inner = s_add(
        s_add(interp(&src.expr), s_mul(c(&lm_a), Expr::call(Func::PMinus, Expr::x()))),
        s_mul(c(&lp_a), Expr::call(Func::PPlus, Expr::x())),
    );
    let expr = Expr::band(r_inv, r, inner, recip(src.expr.clone()));
    let lim = |l: &Expr| Expr::band(r_inv, r, s_add(interp(l), c(l)), recip(l.clone()));
    Some(SymbolSource {
        xlim: Some((lim(&lm_a), lim(&lp_a))),
        expr,
    })
}

/// `b = 1/a` on `T_r`, the interpolation through `p+-` on `[1/r, r]`.
pub fn build_regularizer<T: Real>(sym: &Symbol<T>, r: T, cfg: &RegularizerConfig<T>) -> Result<RegularizerResult<T>> {
    let pack = build_transition(sym, r, &cfg.limits, cfg.floor)?;
    let apm = estimate_a_pm(sym, &cfg.tgrid, &cfg.limits, cfg.floor)?;
    let c = estimate_c(
        sym,
        &RegularizerConfig {
            allow_nonconverged: true,
            ..cfg.clone()
        },
    )?
    .c;
    let a_of_r = a_of_r(sym, r, cfg);

    let (r_inv, a) = (pack.r_inv(), sym.clone());
    let p = pack.clone();
    let in_middle = move |t: T| r_inv <= t && t <= r;
    let mut b = Symbol::new(format!("b[{}]", sym.label()), move |t, x| {
        if in_middle(t) {
            middle(&p, t, x)
        } else {
            a.eval(t, x).inv()
        }
    });
    if sym.has_analytic_dx() {
        let (p, a) = (pack.clone(), sym.clone());
        b = b.with_dx(move |t, x| {
            if in_middle(t) {
                middle_dx(&p, t, x)
            } else {
                let v = a.eval(t, x);
                -a.dx(t, x) / (v * v)
            }
        });
    }
    let p = pack.clone();
    b = b.with_xlim(move |t| b_limits(&p, t));
    if let Some(tl) = sym.declared_tlim() {
        let (z, i) = (tl.at_zero.clone(), tl.at_infinity.clone());
        b = b.with_tlim(move |x| z(x).inv(), move |x| i(x).inv());
    }
    if let Some(src) = b_source(sym, &pack) {
        b = b.with_source(src);
    }
    Ok(RegularizerResult {
        b,
        transition: pack,
        r,
        a_minus: apm.a_minus,
        a_plus: apm.a_plus,
        a_of_r,
        c,
        certificates: None,
    })
}

/// Radius search, construction and verification in one call.
pub fn regularize<T: Real>(
    sym: &Symbol<T>,
    cfg: &RegularizerConfig<T>,
    verify: &VerifyConfig<T>,
) -> Result<RegularizerResult<T>> {
    let search = find_r(sym, cfg)?;
    let mut res = build_regularizer(sym, search.r, cfg)?;
    res.a_of_r = search.a_of_r;
    res.c = search.c;
    res.certificates = Some(verify_regularizer(sym, &res, verify));
    Ok(res)
}

#[derive(Debug, Clone)]
pub struct VerifyConfig<T> {
    pub tgrid: TGrid<T>,
    /// Offsets from the seams `t = r^{+-1}` into the middle zone.
    pub seam_eps: Vec<T>,
    /// The seam check compares the defect at the smallest offset with this.
    pub seam_tol: T,
    pub boundary_tol: T,
    pub norm: NormConfig<T>,
    /// Extra probes of the middle zone in the norm bound and boundary identity.
    pub middle_probes: usize,
    /// `None` skips the class-membership evidence.
    pub classify: Option<ClassifyConfig<T>>,
}

impl<T: Real> Default for VerifyConfig<T> {
    fn default() -> Self {
        Self {
            tgrid: TGrid::default(),
            seam_eps: vec![T::lit(1e-4), T::lit(1e-5), T::lit(1e-6)],
            seam_tol: T::lit(1e-8),
            boundary_tol: T::lit(1e-12),
            norm: NormConfig::default(),
            middle_probes: 17,
            classify: Some(ClassifyConfig::default()),
        }
    }
}

/// `|b(r^{+-1} -+ eps, x) - 1/a(r^{+-1}, x)|` maximized over the x-grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeamDefect<T> {
    pub seam: T,
    pub eps: T,
    pub defect: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck<T> {
    pub name: String,
    pub measured: T,
    pub bound: T,
    pub holds: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularizerCertificate<T> {
    pub checks: Vec<CertificateCheck<T>>,
    pub seam: Vec<SeamDefect<T>>,
    pub membership: Option<Membership<T>>,
    pub all_hold: bool,
}

impl<T> RegularizerCertificate<T> {
    pub fn check(&self, name: &str) -> Option<&CertificateCheck<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check<T: Real>(name: &str, measured: T, bound: T, note: Option<String>) -> CertificateCheck<T> {
    CertificateCheck {
        name: name.to_string(),
        measured,
        bound,
        holds: measured <= bound,
        note,
    }
}

/// Probe t-values: the grid plus a geometric sweep of the middle zone.
fn probe_ts<T: Real>(res: &RegularizerResult<T>, cfg: &VerifyConfig<T>) -> TGrid<T> {
    cfg.tgrid
        .merged(&TGrid::geometric(res.r.recip(), res.r, cfg.middle_probes.max(2)))
}

pub fn seam_defects<T: Real>(a: &Symbol<T>, res: &RegularizerResult<T>, eps: &[T], xs: &[T]) -> Vec<SeamDefect<T>> {
    let r = res.r;
    let mut out = Vec::new();
    for (seam, inward) in [(r.recip(), T::one()), (r, -T::one())] {
        for &e in eps {
            let t = seam + inward * e;
            let defect = xs
                .par_iter()
                .map(|&x| (res.b.eval(t, x) - a.eval(seam, x).inv()).norm())
                .reduce(|| T::zero(), T::max);
            out.push(SeamDefect { seam, eps: e, defect });
        }
    }
    out
}

/// Seam continuity, boundary inversion, the norm bound and class-membership evidence for `b`.
pub fn verify_regularizer<T: Real>(
    a: &Symbol<T>,
    res: &RegularizerResult<T>,
    cfg: &VerifyConfig<T>,
) -> RegularizerCertificate<T> {
    let mut checks = Vec::new();
    let xs = crate::symbol::XGrid::<T>::default();

    let seam = seam_defects(a, res, &cfg.seam_eps, xs.points());
    let smallest = cfg.seam_eps.iter().copied().fold(T::infinity(), T::min);
    let worst = seam
        .iter()
        .filter(|s| s.eps == smallest)
        .fold(T::zero(), |m, s| m.max(s.defect));
    checks.push(check(
        "seam continuity",
        worst,
        cfg.seam_tol,
        Some(format!("defect at eps = {:e}", smallest.as_f64())),
    ));

    let ts = probe_ts(res, cfg);
    let boundary: Vec<T> = ts
        .points()
        .par_iter()
        .map(|&t| match (x_limits(a, t, &cfg.norm.limits), res.b.declared_xlim(t)) {
            (Ok(la), Some((bm, bp))) => (la.minus * bm - cx(T::one()))
                .norm()
                .max((la.plus * bp - cx(T::one())).norm()),
            _ => T::infinity(),
        })
        .collect();
    let worst = boundary.into_iter().fold(T::zero(), T::max);
    checks.push(check("boundary inversion", worst, cfg.boundary_tol, None));

    let r = res.r;
    let tr: Vec<T> = ts
        .points()
        .iter()
        .copied()
        .filter(|&t| t <= r.recip() || t >= r)
        .collect();
    let sup_a = tr
        .par_iter()
        .map(|&t| v_norm(a, t, &cfg.norm).map(|v| v.v_norm))
        .collect::<Result<Vec<T>>>()
        .map(|v| v.into_iter().fold(T::zero(), T::max));
    let measured = cb_norm(&res.b, &ts, &cfg.norm).map(|c| c.value);
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    match (sup_a, measured) {
        (Ok(sup_a), Ok(measured)) => {
            let bound = two * res.a_of_r * res.a_of_r * sup_a + six * res.a_minus + six * res.a_plus;
            checks.push(check("norm bound", measured, bound, None));
        }
        (Err(e), _) | (_, Err(e)) => checks.push(CertificateCheck {
            name: "norm bound".into(),
            measured: T::nan(),
            bound: T::nan(),
            holds: false,
            note: Some(e.to_string()),
        }),
    }

    let membership = cfg.classify.as_ref().map(|c| classify(&res.b, c));
    if let Some(m) = &membership {
        checks.push(CertificateCheck {
            name: "vanishing derivative tails".into(),
            measured: T::nan(),
            bound: T::nan(),
            holds: m.verdict.vanishing_tails == Trend::Pass,
            note: Some(format!("{:?} (numerical evidence)", m.verdict.vanishing_tails).to_lowercase()),
        });
    }

    let all_hold = checks.iter().all(|c| c.holds);
    RegularizerCertificate {
        checks,
        seam,
        membership,
        all_hold,
    }
}
