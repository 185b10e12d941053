//! Fredholm analysis of `Op(a)`: the boundary gate, the regularizer and finite-section evidence.
//!
//! A symbol passes the gate when it stays away from zero on the boundary, that
//! is on the lines `x = +-inf` and on the fibres over `t -> 0` and `t -> inf`
//! (the whole closed x-line there, corners included). The regularizer `Op(b)`
//! then inverts `Op(a)` up to a compact operator; on finite sections the
//! compactness is probed by singular-value decay of `Op(a)Op(b) - I` and
//! `Op(b)Op(a) - I` along a doubling ladder of grid sizes.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, XSide};
use crate::linalg::singular_values;
use crate::mellin::{assemble_op_section, LogGrid, OperatorSection};
use crate::regularizer::{regularize, RegularizerConfig, RegularizerResult, VerifyConfig};
use crate::scalar::{cx, FftReal, Real};
use crate::symbol::{reciprocal, t_limit_profile, x_limits, InverseClosednessReport, InverseConfig, Symbol, TSide};

/// Where the smallest boundary modulus was seen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryPoint<T> {
    /// `(t, x = +-inf)`
    XLimit { t: T, side: XSide },
    /// A finite `x` on the fibre over `t -> 0` or `t -> inf`.
    Fiber { side: TSide, x: T },
    /// `x = +-inf` on a fibre.
    Corner { side: TSide, x_side: XSide },
}

impl<T: Real> fmt::Display for BoundaryPoint<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::XLimit { t, side } => write!(f, "t={t}, {side}"),
            BoundaryPoint::Fiber { side, x } => write!(f, "{side}, x={x}"),
            BoundaryPoint::Corner { side, x_side } => write!(f, "{side}, {x_side}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryWitness<T> {
    pub point: BoundaryPoint<T>,
    pub modulus: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryVerdict<T> {
    /// `a(t, +-inf) != 0` on every probed `t`.
    pub xline_ok: bool,
    /// The fibre values over both ends of `R+` stay away from zero, corners included.
    pub tfiber_ok: bool,
    /// Smallest boundary modulus seen.
    pub min_modulus: T,
    pub witness: Option<BoundaryWitness<T>>,
    pub caveats: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct FredholmConfig<T> {
    pub regularizer: RegularizerConfig<T>,
    pub verify: VerifyConfig<T>,
    /// Grid sizes of the finite-section ladder.
    pub ladder: Vec<usize>,
    /// Sections live on `u = ln t in [u_min, u_max]`.
    pub u_min: T,
    pub u_max: T,
    /// The decay proxy holds when `sigma_k <= tau` for all `k >= k0` (1-based).
    pub k0: usize,
    pub tau: T,
}

impl<T: Real> Default for FredholmConfig<T> {
    fn default() -> Self {
        Self {
            regularizer: RegularizerConfig::default(),
            verify: VerifyConfig::default(),
            ladder: vec![128, 256, 512],
            u_min: T::lit(-32.0),
            u_max: T::lit(32.0),
            k0: 32,
            tau: T::lit(0.1),
        }
    }
}

fn track<T: Real>(best: &mut Option<BoundaryWitness<T>>, point: BoundaryPoint<T>, modulus: T) {
    let modulus = if modulus.is_nan() { T::zero() } else { modulus };
    if best.as_ref().is_none_or(|w| modulus < w.modulus) {
        *best = Some(BoundaryWitness { point, modulus });
    }
}

/// Probes the boundary values: the limits at `x = +-inf` on the t-grid, then
/// the extrapolated fibres over `t -> 0` and `t -> inf`.
pub fn boundary_check<T: Real>(sym: &Symbol<T>, cfg: &FredholmConfig<T>) -> BoundaryVerdict<T> {
    let rc = &cfg.regularizer;
    let floor = rc.floor;
    let mut caveats = Vec::new();

    let mut xline: Option<BoundaryWitness<T>> = None;
    let mut xline_ok = true;
    let per_t: Vec<_> = rc
        .tgrid
        .points()
        .par_iter()
        .map(|&t| (t, x_limits(sym, t, &rc.limits)))
        .collect();
    for (t, l) in per_t {
        match l {
            Ok(l) => {
                track(
                    &mut xline,
                    BoundaryPoint::XLimit {
                        t,
                        side: XSide::MinusInf,
                    },
                    l.minus.norm(),
                );
                track(
                    &mut xline,
                    BoundaryPoint::XLimit {
                        t,
                        side: XSide::PlusInf,
                    },
                    l.plus.norm(),
                );
            }
            Err(e) => {
                xline_ok = false;
                caveats.push(e.to_string());
            }
        }
    }
    if let Some(w) = &xline {
        xline_ok &= w.modulus > floor;
    }

    let mut fiber: Option<BoundaryWitness<T>> = None;
    let mut tfiber_ok = true;
    for side in [TSide::Zero, TSide::Infinity] {
        let p = t_limit_profile(sym, side, &rc.profile);
        if !p.converged {
            caveats.push(format!(
                "the profile toward {side} did not converge (Cauchy defect {:e})",
                p.cauchy_defect.as_f64()
            ));
            if !rc.allow_nonconverged {
                tfiber_ok = false;
                continue;
            }
        }
        if !p.declared {
            caveats.push(format!(
                "fibre values toward {side} are sequential limits along one probe sequence"
            ));
        }
        for (&x, v) in p.xgrid.iter().zip(&p.limit_values) {
            track(&mut fiber, BoundaryPoint::Fiber { side, x }, v.norm());
        }
        match p.corner_values {
            Some((m, pl)) => {
                track(
                    &mut fiber,
                    BoundaryPoint::Corner {
                        side,
                        x_side: XSide::MinusInf,
                    },
                    m.norm(),
                );
                track(
                    &mut fiber,
                    BoundaryPoint::Corner {
                        side,
                        x_side: XSide::PlusInf,
                    },
                    pl.norm(),
                );
            }
            None => {
                tfiber_ok = false;
                caveats.push(format!("no limits at x = +-inf on the fibre {side}"));
            }
        }
    }
    if let Some(w) = &fiber {
        tfiber_ok &= w.modulus > floor;
    }

    // The x-line witness wins ties so that a degenerate limit is named there first.
    let witness = match (xline, fiber) {
        (Some(a), Some(b)) => Some(if b.modulus < a.modulus { b } else { a }),
        (a, b) => a.or(b),
    };
    let min_modulus = witness.map(|w| w.modulus).unwrap_or(T::zero());
    BoundaryVerdict {
        xline_ok,
        tfiber_ok,
        min_modulus,
        witness,
        caveats,
        passed: xline_ok && tfiber_ok && min_modulus > floor,
    }
}

/// Singular values of one residual section against the decay proxy.
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile<T> {
    pub n: usize,
    /// All singular values, descending; `sigmas[k - 1]` is `sigma_k`.
    pub sigmas: Vec<T>,
    pub k0: usize,
    pub tau: T,
    pub holds: bool,
}

impl<T: Real> DecayProfile<T> {
    pub fn from_section(sec: &OperatorSection<T>, k0: usize, tau: T) -> Self {
        let sigmas = singular_values(&sec.entries);
        let holds = sigmas.iter().skip(k0.saturating_sub(1)).all(|&s| s <= tau);
        Self {
            n: sec.n(),
            sigmas,
            k0,
            tau,
            holds,
        }
    }

    /// Number of singular values above `tau`.
    pub fn count_above(&self) -> usize {
        self.sigmas.iter().filter(|&&s| s > self.tau).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Both residual ladders meet the decay proxy.
    FredholmEvidence,
    /// The boundary gate failed.
    NotFredholm { witness: String },
    /// The gate passed but no regularizer could be built at desk scale.
    ConstructionFailed { reason: String },
    /// The regularizer exists but a residual ladder misses the decay proxy.
    DecayProxyFailed,
}

impl Outcome {
    pub fn is_positive(&self) -> bool {
        matches!(self, Outcome::FredholmEvidence)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::FredholmEvidence => f.write_str("Fredholm (numerical evidence)"),
            Outcome::NotFredholm { witness } => {
                write!(
                    f,
                    "not Fredholm (numerical evidence): the symbol degenerates on the boundary at {witness}"
                )
            }
            Outcome::ConstructionFailed { reason } => write!(f, "construction failed at desk scale: {reason}"),
            Outcome::DecayProxyFailed => f.write_str("inconclusive: a residual ladder misses the decay proxy"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FredholmReport<T> {
    pub label: String,
    pub verdict: BoundaryVerdict<T>,
    pub regularizer: Option<RegularizerResult<T>>,
    /// Set by the strong route, where `b = 1/a`.
    pub inverse: Option<InverseClosednessReport<T>>,
    #[serde(skip)]
    pub b: Option<Symbol<T>>,
    /// `Op(b)Op(a) - I`
    pub residual_left: Vec<DecayProfile<T>>,
    /// `Op(a)Op(b) - I`
    pub residual_right: Vec<DecayProfile<T>>,
    /// Section of `ab - 1`.
    pub degenerate_product_check: Vec<DecayProfile<T>>,
    pub outcome: Outcome,
    pub outcome_text: String,
}

impl<T> FredholmReport<T> {
    fn finish(mut self) -> Self
    where
        T: Real,
    {
        self.outcome_text = self.outcome.to_string();
        self
    }
}

/// One-sided residual sections on `grid`: `(Op(b)Op(a) - I, Op(a)Op(b) - I, Op(ab - 1))`.
pub fn residual_sections<T: FftReal>(
    a: &Symbol<T>,
    b: &Symbol<T>,
    grid: &LogGrid<T>,
) -> Result<(OperatorSection<T>, OperatorSection<T>, OperatorSection<T>)> {
    let sa = assemble_op_section(a, grid)?;
    let sb = assemble_op_section(b, grid)?;
    let left = sb.compose(&sa)?.minus_identity();
    let right = sa.compose(&sb)?.minus_identity();
    let c = a.mul(b).sub(&Symbol::constant(cx(T::one())));
    let sc = assemble_op_section(&c, grid)?;
    Ok((left, right, sc))
}

fn profile<T: FftReal>(
    report: &mut FredholmReport<T>,
    a: &Symbol<T>,
    b: &Symbol<T>,
    cfg: &FredholmConfig<T>,
) -> Result<()> {
    for &n in &cfg.ladder {
        let grid = LogGrid::new(n, cfg.u_min, cfg.u_max)?;
        let (left, right, c) = residual_sections(a, b, &grid)?;
        report
            .residual_left
            .push(DecayProfile::from_section(&left, cfg.k0, cfg.tau));
        report
            .residual_right
            .push(DecayProfile::from_section(&right, cfg.k0, cfg.tau));
        report
            .degenerate_product_check
            .push(DecayProfile::from_section(&c, cfg.k0, cfg.tau));
    }
    let holds = report
        .residual_left
        .iter()
        .chain(&report.residual_right)
        .all(|p| p.holds);
    report.outcome = if holds {
        Outcome::FredholmEvidence
    } else {
        Outcome::DecayProxyFailed
    };
    Ok(())
}

fn empty_report<T: Real>(sym: &Symbol<T>, verdict: BoundaryVerdict<T>, outcome: Outcome) -> FredholmReport<T> {
    FredholmReport {
        label: sym.label().to_string(),
        verdict,
        regularizer: None,
        inverse: None,
        b: None,
        residual_left: Vec::new(),
        residual_right: Vec::new(),
        degenerate_product_check: Vec::new(),
        outcome,
        outcome_text: String::new(),
    }
}

fn gate_outcome<T: Real>(v: &BoundaryVerdict<T>) -> Outcome {
    Outcome::NotFredholm {
        witness: v
            .witness
            .map(|w| format!("{} (|a| = {:e})", w.point, w.modulus.as_f64()))
            .unwrap_or_else(|| v.caveats.join("; ")),
    }
}

/// Boundary gate, radius search, construction of `b`, verification and the
/// residual ladders.
pub fn fredholm_analyze<T: FftReal>(sym: &Symbol<T>, cfg: &FredholmConfig<T>) -> Result<FredholmReport<T>> {
    let verdict = boundary_check(sym, cfg);
    if !verdict.passed {
        let outcome = gate_outcome(&verdict);
        return Ok(empty_report(sym, verdict, outcome).finish());
    }
    let mut report = empty_report(sym, verdict, Outcome::DecayProxyFailed);
    match regularize(sym, &cfg.regularizer, &cfg.verify) {
        Ok(res) => {
            let b = res.b.clone();
            report.regularizer = Some(res);
            report.b = Some(b.clone());
            profile(&mut report, sym, &b, cfg)?;
        }
        Err(e) if e.is_numerical() => return Err(e),
        Err(e) => report.outcome = Outcome::ConstructionFailed { reason: e.to_string() },
    }
    Ok(report.finish())
}

/// The route for symbols bounded away from zero everywhere: `b = 1/a`.
pub fn strong_regularize<T: FftReal>(sym: &Symbol<T>, cfg: &FredholmConfig<T>) -> Result<FredholmReport<T>> {
    let rc = &cfg.regularizer;
    let icfg = InverseConfig {
        tgrid: rc.tgrid.clone(),
        xgrid: rc.xgrid.clone(),
        floor: rc.floor,
        ..InverseConfig::default()
    };
    let (b, inverse) = match reciprocal(sym, &icfg) {
        Ok(v) => v,
        Err(e @ Error::NotInvertible { .. }) => return Err(Error::NotBoundedAway(Box::new(e))),
        Err(e) => return Err(e),
    };
    let verdict = boundary_check(sym, cfg);
    let mut report = empty_report(sym, verdict, Outcome::DecayProxyFailed);
    report.inverse = Some(inverse);
    report.b = Some(b.clone());
    profile(&mut report, sym, &b, cfg)?;
    Ok(report.finish())
}
