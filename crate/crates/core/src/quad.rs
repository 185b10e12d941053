//! Adaptive Gauss-Kronrod quadrature on finite panels and on the real line.
//!
//! Integrals over `R` (or over `|x| > m`) are assembled from a core panel and
//! successive doublings of the reach; the doubling stops once the newest pair
//! of shells contributes less than a tenth of the tolerance.

#![allow(clippy::excessive_precision)]

use crate::scalar::Real;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for the quadrature drivers.
/// Evaluations one adaptive call may spend before it stops subdividing; guards
/// against noisy integrands that never meet the tolerance.
const EVALUATION_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig<T> {
    /// Absolute tolerance for a full-line integral.
    pub tol: T,
    /// Half-width of the initial panel `[-X0, X0]`.
    pub initial_reach: T,
    /// Maximum bisection depth of a single panel.
    pub max_depth: usize,
    /// Maximum number of reach doublings before giving up.
    pub max_doublings: usize,
}

impl<T: Real> Default for QuadConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-9),
            initial_reach: T::lit(16.0),
            max_depth: 48,
            max_doublings: 60,
        }
    }
}

impl<T: Real> QuadConfig<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Value of an integral with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    /// Half-width of the domain actually integrated (for line and tail integrals).
    pub reach: T,
    pub evaluations: usize,
}

/// Why a line or tail integral was abandoned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailFailure<T> {
    /// Shell contributions failed to shrink over three consecutive doublings.
    NotDecreasing { last_increment: T },
    /// The doubling budget ran out while increments were still shrinking.
    Exhausted { reach: T },
}

fn kronrod15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let centre = (a + b) * T::lit(0.5);
    let fc = f(centre);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let pair = f(centre - dx) + f(centre + dx);
        kronrod = kronrod + pair * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * T::lit(WG[j / 2]);
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Adaptive bisection on `[a, b]` with absolute tolerance `tol`.
///
/// A panel is accepted when its Kronrod-Gauss gap is below its share of the
/// tolerance, proportional to its length. Panels are summed in left-to-right
/// order so the result is deterministic.
pub fn adaptive<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, max_depth: usize) -> Integral<T> {
    let length = b - a;
    if length == T::zero() {
        return Integral {
            value: T::zero(),
            error: T::zero(),
            reach: T::zero(),
            evaluations: 0,
        };
    }
    let floor = T::epsilon() * T::lit(64.0);
    let mut value = T::zero();
    let mut error = T::zero();
    let mut evaluations = 0usize;
    // Depth-first with the right child pushed first keeps the summation ordered.
    // Several starting panels keep a single Gauss-Kronrod estimate from being
    // fooled by a narrow feature such as a kink of |f|.
    let panels = 16;
    let step = length / T::lit(panels as f64);
    let mut stack: Vec<(T, T, usize)> = (0..panels)
        .rev()
        .map(|i| {
            let lo = a + step * T::lit(i as f64);
            let hi = if i + 1 == panels { b } else { lo + step };
            (lo, hi, 0usize)
        })
        .collect();
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = kronrod15(f, lo, hi);
        evaluations += 15;
        let share = tol * ((hi - lo) / length).abs();
        // Past the budget, remaining panels are accepted with their error estimates.
        if e <= share.max(floor * v.abs()) || depth >= max_depth || evaluations >= EVALUATION_BUDGET {
            value = value + v;
            error = error + e;
        } else {
            let mid = (lo + hi) * T::lit(0.5);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Integral {
        value,
        error,
        reach: length.abs(),
        evaluations,
    }
}

fn extend_by_doubling<T: Real, F: Fn(T) -> T>(
    f: &F,
    start: T,
    first_outer: T,
    mut total: Integral<T>,
    cfg: &QuadConfig<T>,
) -> Result<Integral<T>, TailFailure<T>> {
    let shell_tol = cfg.tol * T::lit(0.1);
    let mut inner = start;
    let mut outer = first_outer;
    let mut previous: Option<T> = None;
    let mut stalls = 0usize;
    for _ in 0..cfg.max_doublings {
        let right = adaptive(f, inner, outer, shell_tol, cfg.max_depth);
        let left = adaptive(f, -outer, -inner, shell_tol, cfg.max_depth);
        let increment = right.value + left.value;
        total.value = total.value + increment;
        total.error = total.error + right.error + left.error;
        total.evaluations += right.evaluations + left.evaluations;
        total.reach = outer;
        if increment.abs() < shell_tol {
            total.error = total.error + increment.abs();
            return Ok(total);
        }
        if let Some(prev) = previous {
            if increment.abs() >= prev.abs() {
                stalls += 1;
                if stalls >= 3 {
                    return Err(TailFailure::NotDecreasing {
                        last_increment: increment,
                    });
                }
            } else {
                stalls = 0;
            }
        }
        previous = Some(increment);
        inner = outer;
        outer = outer * T::lit(2.0);
        if !outer.is_finite() {
            break;
        }
    }
    Err(TailFailure::Exhausted { reach: inner })
}

/// Integral of `f` over the whole real line.
pub fn integrate_line<T: Real, F: Fn(T) -> T>(f: &F, cfg: &QuadConfig<T>) -> Result<Integral<T>, TailFailure<T>> {
    let x0 = cfg.initial_reach;
    let core = adaptive(f, -x0, x0, cfg.tol, cfg.max_depth);
    extend_by_doubling(f, x0, x0 * T::lit(2.0), core, cfg)
}

/// [`integrate_line`] with the core interval split at `breaks`, so that kinks
/// of `f` sit on panel ends instead of hiding between quadrature nodes.
pub fn integrate_line_with_breaks<T: Real, F: Fn(T) -> T>(
    f: &F,
    breaks: &[T],
    cfg: &QuadConfig<T>,
) -> Result<Integral<T>, TailFailure<T>> {
    let mut inner: Vec<T> = breaks.iter().copied().filter(|b| b.is_finite()).collect();
    let widest = inner.iter().fold(T::zero(), |m, b| m.max(b.abs()));
    let x0 = cfg.initial_reach.max(widest * T::lit(2.0));
    inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
    inner.dedup();
    let mut points = vec![-x0];
    points.extend(inner);
    points.push(x0);
    let width = x0 * T::lit(2.0);
    let mut core = Integral {
        value: T::zero(),
        error: T::zero(),
        reach: x0,
        evaluations: 0,
    };
    for w in points.windows(2) {
        let part = adaptive(f, w[0], w[1], cfg.tol * (w[1] - w[0]) / width, cfg.max_depth);
        core.value = core.value + part.value;
        core.error = core.error + part.error;
        core.evaluations += part.evaluations;
    }
    extend_by_doubling(f, x0, x0 * T::lit(2.0), core, cfg)
}

/// Integral of `f` over `R \ [-m, m]`.
pub fn integrate_tails<T: Real, F: Fn(T) -> T>(
    f: &F,
    m: T,
    cfg: &QuadConfig<T>,
) -> Result<Integral<T>, TailFailure<T>> {
    let m = m.abs();
    let first = (m * T::lit(2.0)).max(m + cfg.initial_reach);
    let empty = Integral {
        value: T::zero(),
        error: T::zero(),
        reach: m,
        evaluations: 0,
    };
    extend_by_doubling(f, m, first, empty, cfg)
}
