//! Finite evidence for membership in `SO(R+, V(R))`, `E(R+, V(R))` and its
//! subalgebra with uniformly vanishing derivative tails.
//!
//! Each class is defined by a limit; we measure the defect along a ladder of
//! parameters and read a trend off the sequence. Verdicts are evidence only.

use serde::Serialize;

use super::grid::TGrid;
use super::norms::{cb_norm, cm_modulus, tail_variation, translate_defect, CmConfig, NormConfig};
use super::Symbol;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Pass,
    Fail,
    Inconclusive,
}

/// A measured defect sequence with its trend verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Condition<T> {
    pub name: String,
    pub parameters: Vec<T>,
    pub values: Vec<T>,
    pub trend: Trend,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub bounded: Trend,
    pub slowly_oscillating: Trend,
    pub translation_continuous: Trend,
    pub vanishing_tails: Trend,
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership<T> {
    pub label: String,
    pub cb_norm: Option<T>,
    pub conditions: Vec<Condition<T>>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct ClassifyConfig<T> {
    pub tgrid: TGrid<T>,
    /// `|ln r|` ladder for the oscillation modulus at both ends of `R+`.
    pub log_r: Vec<T>,
    pub h: Vec<T>,
    pub m: Vec<T>,
    /// A decreasing defect sequence passes when it ends below this value.
    pub threshold: T,
    pub norm: NormConfig<T>,
    pub cm: CmConfig<T>,
}

impl<T: Real> Default for ClassifyConfig<T> {
    fn default() -> Self {
        let cap = T::max_log() * T::lit(0.95);
        let log_r = (0..16)
            .map(|k| T::lit(5.0 * 2f64.powi(k)))
            .take_while(|u| *u <= cap)
            .collect();
        Self {
            tgrid: TGrid::default(),
            log_r,
            h: (1..=8).map(|k| T::lit(2f64.powi(-2 * k))).collect(),
            m: (0..=12).map(|k| T::lit(2f64.powi(k))).collect(),
            threshold: T::lit(1e-3),
            norm: NormConfig::default(),
            cm: CmConfig::default(),
        }
    }
}

/// Reads a trend off a defect sequence ordered toward the limit.
///
/// `Pass`: non-increasing and ending below `threshold`. `Fail`: ending above
/// `threshold` with less than a halving over the whole ladder.
/// `Inconclusive` otherwise.
pub fn trend_of<T: Real>(values: &[T], threshold: T) -> Trend {
    let Some(&last) = values.last() else {
        return Trend::Inconclusive;
    };
    let slack = T::lit(1e-12);
    let monotone = values
        .windows(2)
        .all(|w| w[1] <= w[0] * (T::one() + T::lit(1e-9)) + slack);
    if monotone && last < threshold {
        Trend::Pass
    } else if last >= threshold && last >= values[0] * T::lit(0.5) {
        Trend::Fail
    } else {
        Trend::Inconclusive
    }
}

fn failed<T>(name: &str, note: String) -> Condition<T> {
    Condition {
        name: name.to_string(),
        parameters: Vec::new(),
        values: Vec::new(),
        trend: Trend::Fail,
        note: Some(note),
    }
}

fn measured<T: Real>(name: &str, parameters: Vec<T>, values: Vec<T>, threshold: T) -> Condition<T> {
    let trend = trend_of(&values, threshold);
    Condition {
        name: name.to_string(),
        parameters,
        values,
        trend,
        note: None,
    }
}

fn combine(a: Trend, b: Trend) -> Trend {
    match (a, b) {
        (Trend::Fail, _) | (_, Trend::Fail) => Trend::Fail,
        (Trend::Pass, Trend::Pass) => Trend::Pass,
        _ => Trend::Inconclusive,
    }
}

/// Measures the oscillation modulus toward `0` and `inf`, the translation
/// defect toward `h = 0` and the derivative tails toward `m = inf`.
pub fn classify<T: Real>(sym: &Symbol<T>, cfg: &ClassifyConfig<T>) -> Membership<T> {
    let mut conditions = Vec::new();

    let cb = cb_norm(sym, &cfg.tgrid, &cfg.norm);
    let (bounded, cb_value) = match &cb {
        Ok(c) => (Trend::Pass, Some(c.value)),
        Err(e) => {
            conditions.push(failed("bounded variation", e.to_string()));
            (Trend::Fail, None)
        }
    };

    let mut so = Trend::Pass;
    for (name, sign) in [("oscillation at 0", -T::one()), ("oscillation at inf", T::one())] {
        let rs: Vec<T> = cfg.log_r.iter().map(|&u| (sign * u).exp()).collect();
        let values: Result<Vec<T>, _> = rs.iter().map(|&r| cm_modulus(sym, r, &cfg.cm)).collect();
        let c = match values {
            Ok(v) => measured(name, rs, v, cfg.threshold),
            Err(e) => failed(name, e.to_string()),
        };
        so = combine(so, c.trend);
        conditions.push(c);
    }

    let translation = if bounded == Trend::Fail {
        failed("translation defect", "symbol is not of bounded variation".into())
    } else {
        let values: Result<Vec<T>, _> = cfg
            .h
            .iter()
            .map(|&h| translate_defect(sym, h, &cfg.tgrid, &cfg.norm).map(|v| v.0))
            .collect();
        match values {
            Ok(v) => measured("translation defect", cfg.h.clone(), v, cfg.threshold),
            Err(e) => failed("translation defect", e.to_string()),
        }
    };
    let e = combine(so, translation.trend);
    conditions.push(translation);

    let tails = if bounded == Trend::Fail {
        failed("derivative tails", "symbol is not of bounded variation".into())
    } else {
        let values: Result<Vec<T>, _> = cfg
            .m
            .iter()
            .map(|&m| tail_variation(sym, m, &cfg.tgrid, &cfg.norm.quad).map(|v| v.0))
            .collect();
        match values {
            Ok(v) => measured("derivative tails", cfg.m.clone(), v, cfg.threshold),
            Err(e) => failed("derivative tails", e.to_string()),
        }
    };
    let e_tilde = combine(e, tails.trend);
    conditions.push(tails);

    Membership {
        label: sym.label().to_string(),
        cb_norm: cb_value,
        conditions,
        verdict: Verdict {
            bounded,
            slowly_oscillating: combine(bounded, so),
            translation_continuous: combine(bounded, e),
            vanishing_tails: combine(bounded, e_tilde),
        },
    }
}

impl<T> Membership<T> {
    pub fn condition(&self, name: &str) -> Option<&Condition<T>> {
        self.conditions.iter().find(|c| c.name == name)
    }
}
