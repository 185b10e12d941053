//! Serialized output: JSON with 17 significant digits, CSV with shortest round-trip numbers.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fredholm::DecayProfile;
use crate::scalar::Real;
use crate::symbol::{classify, v_norm_report, ClassifyConfig, Membership, NormConfig, Symbol, TGrid, VNormReport};

fn json_err(e: serde_json::Error) -> Error {
    Error::InvalidArgument(format!("serialization: {e}"))
}

/// `v` printed with 17 significant digits.
pub fn format_f64_17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Shortest text that parses back to `v`; plain notation for moderate magnitudes.
pub fn format_shortest(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => out.push_str(&u.to_string()),
            (_, Some(i), _) if !n.is_f64() => out.push_str(&i.to_string()),
            (_, _, Some(f)) => out.push_str(&format_f64_17(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short arrays of scalars, such as complex pairs, stay on one line.
            let flat = items.len() <= 4 && items.iter().all(|i| !i.is_array() && !i.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if flat {
                    if k > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    out.push_str(&pad(indent + 1));
                }
                write_value(out, item, indent + 1);
            }
            if !flat {
                out.push('\n');
                out.push_str(&pad(indent));
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("keys serialize"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
            }
            out.push('\n');
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON in which every floating-point number carries 17 significant
/// digits. Non-finite values become `null`.
pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let v = serde_json::to_value(value).map_err(json_err)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

/// One line of a quantities CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub quantity: String,
    pub parameter: Option<f64>,
    pub value: f64,
    pub error_bound: Option<f64>,
}

impl Quantity {
    pub fn new(quantity: impl Into<String>, parameter: Option<f64>, value: f64, error_bound: Option<f64>) -> Self {
        Self {
            quantity: quantity.into(),
            parameter,
            value,
            error_bound,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_shortest).unwrap_or_default()
}

/// `quantity,parameter,value,error_bound`
pub fn write_quantities_csv<W: Write>(rows: &[Quantity], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    out.write_record(["quantity", "parameter", "value", "error_bound"])
        .map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.quantity.clone(),
            opt(r.parameter),
            format_shortest(r.value),
            opt(r.error_bound),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `series,n,k,sigma` with `k` starting at 1.
pub fn write_decay_csv<T: Real, W: Write>(series: &[(&str, &[DecayProfile<T>])], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    out.write_record(["series", "n", "k", "sigma"]).map_err(csv_err)?;
    for (name, profiles) in series {
        for p in profiles.iter() {
            for (k, s) in p.sigmas.iter().enumerate() {
                out.write_record([
                    name.to_string(),
                    p.n.to_string(),
                    (k + 1).to_string(),
                    format_shortest(s.as_f64()),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Norms and class-membership evidence of one symbol.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport<T> {
    pub label: String,
    pub norms: VNormReport<T>,
    pub membership: Membership<T>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeConfig<T> {
    pub tgrid: TGrid<T>,
    pub norm: NormConfig<T>,
    pub classify: ClassifyConfig<T>,
    pub rs: Vec<T>,
    pub hs: Vec<T>,
    pub ms: Vec<T>,
}

impl<T: Real> Default for AnalyzeConfig<T> {
    fn default() -> Self {
        Self {
            tgrid: TGrid::default(),
            norm: NormConfig::default(),
            classify: ClassifyConfig::default(),
            rs: [1e-6, 1e-3, 1.0, 1e3, 1e6].into_iter().map(T::lit).collect(),
            hs: [1e-3, 1e-2, 1e-1, 1.0].into_iter().map(T::lit).collect(),
            ms: [1.0, 4.0, 16.0].into_iter().map(T::lit).collect(),
        }
    }
}

pub fn analyze<T: Real>(sym: &Symbol<T>, cfg: &AnalyzeConfig<T>) -> Result<AnalyzeReport<T>> {
    let norms = v_norm_report(sym, &cfg.tgrid, &cfg.rs, &cfg.hs, &cfg.ms, &cfg.norm)?;
    let classify_cfg = ClassifyConfig {
        tgrid: cfg.tgrid.clone(),
        norm: cfg.norm.clone(),
        ..cfg.classify.clone()
    };
    let membership = classify(sym, &classify_cfg);
    Ok(AnalyzeReport {
        label: sym.label().to_string(),
        norms,
        membership,
    })
}

impl<T: Real> AnalyzeReport<T> {
    pub fn quantities(&self) -> Vec<Quantity> {
        let n = &self.norms;
        let err = Some(n.quadrature_error_bound.as_f64());
        let mut rows = vec![
            Quantity::new("sup_norm", Some(n.argmax_t.as_f64()), n.sup_norm.as_f64(), None),
            Quantity::new("variation", Some(n.argmax_t.as_f64()), n.variation.as_f64(), err),
            Quantity::new("cb_v_norm", None, n.v_norm.as_f64(), err),
        ];
        for v in &n.per_t {
            rows.push(Quantity::new(
                "v_norm",
                Some(v.t.as_f64()),
                v.v_norm.as_f64(),
                Some(v.error_bound.as_f64()),
            ));
        }
        for &(r, v) in &n.cm_values {
            rows.push(Quantity::new("cm_r", Some(r.as_f64()), v.as_f64(), None));
        }
        for &(h, v) in &n.translate_defect {
            rows.push(Quantity::new("translation_defect", Some(h.as_f64()), v.as_f64(), err));
        }
        for &(m, v) in &n.tail_defect {
            rows.push(Quantity::new("tail_variation", Some(m.as_f64()), v.as_f64(), err));
        }
        rows
    }
}
