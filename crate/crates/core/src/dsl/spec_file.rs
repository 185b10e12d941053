//! JSON symbol specification files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::calculus::{derivative, limits};
use super::compile::assemble;
use super::{parse, print_expr};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symbol::Symbol;

/// `{ "expr", "dx_expr"?, "xlim_minus"?, "xlim_plus"?, "label" }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    pub expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx_expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xlim_minus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xlim_plus: Option<String>,
    #[serde(default)]
    pub label: String,
}

impl SymbolSpec {
    pub fn inline(expr: &str) -> Self {
        Self {
            expr: expr.to_string(),
            dx_expr: None,
            xlim_minus: None,
            xlim_plus: None,
            label: expr.trim().to_string(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::SymbolFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// A file path when one exists, otherwise an inline expression.
    pub fn resolve(arg: &str) -> Result<Self> {
        let p = Path::new(arg);
        if p.is_file() {
            Self::load(p)
        } else {
            Ok(Self::inline(arg))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Spec of a symbol that remembers its expression tree.
    pub fn from_symbol<T: Real>(sym: &Symbol<T>) -> Option<Self> {
        let src = sym.source()?;
        Some(Self {
            expr: print_expr(&src.expr),
            dx_expr: None,
            xlim_minus: src.xlim.as_ref().map(|(m, _)| print_expr(m)),
            xlim_plus: src.xlim.as_ref().map(|(_, p)| print_expr(p)),
            label: sym.label().to_string(),
        })
    }

    /// Compiles the spec. Missing derivative and limits are derived symbolically.
    pub fn to_symbol<T: Real>(&self) -> Result<Symbol<T>> {
        let expr = parse(&self.expr)?;
        let dx = match &self.dx_expr {
            Some(s) => parse(s)?,
            None => derivative(&expr),
        };
        let xlim = match (&self.xlim_minus, &self.xlim_plus) {
            (Some(m), Some(p)) => Some((parse(m)?, parse(p)?)),
            (None, None) => limits(&expr),
            _ => {
                return Err(Error::SymbolFile(
                    "xlim_minus and xlim_plus must be given together".into(),
                ))
            }
        };
        let label = if self.label.is_empty() {
            print_expr(&expr)
        } else {
            self.label.clone()
        };
        Ok(assemble(&expr, Some(&dx), xlim, label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_compile() {
        let spec = SymbolSpec::from_json(r#"{"expr": "2 + pplus(x)", "label": "two plus"}"#).unwrap();
        let s = spec.to_symbol::<f64>().unwrap();
        assert_eq!(s.label(), "two plus");
        let (m, p) = s.declared_xlim(1.0).unwrap();
        assert_eq!((m.re, p.re), (2.0, 3.0));
        let back = SymbolSpec::from_symbol(&s).unwrap();
        assert_eq!(back.xlim_minus.as_deref(), Some("2"));
        assert_eq!(SymbolSpec::from_json(&back.to_json()).unwrap(), back);
    }

    #[test]
    fn rejects_unknown_fields_and_half_limits() {
        assert!(SymbolSpec::from_json(r#"{"expr": "x", "lable": "typo"}"#).is_err());
        let spec = SymbolSpec::from_json(r#"{"expr": "x", "xlim_minus": "0", "label": ""}"#).unwrap();
        assert!(spec.to_symbol::<f64>().is_err());
    }
}
