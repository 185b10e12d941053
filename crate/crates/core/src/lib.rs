//! Mellin pseudodifferential operators with slowly oscillating symbols of
//! limited smoothness.
//!
//! A symbol `a(t, x)` on `R+ x R` defines `Op(a)`, the operator that multiplies
//! the Mellin transform by `a(t, .)` and reads the result at `t`. The crate
//! measures symbol norms (`V`, `C_b(V)`) and class-membership defects, builds
//! the regularizer symbol `b` of a symbol that stays away from zero on the
//! boundary, and checks on finite sections that `Op(a)Op(b) - I` has rapidly
//! decaying singular values.
//!
//! ```
//! use mellin_pdo::{dsl, FredholmConfig, Symbol64};
//!
//! let a: Symbol64 = dsl::to_symbol(&dsl::parse("pplus(x)").unwrap());
//! let v = mellin_pdo::fredholm::boundary_check(&a, &FredholmConfig::default());
//! assert!(!v.passed);
//! ```
//!
//! Everything is generic over `f32`/`f64`; the aliases below fix `f64` or `f32`.

// `!(a > b)` rejects NaN along with the ordered failures.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsl;
pub mod error;
pub mod fredholm;
pub mod lemmas;
pub mod linalg;
pub mod mellin;
pub mod quad;
pub mod regularizer;
pub mod report;
pub mod scalar;
pub mod symbol;

pub use error::{Error, Result};
pub use fredholm::{
    boundary_check, fredholm_analyze, strong_regularize, BoundaryVerdict, DecayProfile, FredholmConfig, FredholmReport,
    Outcome,
};
pub use mellin::{LogGrid, OperatorSection};
pub use regularizer::{regularize, RegularizerConfig, RegularizerResult, VerifyConfig};
pub use scalar::{Cx, FftReal, Real};
pub use symbol::{Symbol, TGrid, XGrid};

pub type Symbol64 = Symbol<f64>;
pub type Symbol32 = Symbol<f32>;
pub type LogGrid64 = LogGrid<f64>;
pub type LogGrid32 = LogGrid<f32>;
pub type OperatorSection64 = OperatorSection<f64>;
pub type OperatorSection32 = OperatorSection<f32>;
pub type RegularizerResult64 = RegularizerResult<f64>;
pub type FredholmReport64 = FredholmReport<f64>;
pub type FredholmReport32 = FredholmReport<f32>;
pub type FredholmConfig64 = FredholmConfig<f64>;
