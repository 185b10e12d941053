//! The symbol expression language: parsing, printing, differentiation and compilation.

mod ast;
mod calculus;
mod compile;
mod parser;
mod printer;
mod spec_file;

pub use ast::{BinOp, Const, Expr, Func, Var};
pub use calculus::{derivative, eval_f64, limit, limits, LimitForm};
pub use compile::{compile, to_symbol, Compiled};
pub use parser::{parse, slowly_oscillating, ParseError, ParseErrorKind};
pub use printer::print_expr;
pub use spec_file::SymbolSpec;

pub(crate) use calculus::{s_add, s_div, s_mul, s_sub};
