//! Canonical printing with the fewest parentheses that still reparse to the same tree.

use super::ast::{BinOp, Const, Expr, Var};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Pow(..) => POW,
        _ => ATOM,
    }
}

fn number(v: f64) -> String {
    // -0.0 would print as "-0" and reparse as a negation.
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn write_at(out: &mut String, e: &Expr, min_prec: u8) {
    if precedence(e) < min_prec {
        out.push('(');
        write(out, e);
        out.push(')');
    } else {
        write(out, e);
    }
}

fn write(out: &mut String, e: &Expr) {
    match e {
        Expr::Num(v) => out.push_str(&number(*v)),
        Expr::Imag(v) => {
            out.push_str(&number(*v));
            out.push('i');
        }
        Expr::Var(Var::T) => out.push('t'),
        Expr::Var(Var::X) => out.push('x'),
        Expr::Const(Const::Pi) => out.push_str("pi"),
        Expr::Const(Const::E) => out.push('e'),
        Expr::Const(Const::I) => out.push('i'),
        Expr::Neg(inner) => {
            out.push('-');
            write_at(out, inner, NEG);
        }
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write(out, arg);
            out.push(')');
        }
        Expr::Bin(op, l, r) => {
            let p = precedence(e);
            write_at(out, l, p);
            out.push_str(match op {
                BinOp::Add => " + ",
                BinOp::Sub => " - ",
                BinOp::Mul => "*",
                BinOp::Div => "/",
            });
            // Left associativity: an equal-precedence right operand needs parentheses.
            write_at(out, r, p + 1);
        }
        Expr::Pow(base, k) => {
            write_at(out, base, POW);
            out.push('^');
            out.push_str(&number(*k));
        }
        Expr::Band {
            lo,
            hi,
            inside,
            outside,
        } => {
            out.push_str("tband(");
            out.push_str(&number(*lo));
            out.push_str(", ");
            out.push_str(&number(*hi));
            out.push_str(", ");
            write(out, inside);
            out.push_str(", ");
            write(out, outside);
            out.push(')');
        }
    }
}

/// Prints an expression in canonical form.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write(&mut out, e);
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn canon(src: &str) -> String {
        print_expr(&parse(src).unwrap())
    }

    #[test]
    fn documented_forms() {
        assert_eq!(canon("2+tanh(pi*x)"), "2 + tanh(pi*x)");
        assert_eq!(canon(" ( x ) "), "x");
    }

    #[test]
    fn parentheses_only_where_needed() {
        assert_eq!(canon("(x*t)*2"), "x*t*2");
        assert_eq!(canon("x*(t*2)"), "x*(t*2)");
        assert_eq!(canon("x - (t - 1)"), "x - (t - 1)");
        assert_eq!(canon("(-x)^2"), "(-x)^2");
        assert_eq!(canon("-(x^2)"), "-x^2");
        assert_eq!(canon("(x^2)^3"), "x^2^3");
        assert_eq!(canon("x^(-1)"), "x^-1");
        assert_eq!(canon("-(x*t)"), "-(x*t)");
        assert_eq!(canon("x*-t"), "x*-t");
        assert_eq!(canon("tband(0.5,2,x,1)"), "tband(0.5, 2, x, 1)");
    }
}
