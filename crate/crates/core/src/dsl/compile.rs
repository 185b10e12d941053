//! Compilation of expressions to evaluable symbols.

use std::sync::Arc;

use num_complex::Complex;

use super::ast::{BinOp, Const, Expr, Func, Var};
use super::calculus::{derivative, limits};
use super::print_expr;
use crate::scalar::{cx, Cx, Real};
use crate::symbol::{Symbol, SymbolSource};

/// Expression tree with constants converted to the scalar type and folded.
#[derive(Debug, Clone)]
pub enum Compiled<T> {
    C(Cx<T>),
    T,
    X,
    Neg(Box<Compiled<T>>),
    Call(Func, Box<Compiled<T>>),
    Bin(BinOp, Box<Compiled<T>>, Box<Compiled<T>>),
    Powi(Box<Compiled<T>>, i32),
    Powf(Box<Compiled<T>>, T),
    Band {
        lo: T,
        hi: T,
        inside: Box<Compiled<T>>,
        outside: Box<Compiled<T>>,
    },
}

fn p_plus_real<T: Real>(x: T) -> T {
    (T::one() + (-(T::PI() + T::PI()) * x).exp()).recip()
}

fn p_plus_complex<T: Real>(z: Cx<T>) -> Cx<T> {
    if z.im == T::zero() {
        return cx(p_plus_real(z.re));
    }
    let w = z * cx(-(T::PI() + T::PI()));
    if w.re > T::max_log() * T::lit(0.9) {
        // 1/(1 + e^w) ~ e^{-w} once e^w dominates.
        return (-w).exp();
    }
    (cx::<T>(T::one()) + w.exp()).inv()
}

fn apply<T: Real>(f: Func, z: Cx<T>) -> Cx<T> {
    let real = z.im == T::zero();
    match f {
        Func::Exp if real => cx(z.re.exp()),
        Func::Exp => z.exp(),
        Func::Ln if real && z.re >= T::zero() => cx(z.re.ln()),
        Func::Ln => z.ln(),
        Func::Sin if real => cx(z.re.sin()),
        Func::Sin => z.sin(),
        Func::Cos if real => cx(z.re.cos()),
        Func::Cos => z.cos(),
        Func::Tanh if real => cx(z.re.tanh()),
        Func::Tanh => {
            // (1 + tanh(w))/2 = pplus(w/pi)
            let p = p_plus_complex(z / cx(T::PI()));
            p * cx(T::lit(2.0)) - cx(T::one())
        }
        Func::Atan if real => cx(z.re.atan()),
        Func::Atan => z.atan(),
        Func::PPlus => p_plus_complex(z),
        Func::PMinus => p_plus_complex(-z),
    }
}

impl<T: Real> Compiled<T> {
    pub fn eval(&self, t: T, x: T) -> Cx<T> {
        match self {
            Compiled::C(c) => *c,
            Compiled::T => cx(t),
            Compiled::X => cx(x),
            Compiled::Neg(e) => -e.eval(t, x),
            Compiled::Call(f, e) => apply(*f, e.eval(t, x)),
            Compiled::Bin(op, l, r) => {
                let (a, b) = (l.eval(t, x), r.eval(t, x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => {
                        if a.im == T::zero() && b.im == T::zero() {
                            cx(a.re * b.re)
                        } else {
                            a * b
                        }
                    }
                    BinOp::Div => {
                        if a.im == T::zero() && b.im == T::zero() {
                            cx(a.re / b.re)
                        } else {
                            a / b
                        }
                    }
                }
            }
            Compiled::Powi(e, k) => {
                let z = e.eval(t, x);
                if z.im == T::zero() {
                    cx(z.re.powi(*k))
                } else {
                    z.powi(*k)
                }
            }
            Compiled::Powf(e, k) => {
                let z = e.eval(t, x);
                if z.im == T::zero() && z.re >= T::zero() {
                    cx(z.re.powf(*k))
                } else {
                    z.powf(*k)
                }
            }
            Compiled::Band {
                lo,
                hi,
                inside,
                outside,
            } => {
                if *lo <= t && t <= *hi {
                    inside.eval(t, x)
                } else {
                    outside.eval(t, x)
                }
            }
        }
    }

    fn fold(self) -> Self {
        if matches!(self, Compiled::C(_)) || self.has_var() {
            return self;
        }
        Compiled::C(self.eval(T::one(), T::zero()))
    }

    fn has_var(&self) -> bool {
        match self {
            Compiled::C(_) => false,
            Compiled::T | Compiled::X | Compiled::Band { .. } => true,
            Compiled::Neg(e) | Compiled::Call(_, e) | Compiled::Powi(e, _) | Compiled::Powf(e, _) => e.has_var(),
            Compiled::Bin(_, l, r) => l.has_var() || r.has_var(),
        }
    }
}

/// Converts an expression to a [`Compiled`] tree, folding constant subtrees.
pub fn compile<T: Real>(e: &Expr) -> Compiled<T> {
    let node = match e {
        Expr::Num(v) => Compiled::C(cx(T::lit(*v))),
        Expr::Imag(v) => Compiled::C(Complex::new(T::zero(), T::lit(*v))),
        Expr::Const(Const::Pi) => Compiled::C(cx(T::PI())),
        Expr::Const(Const::E) => Compiled::C(cx(T::E())),
        Expr::Const(Const::I) => Compiled::C(Complex::new(T::zero(), T::one())),
        Expr::Var(Var::T) => Compiled::T,
        Expr::Var(Var::X) => Compiled::X,
        Expr::Neg(inner) => Compiled::Neg(Box::new(compile(inner))),
        Expr::Call(f, arg) => Compiled::Call(*f, Box::new(compile(arg))),
        Expr::Bin(op, l, r) => Compiled::Bin(*op, Box::new(compile(l)), Box::new(compile(r))),
        Expr::Pow(base, k) => {
            let b = Box::new(compile(base));
            if k.fract() == 0.0 && k.abs() <= 64.0 {
                Compiled::Powi(b, *k as i32)
            } else {
                Compiled::Powf(b, T::lit(*k))
            }
        }
        Expr::Band {
            lo,
            hi,
            inside,
            outside,
        } => Compiled::Band {
            lo: T::lit(*lo),
            hi: T::lit(*hi),
            inside: Box::new(compile(inside)),
            outside: Box::new(compile(outside)),
        },
    };
    node.fold()
}

/// Compiles an expression with explicit derivative and limits.
pub(crate) fn assemble<T: Real>(
    expr: &Expr,
    dx: Option<&Expr>,
    xlim: Option<(Expr, Expr)>,
    label: String,
) -> Symbol<T> {
    let values = Arc::new(compile::<T>(expr));
    let v = values.clone();
    let mut sym = Symbol::new(label, move |t, x| v.eval(t, x));
    if let Some(d) = dx {
        let d = compile::<T>(d);
        sym = sym.with_dx(move |t, x| d.eval(t, x));
    }
    if let Some((m, p)) = &xlim {
        let (cm, cp) = (compile::<T>(m), compile::<T>(p));
        sym = sym.with_xlim(move |t| (cm.eval(t, T::zero()), cp.eval(t, T::zero())));
    }
    if !expr.depends_on(Var::T) {
        let (a, b) = (values.clone(), values);
        sym = sym.with_tlim(move |x| a.eval(T::one(), x), move |x| b.eval(T::one(), x));
    }
    sym.with_source(SymbolSource {
        expr: expr.clone(),
        xlim,
    })
}

/// Compiles an expression to a symbol with symbolic `d/dx` and, when both are
/// finite, symbolic limits at `x = +-inf`.
pub fn to_symbol<T: Real>(e: &Expr) -> Symbol<T> {
    let d = derivative(e);
    assemble(e, Some(&d), limits(e), print_expr(e))
}
