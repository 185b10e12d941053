use std::fmt;

/// Variables of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Const {
    Pi,
    E,
    I,
}

/// Built-in functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Tanh,
    Atan,
    /// `(1 + tanh(pi x)) / 2`
    PPlus,
    /// `(1 - tanh(pi x)) / 2`
    PMinus,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Tanh,
        Func::Atan,
        Func::PPlus,
        Func::PMinus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
            Func::PPlus => "pplus",
            Func::PMinus => "pminus",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Expression tree of the symbol language.
///
/// Literals are non-negative; a negative constant is `Neg(Num(..))`.
/// `Band` selects `inside` when `lo <= t <= hi` and `outside` otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Imag(f64),
    Var(Var),
    Const(Const),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Band {
        lo: f64,
        hi: f64,
        inside: Box<Expr>,
        outside: Box<Expr>,
    },
}

impl Expr {
    pub fn num(v: f64) -> Self {
        if v < 0.0 {
            Expr::Neg(Box::new(Expr::Num(-v)))
        } else {
            Expr::Num(v)
        }
    }

    pub fn t() -> Self {
        Expr::Var(Var::T)
    }

    pub fn x() -> Self {
        Expr::Var(Var::X)
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Expr::Call(f, Box::new(arg))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn sum(l: Expr, r: Expr) -> Self {
        Self::bin(BinOp::Add, l, r)
    }

    pub fn difference(l: Expr, r: Expr) -> Self {
        Self::bin(BinOp::Sub, l, r)
    }

    pub fn product(l: Expr, r: Expr) -> Self {
        Self::bin(BinOp::Mul, l, r)
    }

    pub fn quotient(l: Expr, r: Expr) -> Self {
        Self::bin(BinOp::Div, l, r)
    }

    pub fn recip(e: Expr) -> Self {
        Self::quotient(Expr::Num(1.0), e)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn pow(base: Expr, k: f64) -> Self {
        Expr::Pow(Box::new(base), k)
    }

    pub fn band(lo: f64, hi: f64, inside: Expr, outside: Expr) -> Self {
        Expr::Band {
            lo,
            hi,
            inside: Box::new(inside),
            outside: Box::new(outside),
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) | Expr::Imag(_) | Expr::Const(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => e.depends_on(var),
            Expr::Bin(_, l, r) => l.depends_on(var) || r.depends_on(var),
            Expr::Band { inside, outside, .. } => var == Var::T || inside.depends_on(var) || outside.depends_on(var),
        }
    }

    /// Replaces every occurrence of `var` by `with`.
    pub fn substitute(&self, var: Var, with: &Expr) -> Expr {
        match self {
            Expr::Var(v) if *v == var => with.clone(),
            Expr::Num(_) | Expr::Imag(_) | Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(var, with)),
            Expr::Call(f, e) => Expr::call(*f, e.substitute(var, with)),
            Expr::Pow(e, k) => Expr::pow(e.substitute(var, with), *k),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.substitute(var, with), r.substitute(var, with)),
            Expr::Band {
                lo,
                hi,
                inside,
                outside,
            } => {
                let inside = inside.substitute(var, with);
                let outside = outside.substitute(var, with);
                // A band frozen at a literal t collapses to one branch.
                match (var, with) {
                    (Var::T, Expr::Num(t)) => {
                        if *lo <= *t && *t <= *hi {
                            inside
                        } else {
                            outside
                        }
                    }
                    _ => Expr::band(*lo, *hi, inside, outside),
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 1.0)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Imag(_) | Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => 1 + e.size(),
            Expr::Bin(_, l, r) => 1 + l.size() + r.size(),
            Expr::Band { inside, outside, .. } => 1 + inside.size() + outside.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::print_expr(self))
    }
}
