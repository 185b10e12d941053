//! Recursive-descent parser for the symbol language.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := atom ('^' exponent)*
//! exponent := '-'? NUMBER | '(' '-'? NUMBER ')'
//! atom     := NUMBER 'i'? | 't' | 'x' | 'pi' | 'e' | 'i'
//!           | FUNC '(' expr ')' | 'so' '(' expr ')'
//!           | 'tband' '(' signed ',' signed ',' expr ',' expr ')'
//!           | '(' expr ')'
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Const, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    UnbalancedParenthesis,
    UnknownIdentifier(String),
    UnexpectedToken,
    UnexpectedEnd,
    ZeroDivisor,
    NonConstantArgument,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lexical => f.write_str("lexical error"),
            ParseErrorKind::UnbalancedParenthesis => f.write_str("unbalanced parenthesis"),
            ParseErrorKind::UnknownIdentifier(name) => write!(f, "unknown identifier '{name}'"),
            ParseErrorKind::UnexpectedToken => f.write_str("unexpected token"),
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::ZeroDivisor => f.write_str("division by literal zero"),
            ParseErrorKind::NonConstantArgument => f.write_str("argument must be constant"),
        }
    }
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}: expected {expected}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub expected: String,
}

impl ParseError {
    fn new(offset: usize, kind: ParseErrorKind, expected: impl Into<String>) -> Self {
        Self {
            offset,
            kind,
            expected: expected.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, ParseErrorKind::Lexical, "a number"))?;
                if !value.is_finite() {
                    return Err(ParseError::new(start, ParseErrorKind::Lexical, "a finite number"));
                }
                let imaginary =
                    i < bytes.len() && bytes[i] == b'i' && !(i + 1 < bytes.len() && is_ident_char(bytes[i + 1]));
                if imaginary {
                    i += 1;
                    out.push((Tok::Imag(value), start));
                } else {
                    out.push((Tok::Num(value), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && is_ident_char(bytes[i]) {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError::new(
                    start,
                    ParseErrorKind::Lexical,
                    "a number, identifier, operator or parenthesis",
                ))
            }
        }
        i += 1;
    }
    out.push((Tok::Eof, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        match self.peek() {
            Tok::Eof if self.depth > 0 => ParseError::new(self.offset(), ParseErrorKind::UnbalancedParenthesis, "')'"),
            Tok::Eof => ParseError::new(self.offset(), ParseErrorKind::UnexpectedEnd, expected),
            Tok::RParen if self.depth == 0 => {
                ParseError::new(self.offset(), ParseErrorKind::UnbalancedParenthesis, expected)
            }
            _ => ParseError::new(self.offset(), ParseErrorKind::UnexpectedToken, expected),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(expected))
        }
    }

    fn open(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::LParen, "'('")?;
        self.depth += 1;
        Ok(())
    }

    fn close(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::RParen, "')'")?;
        self.depth -= 1;
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let at = self.offset();
            let rhs = self.unary()?;
            if op == BinOp::Div && rhs.is_zero() {
                return Err(ParseError::new(at, ParseErrorKind::ZeroDivisor, "a non-zero divisor"));
            }
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error_here("a real number literal")),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let k = if *self.peek() == Tok::LParen {
                self.open()?;
                let k = self.signed_number()?;
                self.close()?;
                k
            } else {
                self.signed_number()?
            };
            base = Expr::pow(base, k);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (tok, at) = (self.peek().clone(), self.offset());
        match tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Imag(v) => {
                self.bump();
                Ok(Expr::Imag(v))
            }
            Tok::LParen => {
                self.open()?;
                let e = self.expr()?;
                self.close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.call(&name, at)
                } else {
                    match name.as_str() {
                        "t" => Ok(Expr::Var(Var::T)),
                        "x" => Ok(Expr::Var(Var::X)),
                        "pi" => Ok(Expr::Const(Const::Pi)),
                        "e" => Ok(Expr::Const(Const::E)),
                        "i" => Ok(Expr::Const(Const::I)),
                        _ => Err(ParseError::new(
                            at,
                            ParseErrorKind::UnknownIdentifier(name),
                            "t, x, pi, e, i or a function call",
                        )),
                    }
                }
            }
            _ => Err(self.error_here("an expression")),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        if let Some(f) = Func::from_name(name) {
            self.open()?;
            let arg = self.expr()?;
            self.close()?;
            return Ok(Expr::call(f, arg));
        }
        match name {
            "so" => {
                self.open()?;
                let arg_at = self.offset();
                let lambda = self.expr()?;
                self.close()?;
                if lambda.depends_on(Var::T) || lambda.depends_on(Var::X) {
                    return Err(ParseError::new(
                        arg_at,
                        ParseErrorKind::NonConstantArgument,
                        "a constant frequency",
                    ));
                }
                Ok(slowly_oscillating(lambda))
            }
            "tband" => {
                self.open()?;
                let lo = self.signed_number()?;
                self.expect(Tok::Comma, "','")?;
                let hi = self.signed_number()?;
                self.expect(Tok::Comma, "','")?;
                let inside = self.expr()?;
                self.expect(Tok::Comma, "','")?;
                let outside = self.expr()?;
                self.close()?;
                Ok(Expr::band(lo, hi, inside, outside))
            }
            _ => Err(ParseError::new(
                at,
                ParseErrorKind::UnknownIdentifier(name.to_string()),
                "a built-in function",
            )),
        }
    }
}

/// `sin(lambda * ln(1 + ln(1 + t + 1/t)))`, the stock slowly oscillating factor behind `so(lambda)`.
pub fn slowly_oscillating(lambda: Expr) -> Expr {
    let t = Expr::t();
    let inner = Expr::sum(Expr::sum(Expr::Num(1.0), t.clone()), Expr::recip(t));
    let phase = Expr::call(Func::Ln, Expr::sum(Expr::Num(1.0), Expr::call(Func::Ln, inner)));
    Expr::call(Func::Sin, Expr::product(lambda, phase))
}

/// Parses a symbol expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::Eof => Ok(e),
        Tok::RParen => Err(ParseError::new(
            p.offset(),
            ParseErrorKind::UnbalancedParenthesis,
            "end of input",
        )),
        _ => Err(p.error_here("an operator or end of input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pplus_of_x() {
        assert_eq!(parse("pplus(x)").unwrap(), Expr::call(Func::PPlus, Expr::x()));
    }

    #[test]
    fn sum_with_tanh() {
        let expected = Expr::sum(
            Expr::Num(2.0),
            Expr::call(Func::Tanh, Expr::product(Expr::Const(Const::Pi), Expr::x())),
        );
        assert_eq!(parse("2 + tanh(pi*x)").unwrap(), expected);
    }

    #[test]
    fn open_paren_at_end() {
        let e = parse("2 + (").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedParenthesis);
        assert_eq!(e.offset, 5);
    }

    #[test]
    fn stray_close_paren() {
        let e = parse("x)").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::UnbalancedParenthesis, 1));
    }

    #[test]
    fn unknown_identifier_and_bad_character() {
        let e = parse("1 + foo(x)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("foo".into()));
        assert_eq!(e.offset, 4);
        let e = parse("2 $ x").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::Lexical, 2));
    }

    #[test]
    fn precedence() {
        // ^ binds tighter than unary minus, which binds tighter than * and +.
        assert_eq!(parse("-x^2").unwrap(), Expr::neg(Expr::pow(Expr::x(), 2.0)));
        assert_eq!(
            parse("a").unwrap_err().kind,
            ParseErrorKind::UnknownIdentifier("a".into())
        );
        assert_eq!(
            parse("1 - x - t").unwrap(),
            Expr::difference(Expr::difference(Expr::Num(1.0), Expr::x()), Expr::t())
        );
        assert_eq!(parse("x^-1").unwrap(), Expr::pow(Expr::x(), -1.0));
        assert_eq!(parse("x^(-0.5)").unwrap(), Expr::pow(Expr::x(), -0.5));
    }

    #[test]
    fn literals() {
        assert_eq!(parse("2.5i").unwrap(), Expr::Imag(2.5));
        assert_eq!(parse("1e-3").unwrap(), Expr::Num(1e-3));
        assert_eq!(
            parse("2*e").unwrap(),
            Expr::product(Expr::Num(2.0), Expr::Const(Const::E))
        );
        assert_eq!(parse(" ( x ) ").unwrap(), Expr::x());
    }

    #[test]
    fn zero_divisor_is_rejected() {
        let e = parse("x/0").unwrap_err();
        assert_eq!((e.kind, e.offset), (ParseErrorKind::ZeroDivisor, 2));
        assert!(parse("x/0.5").is_ok());
    }

    #[test]
    fn so_sugar_and_bands() {
        let e = parse("so(2)").unwrap();
        assert_eq!(e, slowly_oscillating(Expr::Num(2.0)));
        assert_eq!(parse("so(x)").unwrap_err().kind, ParseErrorKind::NonConstantArgument);
        let b = parse("tband(0.5, 2, x, 1)").unwrap();
        assert_eq!(b, Expr::band(0.5, 2.0, Expr::x(), Expr::Num(1.0)));
    }
}
