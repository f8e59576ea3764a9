//! A small expression language for user-defined metric components.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?          exponent must be constant
//! atom  := number | 'pi' | 't' | 'x0'..'x6' | func '(' expr ')'
//!        | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//! func  := exp | log | sin | cos | sqrt
//! ```
//!
//! `t` and `x0` both name the time coordinate.

use std::fmt;

use crate::error::{Error, Result};
use crate::jet::Jet3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected trailing input in '{src}'"
            )));
        }
        Ok(e)
    }

    /// Highest coordinate index referenced, if any.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.max_variable(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_variable(), b.max_variable()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    fn constant_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Neg(a) => a.constant_value().map(|v| -v),
            _ => None,
        }
    }

    /// Evaluates the expression on coordinate jets.
    pub fn eval(&self, coords: &[Jet3]) -> Result<Jet3> {
        let n = coords
            .first()
            .map(Jet3::n)
            .ok_or_else(|| Error::Expression("no coordinates".into()))?;
        self.eval_inner(coords, n)
    }

    fn eval_inner(&self, x: &[Jet3], n: usize) -> Result<Jet3> {
        Ok(match self {
            Expr::Const(c) => Jet3::constant(n, *c),
            Expr::Var(i) => x
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Expression(format!("coordinate x{i} out of range")))?,
            Expr::Neg(a) => a.eval_inner(x, n)?.scale(-1.0),
            Expr::Add(a, b) => a.eval_inner(x, n)?.try_add(&b.eval_inner(x, n)?)?,
            Expr::Sub(a, b) => a.eval_inner(x, n)?.try_sub(&b.eval_inner(x, n)?)?,
            Expr::Mul(a, b) => a.eval_inner(x, n)?.try_mul(&b.eval_inner(x, n)?)?,
            Expr::Div(a, b) => a.eval_inner(x, n)?.try_div(&b.eval_inner(x, n)?)?,
            Expr::Call(f, a) => {
                let v = a.eval_inner(x, n)?;
                match f {
                    Func::Exp => v.exp(),
                    Func::Log => v.ln()?,
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => v.sqrt()?,
                }
            }
            Expr::Pow(a, p) => a.eval_inner(x, n)?.powf(*p)?,
        })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(0) => write!(f, "t"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({a})")
            }
            Expr::Pow(a, p) => write!(f, "({a}^{p})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Expression(format!("bad number '{s}'")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: char) -> Result<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(Error::Expression(format!("expected '{op}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exponent = self.unary()?;
            let p = exponent
                .constant_value()
                .ok_or_else(|| Error::Expression("exponent must be a constant".into()))?;
            return Ok(Expr::Pow(Box::new(base), p));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                self.ident(&name)
            }
            other => Err(Error::Expression(format!("unexpected token {other:?}"))),
        }
    }

    fn ident(&mut self, name: &str) -> Result<Expr> {
        let func = match name {
            "t" => return Ok(Expr::Var(0)),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "pow" => None,
            _ => {
                if let Some(i) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if i <= 6 {
                        return Ok(Expr::Var(i));
                    }
                }
                return Err(Error::Expression(format!("unknown identifier '{name}'")));
            }
        };
        self.expect_op('(')?;
        let arg = self.expr()?;
        let e = match func {
            Some(f) => Expr::Call(f, Box::new(arg)),
            None => {
                self.expect_op(',')?;
                let exponent = self.expr()?;
                let p = exponent
                    .constant_value()
                    .ok_or_else(|| Error::Expression("pow exponent must be a constant".into()))?;
                Expr::Pow(Box::new(arg), p)
            }
        };
        self.expect_op(')')?;
        Ok(e)
    }
}
