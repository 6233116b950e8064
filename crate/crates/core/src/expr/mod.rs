//! A small single-variable expression language: numbers, the variable,
//! `+ - * /`, `^` with a constant exponent, `exp log abs sqrt max`, and the
//! constants `pi` and `e`.
//!
//! `^` binds tighter than unary minus, which binds tighter than `* /`,
//! which bind tighter than `+ -`; binary operators associate to the left.
//! `-x^2` is `-(x^2)`.

mod diff;
mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::funcs::{ConvexFunction, Interval};

pub use diff::{derivative, derivative_on, simplify};
pub use lexer::{tokenize, Token, TokenKind};

/// Syntax error at a 1-based character position.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// A singular or overflowing subexpression.
    #[error("cannot evaluate {subexpression} at {at}: {reason}")]
    Singular {
        subexpression: String,
        at: f64,
        reason: String,
    },
    /// Symbolic differentiation hit `abs` or `max` with a kink in range.
    #[error("{subexpression} is not smooth{where_}; use one-sided finite differences instead")]
    NonSmooth { subexpression: String, where_: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Log,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    Max(Box<Expr>, Box<Expr>),
}

/// Parses with `x` as the variable.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    parser::parse_with_var(src, "x")
}

pub fn parse_with_var(src: &str, var: &str) -> Result<Expr, ParseError> {
    parser::parse_with_var(src, var)
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Self {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinaryOp, l: Expr, r: Expr) -> Self {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn pow(base: Expr, exponent: f64) -> Self {
        Expr::Pow(Box::new(base), exponent)
    }

    pub fn max(l: Expr, r: Expr) -> Self {
        Expr::Max(Box::new(l), Box::new(r))
    }

    pub fn contains_var(&self) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var => true,
            Expr::Unary(_, e) | Expr::Pow(e, _) => e.contains_var(),
            Expr::Binary(_, l, r) | Expr::Max(l, r) => l.contains_var() || r.contains_var(),
        }
    }

    /// Value of a variable-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if self.contains_var() {
            None
        } else {
            self.eval(0.0).ok()
        }
    }

    /// Evaluates at `t`; singular points (log or sqrt out of range,
    /// division by zero, overflow) are errors rather than non-numbers.
    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Unary(op, e) => {
                let u = e.eval(t)?;
                match op {
                    UnaryOp::Neg => -u,
                    UnaryOp::Exp => u.exp(),
                    UnaryOp::Log if u <= 0.0 => return Err(self.singular(t, "logarithm of a nonpositive value")),
                    UnaryOp::Log => u.ln(),
                    UnaryOp::Abs => u.abs(),
                    UnaryOp::Sqrt if u < 0.0 => return Err(self.singular(t, "square root of a negative value")),
                    UnaryOp::Sqrt => u.sqrt(),
                }
            }
            Expr::Binary(op, l, r) => {
                let (u, w) = (l.eval(t)?, r.eval(t)?);
                match op {
                    BinaryOp::Add => u + w,
                    BinaryOp::Sub => u - w,
                    BinaryOp::Mul => u * w,
                    BinaryOp::Div if w == 0.0 => return Err(self.singular(t, "division by zero")),
                    BinaryOp::Div => u / w,
                }
            }
            Expr::Pow(b, p) => {
                let u = b.eval(t)?;
                if u == 0.0 && *p < 0.0 {
                    return Err(self.singular(t, "zero raised to a negative power"));
                }
                if u < 0.0 && p.fract() != 0.0 {
                    return Err(self.singular(t, "negative base with a non-integer exponent"));
                }
                power(u, *p)
            }
            Expr::Max(l, r) => l.eval(t)?.max(r.eval(t)?),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.singular(t, "overflow"))
        }
    }

    /// IEEE evaluation without singularity checks: `log(0) = -inf`,
    /// `1/0 = inf`, undefined forms give NaN.
    pub fn eval_ieee(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => t,
            Expr::Unary(op, e) => {
                let u = e.eval_ieee(t);
                match op {
                    UnaryOp::Neg => -u,
                    UnaryOp::Exp => u.exp(),
                    UnaryOp::Log => u.ln(),
                    UnaryOp::Abs => u.abs(),
                    UnaryOp::Sqrt => u.sqrt(),
                }
            }
            Expr::Binary(op, l, r) => {
                let (u, w) = (l.eval_ieee(t), r.eval_ieee(t));
                match op {
                    BinaryOp::Add => u + w,
                    BinaryOp::Sub => u - w,
                    BinaryOp::Mul => u * w,
                    BinaryOp::Div => u / w,
                }
            }
            Expr::Pow(b, p) => power(b.eval_ieee(t), *p),
            Expr::Max(l, r) => l.eval_ieee(t).max(r.eval_ieee(t)),
        }
    }

    fn singular(&self, t: f64, reason: &str) -> EvalError {
        EvalError::Singular {
            subexpression: self.to_string(),
            at: t,
            reason: reason.to_string(),
        }
    }

    /// Wraps the expression as a [`ConvexFunction`] on `domain`.
    ///
    /// When the expression is smooth on the domain (see [`derivative_on`])
    /// its symbolic derivative serves as both one-sided derivatives;
    /// otherwise difference quotients are used. Convexity is not checked.
    pub fn to_convex_function(&self, domain: Interval) -> ConvexFunction {
        let label = self.to_string();
        let f = self.clone();
        let eval = move |t: f64| f.eval(t).unwrap_or(f64::NAN);
        match derivative_on(self, domain.a(), domain.b()) {
            Ok(d) => {
                let d2 = d.clone();
                ConvexFunction::new(domain, eval, move |t| d.eval_ieee(t), move |t| d2.eval_ieee(t), label)
            }
            Err(_) => ConvexFunction::from_fn(domain, eval, label),
        }
    }
}

/// `u^p`, using integer powers where exact.
fn power(u: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        u.powi(p as i32)
    } else if p == 0.5 {
        u.sqrt()
    } else {
        u.powf(p)
    }
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(c) if *c < 0.0 => PREC_NEG,
            Expr::Const(_) | Expr::Var | Expr::Max(..) => PREC_ATOM,
            Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
            Expr::Unary(..) => PREC_ATOM,
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_SUM,
            Expr::Binary(..) => PREC_PRODUCT,
            Expr::Pow(..) => PREC_POW,
        }
    }

    fn write_var(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool| {
            if parens {
                f.write_str("(")?;
                e.write_var(f, var)?;
                f.write_str(")")
            } else {
                e.write_var(f, var)
            }
        };
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "-{}", -c),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str(var),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                child(f, e, e.precedence() < PREC_NEG)
            }
            Expr::Unary(op, e) => {
                let name = match op {
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}(")?;
                e.write_var(f, var)?;
                f.write_str(")")
            }
            Expr::Binary(op, l, r) => {
                let (sym, prec) = match op {
                    BinaryOp::Add => (" + ", PREC_SUM),
                    BinaryOp::Sub => (" - ", PREC_SUM),
                    BinaryOp::Mul => ("*", PREC_PRODUCT),
                    BinaryOp::Div => ("/", PREC_PRODUCT),
                };
                child(f, l, l.precedence() < prec)?;
                f.write_str(sym)?;
                child(f, r, r.precedence() <= prec)
            }
            Expr::Pow(b, p) => {
                child(f, b, b.precedence() <= PREC_POW)?;
                if *p < 0.0 {
                    write!(f, "^(-{})", -p)
                } else {
                    write!(f, "^{p}")
                }
            }
            Expr::Max(l, r) => {
                f.write_str("max(")?;
                l.write_var(f, var)?;
                f.write_str(", ")?;
                r.write_var(f, var)?;
                f.write_str(")")
            }
        }
    }

    /// Pretty-prints with `var` as the variable name.
    pub fn display_with_var(&self, var: &str) -> String {
        struct Shown<'a>(&'a Expr, &'a str);
        impl fmt::Display for Shown<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write_var(f, self.1)
            }
        }
        Shown(self, var).to_string()
    }
}

/// Minimal parenthesization; parsing the output gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_var(f, "x")
    }
}
