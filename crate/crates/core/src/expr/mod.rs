//! Scalar expressions over chart coordinates.
//!
//! Fields are parsed once against an ordered coordinate list and evaluated
//! either to a plain value or to a second-order [`Jet`].

mod parse;

use std::fmt;
use std::sync::Arc;

use crate::error::{EvalError, ParseError};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Index into the coordinate list.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
        }
    }

    fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / d
            }
            Expr::Pow(a, k) => {
                let v = a.eval(x)?;
                if *k < 0 && v == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                v.powi(*k)
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln if v <= 0.0 => return Err(EvalError::LogOfNonPositive(v)),
                    Func::Ln => v.ln(),
                    Func::Sqrt if v < 0.0 => return Err(EvalError::SqrtOfNegative(v)),
                    Func::Sqrt => v.sqrt(),
                }
            }
        })
    }

    fn eval_jet(&self, x: &[f64]) -> Result<Jet, EvalError> {
        let n = x.len();
        Ok(match self {
            Expr::Const(c) => Jet::constant(n, *c),
            Expr::Var(i) => Jet::variable(n, *i, x[*i]),
            Expr::Neg(a) => a.eval_jet(x)?.neg(),
            Expr::Add(a, b) => a.eval_jet(x)?.add(&b.eval_jet(x)?),
            Expr::Sub(a, b) => a.eval_jet(x)?.sub(&b.eval_jet(x)?),
            Expr::Mul(a, b) => a.eval_jet(x)?.mul(&b.eval_jet(x)?),
            Expr::Div(a, b) => a.eval_jet(x)?.div(&b.eval_jet(x)?)?,
            Expr::Pow(a, k) => a.eval_jet(x)?.powi(*k)?,
            Expr::Call(f, a) => {
                let v = a.eval_jet(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln()?,
                    Func::Sqrt => v.sqrt()?,
                }
            }
        })
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => out.push(*i),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}

/// A parsed expression bound to an ordered coordinate list.
#[derive(Debug, Clone)]
pub struct ScalarField {
    ast: Expr,
    coords: Arc<[String]>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.ast == other.ast && self.coords == other.coords
    }
}

/// Parses `text` as a scalar field over `coords`.
pub fn parse(text: &str, coords: &[String]) -> Result<ScalarField, ParseError> {
    ScalarField::parse(text, Arc::from(coords))
}

impl ScalarField {
    pub fn parse(text: &str, coords: Arc<[String]>) -> Result<Self, ParseError> {
        let ast = parse::Parser::parse(text, &coords)?;
        Ok(ScalarField { ast, coords })
    }

    pub fn constant(value: f64, coords: Arc<[String]>) -> Self {
        ScalarField {
            ast: Expr::Const(value),
            coords,
        }
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    /// Coordinate indices the expression actually references, sorted.
    pub fn referenced(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.ast.collect_vars(&mut v);
        v.sort_unstable();
        v.dedup();
        v
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.coords.len() {
            return Err(EvalError::DimensionMismatch {
                expected: self.coords.len(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_dim(x)?;
        self.ast.eval(x)
    }

    /// Value, gradient and Hessian at `x` by forward-mode differentiation.
    pub fn evaluate_jet(&self, x: &[f64]) -> Result<Jet, EvalError> {
        self.check_dim(x)?;
        self.ast.eval_jet(x)
    }
}

struct Show<'a> {
    expr: &'a Expr,
    coords: &'a [String],
}

impl Show<'_> {
    fn child<'b>(&'b self, e: &'b Expr) -> Show<'b> {
        Show {
            expr: e,
            coords: self.coords,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        if e.precedence() < min_prec {
            write!(f, "({})", self.child(e))
        } else {
            write!(f, "{}", self.child(e))
        }
    }
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr, p: u8| {
            self.write_at(f, a, p)?;
            write!(f, " {op} ")?;
            self.write_at(f, b, p + 1)
        };
        match self.expr {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(i) => write!(f, "{}", self.coords[*i]),
            Expr::Neg(a) => {
                write!(f, "-")?;
                self.write_at(f, a, 3)
            }
            Expr::Add(a, b) => binary(f, a, "+", b, 1),
            Expr::Sub(a, b) => binary(f, a, "-", b, 1),
            Expr::Mul(a, b) => binary(f, a, "*", b, 2),
            Expr::Div(a, b) => binary(f, a, "/", b, 2),
            Expr::Pow(a, k) => {
                self.write_at(f, a, 5)?;
                write!(f, "^{k}")
            }
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
        }
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Show {
            expr: &self.ast,
            coords: &self.coords,
        }
        .fmt(f)
    }
}
