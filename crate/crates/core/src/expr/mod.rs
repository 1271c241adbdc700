//! Holomorphic expressions in `n` complex variables and their jets.

mod jet;
mod parser;

use std::fmt;

use num_complex::{Complex, Complex64};

use crate::error::{EvalError, ParseError};
use crate::scalar::{cast_complex, Real};

pub use jet::{HoloJet, MAX_ORDER};

/// Expression tree node. Variables are stored 0-based (`z1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Var(usize),
    Const(Complex64),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Exp(Box<Node>),
    Log(Box<Node>),
}

impl Node {
    pub fn count(&self) -> usize {
        match self {
            Node::Var(_) | Node::Const(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => 1 + a.count(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.count() + b.count(),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Var(k) => Some(*k),
            Node::Const(_) => None,
            Node::Neg(a) | Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => a.max_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.max_var().max(b.max_var()),
        }
    }

    fn jet<T: Real>(&self, z: &[Complex<T>], order: usize) -> Result<HoloJet<T>, EvalError> {
        let n = z.len();
        Ok(match self {
            Node::Var(k) => HoloJet::variable(n, order, *k, z[*k]),
            Node::Const(c) => HoloJet::constant(n, order, cast_complex(*c)),
            Node::Neg(a) => a.jet(z, order)?.neg(),
            Node::Add(a, b) => a.jet(z, order)?.add(&b.jet(z, order)?),
            Node::Sub(a, b) => a.jet(z, order)?.sub(&b.jet(z, order)?),
            Node::Mul(a, b) => a.jet(z, order)?.mul(&b.jet(z, order)?),
            Node::Div(a, b) => a.jet(z, order)?.div(&b.jet(z, order)?)?,
            Node::Pow(a, k) => a.jet(z, order)?.powi(*k)?,
            Node::Exp(a) => a.jet(z, order)?.exp(),
            Node::Log(a) => a.jet(z, order)?.ln()?,
        })
    }
}

/// A parsed holomorphic expression together with its declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    n: usize,
}

impl Expr {
    /// Wraps a tree, checking every variable index against `n`.
    pub fn new(root: Node, n: usize) -> Result<Self, ParseError> {
        if let Some(k) = root.max_var() {
            if k >= n {
                return Err(ParseError::UnknownVariable { pos: 0, index: k + 1, n });
            }
        }
        Ok(Self { root, n })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }
}

/// Parses `source` as an expression in `z1..zn`.
pub fn parse_expression(source: &str, n: usize) -> Result<Expr, ParseError> {
    parser::parse(source, n)
}

/// Evaluates the expression and its holomorphic derivatives through `order` (at most 3).
pub fn eval_jet<T: Real>(expr: &Expr, z: &[Complex<T>], order: usize) -> Result<HoloJet<T>, EvalError> {
    assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
    assert_eq!(z.len(), expr.n, "point dimension does not match expression");
    expr.root.jet(z, order)
}

/// Evaluates the expression value only.
pub fn eval<T: Real>(expr: &Expr, z: &[Complex<T>]) -> Result<Complex<T>, EvalError> {
    Ok(eval_jet(expr, z, 0)?.value())
}

fn write_f64(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.is_sign_negative() {
        write!(f, "(-{:?})", -x)
    } else {
        write!(f, "{x:?}")
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Var(k) => write!(f, "z{}", k + 1),
            Node::Const(c) => {
                if c.im == 0.0 {
                    write_f64(f, c.re)
                } else {
                    write!(f, "(")?;
                    write_f64(f, c.re)?;
                    write!(f, " + ")?;
                    write_f64(f, c.im)?;
                    write!(f, "*i)")
                }
            }
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, k) => {
                if *k < 0 {
                    write!(f, "({a})^({k})")
                } else {
                    write!(f, "({a})^{k}")
                }
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log(a) => write!(f, "log({a})"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}
