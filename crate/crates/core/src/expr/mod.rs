//! Single-variable expressions: parsing, evaluation and exact first derivatives.
//!
//! The textual grammar is the input format of every `--fn` flag of the CLI.
//! Derivatives come from forward-mode propagation of [`DualValue`]s through the
//! tree, so callers never have to supply `f'` by hand.

mod dual;
mod parse;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub use dual::{powi_exact, DualValue};
pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Sin,
    Cos,
    Abs,
    Sqrt,
}

impl UnaryOp {
    /// Builtin functions callable as `name(expr)`.
    pub const FUNCTIONS: [UnaryOp; 6] = [
        UnaryOp::Exp,
        UnaryOp::Ln,
        UnaryOp::Sin,
        UnaryOp::Cos,
        UnaryOp::Abs,
        UnaryOp::Sqrt,
    ];

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "abs" => UnaryOp::Abs,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Abs => "abs",
            UnaryOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

/// Expression tree in the variable `x`. Immutable once built; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

/// Numbers the evaluator can run on: plain `f64` for values, [`DualValue`] for
/// value-and-derivative.
trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn variable(x: f64) -> Self;
    fn value(&self) -> f64;
    fn varies(&self) -> bool;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i64) -> Self;
    fn powf(self, e: Self) -> Self;
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn variable(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn varies(&self) -> bool {
        false
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i64) -> Self {
        powi_exact(self, n)
    }
    fn powf(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

impl Scalar for DualValue {
    fn constant(c: f64) -> Self {
        DualValue::constant(c)
    }
    fn variable(x: f64) -> Self {
        DualValue::variable(x)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn varies(&self) -> bool {
        self.derivative != 0.0
    }
    fn exp(self) -> Self {
        DualValue::exp(self)
    }
    fn ln(self) -> Self {
        DualValue::ln(self)
    }
    fn sin(self) -> Self {
        DualValue::sin(self)
    }
    fn cos(self) -> Self {
        DualValue::cos(self)
    }
    fn abs(self) -> Self {
        DualValue::abs(self)
    }
    fn sqrt(self) -> Self {
        DualValue::sqrt(self)
    }
    fn powi(self, n: i64) -> Self {
        DualValue::powi(self, n)
    }
    fn powf(self, e: Self) -> Self {
        DualValue::powf(self, e)
    }
}

/// Exponents with integral value and magnitude below this use repeated multiplication.
const MAX_INTEGER_EXPONENT: f64 = 1.0e9;

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Parse from the textual grammar; see [`parse`].
    pub fn parse(source: &str) -> Result<Expr> {
        parse(source)
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.walk(f64::variable(x))?;
        if !v.is_finite() {
            return Err(Error::domain(format!("non-finite value at x = {x}")));
        }
        Ok(v)
    }

    /// Value and exact first derivative at `x` by forward-mode propagation.
    ///
    /// `abs` has derivative 0 at 0. Points where the derivative is unbounded
    /// (e.g. `sqrt` at 0) are reported as domain errors.
    pub fn eval_derivative(&self, x: f64) -> Result<DualValue> {
        let d = self.walk(DualValue::variable(x))?;
        if !d.value.is_finite() {
            return Err(Error::domain(format!("non-finite value at x = {x}")));
        }
        if !d.derivative.is_finite() {
            return Err(Error::domain(format!("not differentiable at x = {x}")));
        }
        Ok(d)
    }

    /// `x -> f(x)` as a closure.
    pub fn function(&self) -> impl Fn(f64) -> Result<f64> + Sync + '_ {
        move |x| self.eval(x)
    }

    /// `x -> f'(x)` as a closure.
    pub fn derivative(&self) -> impl Fn(f64) -> Result<f64> + Sync + '_ {
        move |x| self.eval_derivative(x).map(|d| d.derivative)
    }

    fn walk<S: Scalar>(&self, x: S) -> Result<S> {
        Ok(match self {
            Expr::Const(c) => S::constant(*c),
            Expr::Var => x,
            Expr::Unary(op, arg) => {
                let u = arg.walk(x)?;
                match op {
                    UnaryOp::Neg => -u,
                    UnaryOp::Exp => u.exp(),
                    UnaryOp::Ln => {
                        if u.value() <= 0.0 {
                            return Err(Error::domain(format!("ln of non-positive value {}", u.value())));
                        }
                        u.ln()
                    }
                    UnaryOp::Sin => u.sin(),
                    UnaryOp::Cos => u.cos(),
                    UnaryOp::Abs => u.abs(),
                    UnaryOp::Sqrt => {
                        if u.value() < 0.0 {
                            return Err(Error::domain(format!("sqrt of negative value {}", u.value())));
                        }
                        u.sqrt()
                    }
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.walk(x)?;
                let r = rhs.walk(x)?;
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => {
                        if r.value() == 0.0 {
                            return Err(Error::domain("division by zero"));
                        }
                        l / r
                    }
                    BinaryOp::Pow => pow(l, r)?,
                }
            }
        })
    }
}

fn pow<S: Scalar>(base: S, exponent: S) -> Result<S> {
    let e = exponent.value();
    let integral = e.fract() == 0.0 && e.abs() < MAX_INTEGER_EXPONENT;
    if integral && !exponent.varies() {
        if e < 0.0 && base.value() == 0.0 {
            return Err(Error::domain("zero raised to a negative power"));
        }
        return Ok(base.powi(e as i64));
    }
    if base.value() <= 0.0 {
        return Err(Error::domain(format!(
            "non-integer or variable exponent requires a positive base, got {}",
            base.value()
        )));
    }
    Ok(base.powf(exponent))
}

/// Fully parenthesised source text that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, arg) => match **arg {
                Expr::Unary(UnaryOp::Neg, _) | Expr::Const(_) => write!(f, "-({arg})"),
                _ => write!(f, "-{arg}"),
            },
            Expr::Unary(op, arg) => write!(f, "{}({arg})", op.name()),
            Expr::Binary(op, lhs, rhs) => write!(f, "({lhs} {} {rhs})", op.symbol()),
        }
    }
}
