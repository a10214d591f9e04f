#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use qbound::expr::{BinaryOp, Expr, UnaryOp};
use qbound::{Interval, Result};

/// A test function with its derivative and closed-form integral.
#[derive(Debug, Clone, Copy)]
pub struct CorpusFn {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
    /// Antiderivative, for closed-form integrals over any sub-interval.
    pub antiderivative: fn(f64) -> f64,
    pub a: f64,
    pub b: f64,
}

impl CorpusFn {
    pub fn interval(&self) -> Interval {
        Interval::new(self.a, self.b).unwrap()
    }

    pub fn func(&self) -> impl Fn(f64) -> Result<f64> + Sync {
        let f = self.f;
        move |x| Ok(f(x))
    }

    pub fn deriv(&self) -> impl Fn(f64) -> Result<f64> + Sync {
        let df = self.df;
        move |x| Ok(df(x))
    }

    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        (self.antiderivative)(b) - (self.antiderivative)(a)
    }

    pub fn exact_mean_over(&self, a: f64, b: f64) -> f64 {
        self.integral_over(a, b) / (b - a)
    }

    pub fn exact_mean(&self) -> f64 {
        self.exact_mean_over(self.a, self.b)
    }

    pub fn on(self, a: f64, b: f64) -> CorpusFn {
        CorpusFn { a, b, ..self }
    }
}

pub fn square() -> CorpusFn {
    CorpusFn {
        name: "x^2",
        f: |x| x * x,
        df: |x| 2.0 * x,
        antiderivative: |x| x * x * x / 3.0,
        a: 0.0,
        b: 1.0,
    }
}

pub fn cube() -> CorpusFn {
    CorpusFn {
        name: "x^3",
        f: |x| x * x * x,
        df: |x| 3.0 * x * x,
        antiderivative: |x| x.powi(4) / 4.0,
        a: 0.0,
        b: 1.0,
    }
}

pub fn sixth() -> CorpusFn {
    CorpusFn {
        name: "x^6",
        f: |x| x.powi(6),
        df: |x| 6.0 * x.powi(5),
        antiderivative: |x| x.powi(7) / 7.0,
        a: 0.0,
        b: 1.0,
    }
}

pub fn exp() -> CorpusFn {
    CorpusFn {
        name: "exp",
        f: f64::exp,
        df: f64::exp,
        antiderivative: f64::exp,
        a: 0.0,
        b: 1.0,
    }
}

pub fn reciprocal() -> CorpusFn {
    CorpusFn {
        name: "1/x",
        f: |x| 1.0 / x,
        df: |x| -1.0 / (x * x),
        antiderivative: f64::ln,
        a: 1.0,
        b: 3.0,
    }
}

/// x², x³, x⁶, exp on [0, 1]; 1/x on [1, 3].
pub fn corpus() -> Vec<CorpusFn> {
    vec![square(), cube(), sixth(), exp(), reciprocal()]
}

/// Random `(θ, λ)` in the unit square.
pub fn random_params(rng: &mut StdRng) -> (f64, f64) {
    (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
}

/// Distance in units in the last place between two finite doubles of equal sign.
pub fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    let ia = a.to_bits() as i64;
    let ib = b.to_bits() as i64;
    if (ia < 0) != (ib < 0) {
        return u64::MAX;
    }
    ia.abs_diff(ib)
}

/// Central difference with step `cbrt(ε) · max(1, |x|)`.
pub fn central_difference(e: &Expr, x: f64) -> Option<f64> {
    let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
    let hi = e.eval(x + h).ok()?;
    let lo = e.eval(x - h).ok()?;
    Some((hi - lo) / ((x + h) - (x - h)))
}

/// Random expression over the builtin grammar, at most `depth` operators deep.
pub fn random_expr(rng: &mut StdRng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.65) {
            Expr::var()
        } else {
            Expr::constant((rng.gen_range(0.5..3.0f64) * 100.0).round() / 100.0)
        };
    }
    match rng.gen_range(0..12) {
        0 => Expr::unary(UnaryOp::Neg, random_expr(rng, depth - 1)),
        k @ 1..=6 => Expr::unary(UnaryOp::FUNCTIONS[k - 1], random_expr(rng, depth - 1)),
        7 => Expr::binary(BinaryOp::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        8 => Expr::binary(BinaryOp::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        9 => Expr::binary(BinaryOp::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        10 => Expr::binary(BinaryOp::Div, random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        _ => {
            let exponent = if rng.gen_bool(0.5) {
                Expr::constant(rng.gen_range(2..=4) as f64)
            } else {
                Expr::constant((rng.gen_range(0.3..2.5f64) * 10.0).round() / 10.0 + 0.05)
            };
            Expr::binary(BinaryOp::Pow, random_expr(rng, depth - 1), exponent)
        }
    }
}

/// First-order distance from `x` to the nearest point where some sub-expression
/// stops being smooth (kink of abs, zero of a sqrt/ln argument, pole of a
/// division, zero base of a fractional power). Finite differences are only
/// meaningful well inside this margin.
pub fn smooth_margin(e: &Expr, x: f64) -> f64 {
    let distance = |arg: &Expr| match arg.eval_derivative(x) {
        Ok(d) if d.derivative != 0.0 => d.value.abs() / d.derivative.abs(),
        Ok(d) if d.value != 0.0 => f64::INFINITY,
        _ => 0.0,
    };
    match e {
        Expr::Const(_) | Expr::Var => f64::INFINITY,
        Expr::Unary(op, arg) => {
            let own = match op {
                UnaryOp::Abs | UnaryOp::Sqrt | UnaryOp::Ln => distance(arg),
                _ => f64::INFINITY,
            };
            own.min(smooth_margin(arg, x))
        }
        Expr::Binary(op, lhs, rhs) => {
            let own = match op {
                BinaryOp::Div => distance(rhs),
                BinaryOp::Pow => match **rhs {
                    Expr::Const(c) if c.fract() == 0.0 && c >= 0.0 => f64::INFINITY,
                    _ => distance(lhs),
                },
                _ => f64::INFINITY,
            };
            own.min(smooth_margin(lhs, x)).min(smooth_margin(rhs, x))
        }
    }
}

/// A random `(expression, point)` pair where value and derivative exist, are
/// moderate in size, and the point sits away from any non-smooth spot.
pub fn random_differentiable_pair(rng: &mut StdRng) -> (Expr, f64) {
    loop {
        let e = random_expr(rng, 3);
        if !format!("{e}").contains('x') {
            continue;
        }
        for _ in 0..20 {
            let x = rng.gen_range(-2.5..2.5f64);
            let Ok(d) = e.eval_derivative(x) else { continue };
            if d.value.abs() > 1e4 || d.derivative.abs() > 1e4 {
                continue;
            }
            if smooth_margin(&e, x) < 1e-2 {
                continue;
            }
            return (e, x);
        }
    }
}
