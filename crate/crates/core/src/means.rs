//! Special means of two reals and the inequality instances obtained by running
//! the rule bounds on `f(x) = xⁿ` and `f(x) = 1/x`.
//!
//! For `f(x) = xⁿ` the rule becomes `(1-θ) A_λ(aⁿ, bⁿ) + θ Cⁿ` and the mean value
//! of `f` is `L_nⁿ(a, b)`; for `f(x) = 1/x` they are `(1-θ) H_λ⁻¹(a, b) + θ/C` and
//! `L⁻¹(a, b)`. The inner node is always `C = (1-λ)a + λb = A_λ(b, a)`.

use crate::bounds::{bound_holder, bound_power_mean, within_bound, SLACK_ABS, SLACK_REL};
use crate::error::{Error, Result};
use crate::expr::powi_exact;
use crate::rules::{inner_node, Interval, RuleParams};

fn check_weight(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("weight {alpha} is outside [0, 1]")));
    }
    Ok(())
}

/// `A_α(a, b) = α a + (1-α) b`.
pub fn weighted_arithmetic(alpha: f64, a: f64, b: f64) -> Result<f64> {
    check_weight(alpha)?;
    Ok(alpha * a + (1.0 - alpha) * b)
}

/// `A(a, b) = (a + b) / 2`.
pub fn arithmetic(a: f64, b: f64) -> f64 {
    0.5 * (a + b)
}

/// `H_α(a, b) = (α/a + (1-α)/b)⁻¹`.
pub fn weighted_harmonic(alpha: f64, a: f64, b: f64) -> Result<f64> {
    check_weight(alpha)?;
    Ok(1.0 / reciprocal_weighted_harmonic(alpha, a, b)?)
}

/// `H_α⁻¹(a, b) = α/a + (1-α)/b`, nonzero.
pub fn reciprocal_weighted_harmonic(alpha: f64, a: f64, b: f64) -> Result<f64> {
    check_weight(alpha)?;
    if a == 0.0 || b == 0.0 {
        return Err(Error::domain("harmonic mean needs nonzero arguments"));
    }
    let s = alpha / a + (1.0 - alpha) / b;
    if s == 0.0 {
        return Err(Error::domain("harmonic mean denominator vanishes"));
    }
    Ok(s)
}

/// `H(a, b) = 2ab / (a + b)`.
pub fn harmonic(a: f64, b: f64) -> Result<f64> {
    if a == 0.0 || b == 0.0 || a + b == 0.0 {
        return Err(Error::domain("harmonic mean needs nonzero a, b with a + b != 0"));
    }
    Ok(2.0 * a * b / (a + b))
}

/// `L(a, b) = (b - a) / (ln b - ln a)` for distinct positive `a`, `b`.
pub fn logarithmic_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain("logarithmic mean needs a, b > 0"));
    }
    if a == b {
        return Err(Error::domain("logarithmic mean needs a != b"));
    }
    // ln b - ln a = ln(1 + (b-a)/a), without the cancellation for b close to a
    let d = ((b - a) / a).ln_1p();
    if d == 0.0 {
        return Err(Error::domain("a and b too close for the logarithmic mean"));
    }
    Ok((b - a) / d)
}

/// `L_nⁿ(a, b) = (b^{n+1} - a^{n+1}) / ((n+1)(b-a))`, the mean value of `xⁿ` on `[a, b]`.
///
/// Evaluated as `Σ_{k=0}^{n} a^k b^{n-k} / (n+1)`, which is the same quotient
/// after dividing out `b - a` and stays accurate when `b` is close to `a`.
pub fn n_logarithmic_mean_pow(n: u32, a: f64, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n-logarithmic mean needs n >= 1"));
    }
    if a == b {
        return Err(Error::domain("n-logarithmic mean needs a != b"));
    }
    let n = i64::from(n);
    let sum: f64 = (0..=n).map(|k| powi_exact(a, k) * powi_exact(b, n - k)).sum();
    Ok(sum / (n + 1) as f64)
}

/// `L_n(a, b) = (L_nⁿ(a, b))^{1/n}`. For `n >= 2` negative radicands are
/// rejected; `L_1` takes no root and is the arithmetic mean for any `a != b`.
pub fn n_logarithmic_mean(n: u32, a: f64, b: f64) -> Result<f64> {
    let radicand = n_logarithmic_mean_pow(n, a, b)?;
    if n > 1 && radicand < 0.0 {
        return Err(Error::domain(format!(
            "L_{n}({a}, {b}) has negative radicand {radicand}"
        )));
    }
    Ok(match n {
        1 => radicand,
        2 => radicand.sqrt(),
        _ => radicand.powf(1.0 / f64::from(n)),
    })
}

/// Both sides of a proposition instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropositionResult {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Headroom allowed in `holds`.
    pub slack: f64,
}

impl PropositionResult {
    fn new(lhs: f64, rhs: f64) -> Self {
        PropositionResult {
            lhs,
            rhs,
            holds: within_bound(lhs, rhs),
            slack: SLACK_ABS + SLACK_REL * rhs.abs(),
        }
    }
}

fn check_power(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!("power propositions need n >= 2, got {n}")));
    }
    Ok(())
}

fn check_positive(iv: Interval) -> Result<()> {
    if iv.a() <= 0.0 {
        return Err(Error::domain(format!(
            "reciprocal propositions need 0 < a < b, got a = {}",
            iv.a()
        )));
    }
    Ok(())
}

/// `|(1-θ) A_λ(aⁿ, bⁿ) + θ Cⁿ - L_nⁿ(a, b)|` through the means.
pub fn power_lhs(n: u32, params: RuleParams, iv: Interval) -> Result<f64> {
    let (a, b) = (iv.a(), iv.b());
    let n_i = i64::from(n);
    let endpoints = weighted_arithmetic(params.lambda(), powi_exact(a, n_i), powi_exact(b, n_i))?;
    let node = powi_exact(inner_node(params, iv), n_i);
    let theta = params.theta();
    Ok(((1.0 - theta) * endpoints + theta * node - n_logarithmic_mean_pow(n, a, b)?).abs())
}

/// `|(1-θ) H_λ⁻¹(a, b) + θ / C - L⁻¹(a, b)|` through the means.
pub fn reciprocal_lhs(params: RuleParams, iv: Interval) -> Result<f64> {
    check_positive(iv)?;
    let (a, b) = (iv.a(), iv.b());
    let endpoints = reciprocal_weighted_harmonic(params.lambda(), a, b)?;
    let node = 1.0 / inner_node(params, iv);
    let theta = params.theta();
    Ok(((1.0 - theta) * endpoints + theta * node - 1.0 / logarithmic_mean(a, b)?).abs())
}

fn power_derivative(n: u32) -> impl Fn(f64) -> Result<f64> {
    move |x| Ok(f64::from(n) * powi_exact(x, i64::from(n) - 1))
}

fn reciprocal_derivative(x: f64) -> Result<f64> {
    Ok(-1.0 / (x * x))
}

/// Power-mean bound instance for `f(x) = xⁿ`, `n >= 2`, `q >= 1`.
pub fn proposition_power_pm(n: u32, params: RuleParams, q: f64, iv: Interval) -> Result<PropositionResult> {
    check_power(n)?;
    let rhs = bound_power_mean(params, iv, power_derivative(n), q)?;
    Ok(PropositionResult::new(power_lhs(n, params, iv)?, rhs))
}

/// Hölder bound instance for `f(x) = xⁿ`, `n >= 2`, `q > 1`.
pub fn proposition_power_holder(n: u32, params: RuleParams, q: f64, iv: Interval) -> Result<PropositionResult> {
    check_power(n)?;
    let rhs = bound_holder(params, iv, power_derivative(n), q)?;
    Ok(PropositionResult::new(power_lhs(n, params, iv)?, rhs))
}

/// Power-mean bound instance for `f(x) = 1/x` on `0 < a < b`, `q >= 1`.
pub fn proposition_reciprocal_pm(params: RuleParams, q: f64, iv: Interval) -> Result<PropositionResult> {
    check_positive(iv)?;
    let rhs = bound_power_mean(params, iv, reciprocal_derivative, q)?;
    Ok(PropositionResult::new(reciprocal_lhs(params, iv)?, rhs))
}

/// Hölder bound instance for `f(x) = 1/x` on `0 < a < b`, `q > 1`.
pub fn proposition_reciprocal_holder(params: RuleParams, q: f64, iv: Interval) -> Result<PropositionResult> {
    check_positive(iv)?;
    let rhs = bound_holder(params, iv, reciprocal_derivative, q)?;
    Ok(PropositionResult::new(reciprocal_lhs(params, iv)?, rhs))
}
