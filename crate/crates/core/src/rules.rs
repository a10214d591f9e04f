//! The two-parameter quadrature rule family
//!
//! ```text
//! Q(f) = (1 - θ)(λ f(a) + (1 - λ) f(b)) + θ f(C),    C = (1 - λ) a + λ b
//! ```
//!
//! `Q` approximates the *mean value* `(1/(b-a)) ∫ f` over `[a, b]`, not the
//! integral. Conversion to integral scale happens only in [`crate::integrate`].

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `(θ, λ)` with both components in `[0, 1]`. `θ` weights the inner node, `λ` places it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleParams {
    theta: f64,
    lambda: f64,
}

impl RuleParams {
    pub fn new(theta: f64, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::invalid(format!("theta = {theta} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid(format!("lambda = {lambda} is outside [0, 1]")));
        }
        Ok(RuleParams { theta, lambda })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Named members of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Simpson,
    Midpoint,
    Trapezoid,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Simpson, Preset::Midpoint, Preset::Trapezoid];

    pub fn params(self) -> RuleParams {
        let theta = match self {
            Preset::Simpson => 2.0 / 3.0,
            Preset::Midpoint => 1.0,
            Preset::Trapezoid => 0.0,
        };
        RuleParams { theta, lambda: 0.5 }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Simpson => "simpson",
            Preset::Midpoint => "midpoint",
            Preset::Trapezoid => "trapezoid",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simpson" => Ok(Preset::Simpson),
            "midpoint" => Ok(Preset::Midpoint),
            "trapezoid" => Ok(Preset::Trapezoid),
            _ => Err(Error::invalid(format!(
                "unknown rule '{s}' (expected simpson, midpoint or trapezoid)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Preset lookup by name.
pub fn preset(name: &str) -> Result<RuleParams> {
    name.parse::<Preset>().map(Preset::params)
}

/// A closed interval `[a, b]` with finite `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::invalid(format!("interval [{a}, {b}] has a non-finite endpoint")));
        }
        if a >= b {
            return Err(Error::invalid(format!("interval requires a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        self.a + 0.5 * (self.b - self.a)
    }
}

/// `C = (1 - λ) a + λ b`, clamped into `[a, b]` against rounding.
pub fn inner_node(p: RuleParams, iv: Interval) -> f64 {
    let c = (1.0 - p.lambda) * iv.a + p.lambda * iv.b;
    c.clamp(iv.a, iv.b)
}

/// Rule value `(1-θ)(λ f(a) + (1-λ) f(b)) + θ f(C)`; an approximation of the mean of `f`.
///
/// Nodes with zero weight are not evaluated, so e.g. the midpoint rule never
/// touches the endpoints.
pub fn evaluate_rule<F>(p: RuleParams, iv: Interval, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let endpoint_weight = 1.0 - p.theta;
    let mut value = 0.0;
    if endpoint_weight != 0.0 {
        let mut endpoints = 0.0;
        if p.lambda != 0.0 {
            endpoints += p.lambda * f(iv.a)?;
        }
        if p.lambda != 1.0 {
            endpoints += (1.0 - p.lambda) * f(iv.b)?;
        }
        value += endpoint_weight * endpoints;
    }
    if p.theta != 0.0 {
        value += p.theta * f(inner_node(p, iv))?;
    }
    Ok(value)
}
