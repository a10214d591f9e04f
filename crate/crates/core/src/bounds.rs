//! A-priori error bounds for the `(θ, λ)` rule when `|f'|^q` is quasi-convex.
//!
//! Both bounds have the shape
//!
//! ```text
//! |Q(f) - mean(f)| <= (b - a) · K · [λ² S_a + (1 - λ)² S_b]
//! S_a = max(|f'(a)|, |f'(C)|),  S_b = max(|f'(b)|, |f'(C)|)
//! ```
//!
//! with kernel factor `K = ∫₀¹|t-θ| dt = θ² - θ + 1/2` for the power-mean bound
//! and `K = (∫₀¹|t-θ|^p dt)^{1/p}` for the Hölder bound (`1/p + 1/q = 1`).
//!
//! `(max(u^q, v^q))^{1/q} = max(u, v)` for `u, v >= 0`, so the sup terms are
//! computed without ever raising to the q-th power and the power-mean bound is
//! independent of `q`.

use crate::error::{Error, Result};
use crate::rules::{evaluate_rule, inner_node, Interval, RuleParams};

/// Absolute part of the acceptance slack for `actual <= bound` comparisons.
pub const SLACK_ABS: f64 = 1e-14;
/// Relative part (fraction of the bound).
pub const SLACK_REL: f64 = 1e-12;

/// `actual <= bound` up to rounding headroom.
pub fn within_bound(actual: f64, bound: f64) -> bool {
    actual <= bound + SLACK_ABS + SLACK_REL * bound.abs()
}

/// Hölder exponent `q >= 1` and, for `q > 1`, its conjugate `p = q / (q - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPair {
    q: f64,
}

impl ExponentPair {
    pub fn new(q: f64) -> Result<Self> {
        check_q(q)?;
        Ok(ExponentPair { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `None` at `q = 1`, where the conjugate is infinite.
    pub fn p(&self) -> Option<f64> {
        conjugate(self.q)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("q = {q} must be >= 1")));
    }
    Ok(())
}

pub(crate) fn conjugate(q: f64) -> Option<f64> {
    if q > 1.0 {
        Some(if q.is_infinite() { 1.0 } else { q / (q - 1.0) })
    } else {
        None
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `∫₀¹ |t - θ| dt = θ² - θ + 1/2`, rounded once.
///
/// The product and both sums are carried with their exact rounding errors, so
/// the result is the correctly rounded value of the quadratic. In particular
/// `θ` and `1 - θ` agree bit for bit.
pub fn kernel_moment_pm(theta: f64) -> f64 {
    let sq = theta * theta;
    let sq_err = theta.mul_add(theta, -sq);
    let (s1, e1) = two_sum(sq, -theta);
    let (s2, e2) = two_sum(s1, 0.5);
    s2 + (e1 + e2 + sq_err)
}

/// `∫₀¹ |t - θ|^p dt = (θ^{p+1} + (1-θ)^{p+1}) / (p + 1)`.
pub fn kernel_moment_holder(theta: f64, p: f64) -> f64 {
    if p == 1.0 {
        // the quadratic closed form is the same integral, and exact at p = 1
        return kernel_moment_pm(theta);
    }
    let d = (theta - 0.5).abs();
    let far = 0.5 + d;
    let near = 0.5 - d;
    (far.powf(p + 1.0) + near.powf(p + 1.0)) / (p + 1.0)
}

/// Hölder kernel factor `(∫₀¹|t-θ|^p dt)^{1/p}`.
pub fn holder_kernel_factor(theta: f64, p: f64) -> f64 {
    kernel_moment_holder(theta, p).powf(1.0 / p)
}

/// Multipliers of `S_a` and `S_b` in the power-mean bound per unit width:
/// `(λ² K, (1-λ)² K)`.
pub fn power_mean_coefficients(params: RuleParams) -> (f64, f64) {
    let k = kernel_moment_pm(params.theta());
    let l = params.lambda();
    (l * l * k, (1.0 - l) * (1.0 - l) * k)
}

/// Multipliers of `S_a` and `S_b` in the Hölder bound per unit width.
pub fn holder_coefficients(params: RuleParams, p: f64) -> (f64, f64) {
    let k = holder_kernel_factor(params.theta(), p);
    let l = params.lambda();
    (l * l * k, (1.0 - l) * (1.0 - l) * k)
}

/// `(max(|df(x)|^q, |df(c)|^q))^{1/q}`, computed as `max(|df(x)|, |df(c)|)`.
pub fn sup_derivative_term<D>(df: D, x: f64, c: f64, q: f64) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
{
    check_q(q)?;
    Ok(df(x)?.abs().max(df(c)?.abs()))
}

/// The pair `(S_a, S_b)` of sup terms. A term whose weight `λ²` or `(1-λ)²`
/// vanishes is reported as 0 without evaluating `df` at that endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupTerms {
    pub left: f64,
    pub right: f64,
}

impl SupTerms {
    pub fn evaluate<D>(params: RuleParams, iv: Interval, df: D) -> Result<Self>
    where
        D: Fn(f64) -> Result<f64>,
    {
        let c = inner_node(params, iv);
        let dc = df(c)?.abs();
        let left = if params.lambda() != 0.0 {
            df(iv.a())?.abs().max(dc)
        } else {
            0.0
        };
        let right = if params.lambda() != 1.0 {
            df(iv.b())?.abs().max(dc)
        } else {
            0.0
        };
        Ok(SupTerms { left, right })
    }

    /// `λ² S_a + (1-λ)² S_b`.
    pub fn weighted(&self, params: RuleParams) -> f64 {
        let l = params.lambda();
        l * l * self.left + (1.0 - l) * (1.0 - l) * self.right
    }
}

pub(crate) fn power_mean_from_terms(params: RuleParams, iv: Interval, terms: SupTerms) -> f64 {
    iv.width() * kernel_moment_pm(params.theta()) * terms.weighted(params)
}

pub(crate) fn holder_from_terms(params: RuleParams, iv: Interval, terms: SupTerms, p: f64) -> f64 {
    iv.width() * holder_kernel_factor(params.theta(), p) * terms.weighted(params)
}

/// Power-mean bound on `|Q(f) - mean(f)|`, valid for any `q >= 1` when `|f'|^q`
/// is quasi-convex on `[a, b]`.
pub fn bound_power_mean<D>(params: RuleParams, iv: Interval, df: D, q: f64) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
{
    check_q(q)?;
    let terms = SupTerms::evaluate(params, iv, df)?;
    Ok(power_mean_from_terms(params, iv, terms))
}

/// Hölder bound on `|Q(f) - mean(f)|`. Requires `q > 1` strictly.
pub fn bound_holder<D>(params: RuleParams, iv: Interval, df: D, q: f64) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
{
    check_q(q)?;
    let p = conjugate(q).ok_or(Error::UnsupportedExponent(q))?;
    let terms = SupTerms::evaluate(params, iv, df)?;
    Ok(holder_from_terms(params, iv, terms, p))
}

pub(crate) fn best_from_terms(params: RuleParams, iv: Interval, terms: SupTerms, q: f64) -> f64 {
    let pm = power_mean_from_terms(params, iv, terms);
    match conjugate(q) {
        Some(p) => pm.min(holder_from_terms(params, iv, terms, p)),
        None => pm,
    }
}

/// The tighter of the two bounds applicable at this `q`.
pub fn best_bound<D>(params: RuleParams, iv: Interval, df: D, q: f64) -> Result<f64>
where
    D: Fn(f64) -> Result<f64>,
{
    check_q(q)?;
    let terms = SupTerms::evaluate(params, iv, df)?;
    Ok(best_from_terms(params, iv, terms, q))
}

/// Classical Simpson bound `sup|f⁽⁴⁾| (b-a)⁴ / 2880` on the mean-scale error.
///
/// The exponent is 4: the bound is attained by `x⁴` on `[0, 1]`, where the
/// Simpson mean is `5/24` against the exact `1/5`. A printed `(b-a)²` in some
/// sources is an erratum.
pub fn classical_simpson_bound(iv: Interval, sup_f4: f64) -> Result<f64> {
    if sup_f4.is_nan() || sup_f4 < 0.0 || sup_f4.is_infinite() {
        return Err(Error::invalid(format!(
            "sup |f''''| must be finite and non-negative, got {sup_f4}"
        )));
    }
    let w = iv.width();
    Ok(sup_f4 * (w * w) * (w * w) / 2880.0)
}

/// Rule value, reference mean and both bounds for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub rule_value: f64,
    pub reference_mean: f64,
    pub actual_error: f64,
    pub bound_power_mean: f64,
    /// `None` at `q = 1`.
    pub bound_holder: Option<f64>,
    pub pm_valid: bool,
    pub holder_valid: Option<bool>,
}

impl BoundReport {
    /// Evaluate the rule and both bounds; `reference_mean` is the (independently
    /// computed) mean value of `f` over `iv`.
    pub fn evaluate<F, D>(
        params: RuleParams,
        iv: Interval,
        f: F,
        df: D,
        q: f64,
        reference_mean: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
        D: Fn(f64) -> Result<f64>,
    {
        check_q(q)?;
        let rule_value = evaluate_rule(params, iv, f)?;
        let terms = SupTerms::evaluate(params, iv, df)?;
        let bound_power_mean = power_mean_from_terms(params, iv, terms);
        let bound_holder = conjugate(q).map(|p| holder_from_terms(params, iv, terms, p));
        Ok(BoundReport::from_parts(
            rule_value,
            reference_mean,
            bound_power_mean,
            bound_holder,
        ))
    }

    pub fn from_parts(
        rule_value: f64,
        reference_mean: f64,
        bound_power_mean: f64,
        bound_holder: Option<f64>,
    ) -> Self {
        let actual_error = (rule_value - reference_mean).abs();
        BoundReport {
            rule_value,
            reference_mean,
            actual_error,
            bound_power_mean,
            bound_holder,
            pm_valid: within_bound(actual_error, bound_power_mean),
            holder_valid: bound_holder.map(|h| within_bound(actual_error, h)),
        }
    }

    pub fn best_bound(&self) -> f64 {
        match self.bound_holder {
            Some(h) => h.min(self.bound_power_mean),
            None => self.bound_power_mean,
        }
    }
}
