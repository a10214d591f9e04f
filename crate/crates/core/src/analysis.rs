//! Independent checks around the rule family: a reference integrator, the
//! quasi-convexity valley test, numeric verification of the rule's error
//! identity and of Hermite–Hadamard, and sharpness sweeps.
//!
//! The reference integrator is adaptive Simpson with interval halving and
//! Richardson acceptance. It shares no code with [`crate::rules`] or
//! [`crate::bounds`], so agreement between the two is independent evidence.

use rayon::prelude::*;

use crate::bounds::{conjugate, holder_from_terms, power_mean_from_terms, within_bound, SupTerms};
use crate::error::{Error, Result};
use crate::rules::{evaluate_rule, inner_node, Interval, RuleParams};

/// Maximum bisection depth of [`reference_mean_integral`].
pub const ORACLE_MAX_DEPTH: usize = 50;
/// Smallest tolerance accepted by [`reference_mean_integral`].
pub const ORACLE_MIN_TOL: f64 = 1e-14;
/// Default tolerance of the reference integrator.
pub const ORACLE_DEFAULT_TOL: f64 = 1e-12;
/// Always bisect at least this many levels before accepting.
const ORACLE_MIN_DEPTH: usize = 2;

/// Default grid size of the quasi-convexity check.
pub const QC_DEFAULT_SAMPLES: usize = 1025;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive<F>(f: &F, panel: Panel, eps: f64, depth: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let Panel { a, b, fa, fm, fb, whole } = panel;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    let delta = refined - whole;
    if depth >= ORACLE_MIN_DEPTH && delta.abs() <= 15.0 * eps {
        return Ok(refined + delta / 15.0);
    }
    if depth >= ORACLE_MAX_DEPTH {
        return Err(Error::NonConvergence(ORACLE_MAX_DEPTH));
    }
    let l = adaptive(
        f,
        Panel { a, b: m, fa, fm: flm, fb: fm, whole: left },
        0.5 * eps,
        depth + 1,
    )?;
    let r = adaptive(
        f,
        Panel { a: m, b, fa: fm, fm: frm, fb, whole: right },
        0.5 * eps,
        depth + 1,
    )?;
    Ok(l + r)
}

/// Mean value `(1/(b-a)) ∫ₐᵇ f` to absolute accuracy `tol` (on the mean scale).
pub fn reference_mean_integral<F>(f: F, iv: Interval, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if tol.is_nan() || tol < ORACLE_MIN_TOL {
        return Err(Error::invalid(format!(
            "oracle tolerance {tol} is below the supported minimum {ORACLE_MIN_TOL}"
        )));
    }
    let (a, b) = (iv.a(), iv.b());
    let fa = f(a)?;
    let fm = f(iv.midpoint())?;
    let fb = f(b)?;
    let whole = simpson(a, b, fa, fm, fb);
    let integral = adaptive(&f, Panel { a, b, fa, fm, fb, whole }, tol * iv.width(), 0)?;
    Ok(integral / iv.width())
}

/// Outcome of the sampled quasi-convexity test.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiConvexityReport {
    pub is_quasiconvex: bool,
    /// Sample index splitting the non-increasing and non-decreasing runs; `Some` iff accepted.
    pub valley_index: Option<usize>,
    pub max_violation: f64,
    pub samples: usize,
    pub tolerance: f64,
}

/// Sample `g` on a uniform grid of `n_samples` points and accept iff some split
/// index `k` makes the samples non-increasing on `[0, k]` and non-decreasing on
/// `[k, n-1]`, each within `tol`.
///
/// On an interval this valley shape is equivalent to quasi-convexity. A breach
/// is measured against the running extreme (how far a sample climbs above the
/// lowest earlier sample in the descending run, or above the lowest later
/// sample in the ascending run), so small steps cannot accumulate unnoticed.
pub fn check_quasiconvex<G>(
    g: G,
    iv: Interval,
    n_samples: usize,
    tol: f64,
) -> Result<QuasiConvexityReport>
where
    G: Fn(f64) -> Result<f64>,
{
    if n_samples < 3 {
        return Err(Error::invalid("quasi-convexity check needs at least 3 samples"));
    }
    let values = sample_grid(&g, iv, n_samples)?;
    Ok(valley_test(&values, tol))
}

/// [`check_quasiconvex`] with `N = 1025` and `tol = 1e-10 · max(1, max |g|)`.
pub fn check_quasiconvex_default<G>(g: G, iv: Interval) -> Result<QuasiConvexityReport>
where
    G: Fn(f64) -> Result<f64>,
{
    let values = sample_grid(&g, iv, QC_DEFAULT_SAMPLES)?;
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(valley_test(&values, 1e-10 * scale))
}

/// Quasi-convexity of `|df|^q` on `iv` with default resolution.
pub fn check_derivative_power<D>(df: D, iv: Interval, q: f64) -> Result<QuasiConvexityReport>
where
    D: Fn(f64) -> Result<f64>,
{
    check_quasiconvex_default(|x| Ok(df(x)?.abs().powf(q)), iv)
}

fn sample_grid<G>(g: &G, iv: Interval, n: usize) -> Result<Vec<f64>>
where
    G: Fn(f64) -> Result<f64>,
{
    let step = iv.width() / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = if i == n - 1 { iv.b() } else { iv.a() + i as f64 * step };
            let v = g(x)?;
            if v.is_nan() {
                return Err(Error::domain(format!("NaN sample at x = {x}")));
            }
            Ok(v)
        })
        .collect()
}

fn valley_test(values: &[f64], tol: f64) -> QuasiConvexityReport {
    let n = values.len();
    // descend[k]: worst climb within values[0..=k] above the running minimum
    let mut descend = vec![0.0f64; n];
    let mut low = values[0];
    for k in 1..n {
        descend[k] = descend[k - 1].max(values[k] - low);
        low = low.min(values[k]);
    }
    // ascend[k]: worst drop within values[k..] relative to a later lower sample
    let mut ascend = vec![0.0f64; n];
    let mut low = values[n - 1];
    for k in (0..n - 1).rev() {
        ascend[k] = ascend[k + 1].max(values[k] - low);
        low = low.min(values[k]);
    }
    let (best_k, best) = (0..n)
        .map(|k| (k, descend[k].max(ascend[k])))
        .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    let ok = best <= tol;
    QuasiConvexityReport {
        is_quasiconvex: ok,
        valley_index: ok.then_some(best_k),
        max_violation: best,
        samples: n,
        tolerance: tol,
    }
}

/// Residual of the rule's error representation
///
/// ```text
/// Q(f) - mean(f) = (b-a) [ -λ² ∫₀¹ (t-θ) f'(t a + (1-t) C) dt
///                          + (1-λ)² ∫₀¹ (t-θ) f'(t b + (1-t) C) dt ]
/// ```
///
/// with every integral taken by the reference integrator at `tol`.
pub fn verify_identity<F, D>(params: RuleParams, iv: Interval, f: F, df: D, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let (theta, lambda) = (params.theta(), params.lambda());
    let c = inner_node(params, iv);
    let unit = Interval::new(0.0, 1.0)?;
    let lhs = evaluate_rule(params, iv, &f)? - reference_mean_integral(&f, iv, tol)?;
    let left = reference_mean_integral(|t| Ok((t - theta) * df(t * iv.a() + (1.0 - t) * c)?), unit, tol)?;
    let right = reference_mean_integral(|t| Ok((t - theta) * df(t * iv.b() + (1.0 - t) * c)?), unit, tol)?;
    let rhs = iv.width() * (-lambda * lambda * left + (1.0 - lambda) * (1.0 - lambda) * right);
    Ok((lhs - rhs).abs())
}

/// Hermite–Hadamard gaps `(mean - f(mid), (f(a)+f(b))/2 - mean)`; both are
/// non-negative for convex `f`.
pub fn verify_hermite_hadamard<F>(f: F, iv: Interval) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mean = reference_mean_integral(&f, iv, ORACLE_DEFAULT_TOL)?;
    let left_gap = mean - f(iv.midpoint())?;
    let right_gap = 0.5 * (f(iv.a())? + f(iv.b())?) - mean;
    Ok((left_gap, right_gap))
}

/// One `(θ, λ, q)` point of a sharpness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub lambda: f64,
    pub q: f64,
    pub rule_value: f64,
    pub reference_mean: f64,
    pub actual_error: f64,
    pub bound_pm: f64,
    pub bound_holder: Option<f64>,
    pub sharpness_pm: f64,
    pub sharpness_holder: Option<f64>,
}

impl SweepRow {
    pub fn pm_valid(&self) -> bool {
        within_bound(self.actual_error, self.bound_pm)
    }

    pub fn holder_valid(&self) -> bool {
        self.bound_holder
            .is_none_or(|h| within_bound(self.actual_error, h))
    }
}

fn sharpness(actual: f64, bound: f64) -> f64 {
    if bound == 0.0 {
        if actual == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        actual / bound
    }
}

/// `n` equally spaced points covering `[0, 1]` inclusive (`n >= 2`).
pub fn unit_grid(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("a parameter grid needs at least 2 steps"));
    }
    let last = (n - 1) as f64;
    Ok((0..n).map(|k| k as f64 / last).collect())
}

/// Evaluate rule, reference mean and both bounds at every `(θ, λ, q)` in the
/// grids. Rows come back in lexicographic order of the grid indices.
///
/// Grid points are evaluated in parallel; `f` and `df` must be pure.
pub fn sweep<F, D>(
    f: F,
    df: D,
    iv: Interval,
    theta_grid: &[f64],
    lambda_grid: &[f64],
    q_list: &[f64],
) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<f64> + Sync,
    D: Fn(f64) -> Result<f64> + Sync,
{
    if theta_grid.is_empty() || lambda_grid.is_empty() || q_list.is_empty() {
        return Err(Error::invalid("sweep grids must be nonempty"));
    }
    if let Some(q) = q_list.iter().find(|q| q.is_nan() || **q < 1.0) {
        return Err(Error::invalid(format!("q = {q} must be >= 1")));
    }
    let reference_mean = reference_mean_integral(&f, iv, ORACLE_DEFAULT_TOL)?;
    let points: Vec<(f64, f64)> = theta_grid
        .iter()
        .flat_map(|&t| lambda_grid.iter().map(move |&l| (t, l)))
        .collect();
    let per_point: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&(theta, lambda)| {
            let params = RuleParams::new(theta, lambda)?;
            let rule_value = evaluate_rule(params, iv, &f)?;
            let terms = SupTerms::evaluate(params, iv, &df)?;
            let bound_pm = power_mean_from_terms(params, iv, terms);
            let actual_error = (rule_value - reference_mean).abs();
            Ok(q_list
                .iter()
                .map(|&q| {
                    let bound_holder = conjugate(q).map(|p| holder_from_terms(params, iv, terms, p));
                    SweepRow {
                        theta,
                        lambda,
                        q,
                        rule_value,
                        reference_mean,
                        actual_error,
                        bound_pm,
                        bound_holder,
                        sharpness_pm: sharpness(actual_error, bound_pm),
                        sharpness_holder: bound_holder.map(|h| sharpness(actual_error, h)),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}
