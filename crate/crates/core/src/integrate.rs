//! Composite integration with a certified error bound.
//!
//! On each piece `[u, v]` of width `w` the rule bounds the error of the *mean*
//! by `w · K · [λ² S_a + (1-λ)² S_b]`. Multiplying the mean by `w` to get the
//! piece's integral multiplies the bound by `w` too, so the integral-scale local
//! bound is
//!
//! ```text
//! w² · K · [λ² S_a + (1-λ)² S_b]
//! ```
//!
//! and the certified total is the sum over pieces. Quasi-convexity of `|f'|^q`
//! on `[a, b]` carries over to every sub-interval, so it is checked once.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::analysis::check_derivative_power;
use crate::bounds::{best_from_terms, SupTerms};
use crate::error::{Error, Result};
use crate::rules::{evaluate_rule, Interval, RuleParams};

pub const DEFAULT_MAX_DEPTH: usize = 40;

/// One piece of the final partition with its integral-scale bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subinterval {
    pub interval: Interval,
    pub local_bound: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedResult {
    /// Integral-scale estimate `Σ w · Q(f)` over the pieces.
    pub integral_estimate: f64,
    pub certified_bound: f64,
    pub subinterval_count: usize,
    /// Sorted by left endpoint; adjacent endpoints are bit-identical.
    pub subintervals: Vec<Subinterval>,
    /// `false` when `tol` could not be met before every piece hit `max_depth`.
    pub converged: bool,
}

/// Settings shared by [`certified_integrate`] and [`composite_fixed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig {
    pub params: RuleParams,
    pub q: f64,
    /// Target on the integral scale.
    pub tol: f64,
    pub max_depth: usize,
    /// Skip the quasi-convexity precondition check.
    pub skip_qc_check: bool,
}

impl CertifyConfig {
    pub fn new(params: RuleParams, q: f64, tol: f64) -> Self {
        CertifyConfig {
            params,
            q,
            tol,
            max_depth: DEFAULT_MAX_DEPTH,
            skip_qc_check: false,
        }
    }

    pub fn max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn skip_qc_check(mut self, skip: bool) -> Self {
        self.skip_qc_check = skip;
        self
    }
}

struct Piece {
    interval: Interval,
    /// Integral-scale rule value `w · Q(f)`.
    value: f64,
    bound: f64,
    depth: usize,
}

fn evaluate_piece<F, D>(f: &F, df: &D, iv: Interval, params: RuleParams, q: f64, depth: usize) -> Result<Piece>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let w = iv.width();
    let mean = evaluate_rule(params, iv, f)?;
    let terms = SupTerms::evaluate(params, iv, df)?;
    // best_from_terms already carries one factor of w; the second converts mean to integral
    let bound = w * best_from_terms(params, iv, terms, q);
    Ok(Piece {
        interval: iv,
        value: w * mean,
        bound,
        depth,
    })
}

fn check_config<D>(df: &D, iv: Interval, config: &CertifyConfig) -> Result<()>
where
    D: Fn(f64) -> Result<f64>,
{
    if config.q.is_nan() || config.q < 1.0 {
        return Err(Error::invalid(format!("q = {} must be >= 1", config.q)));
    }
    if config.skip_qc_check {
        return Ok(());
    }
    let report = check_derivative_power(df, iv, config.q)?;
    if !report.is_quasiconvex {
        return Err(Error::NotQuasiConvex {
            a: iv.a(),
            b: iv.b(),
            max_violation: report.max_violation,
            samples: report.samples,
        });
    }
    Ok(())
}

fn finish(mut pieces: Vec<Piece>, converged: bool) -> CertifiedResult {
    pieces.sort_by(|x, y| x.interval.a().total_cmp(&y.interval.a()));
    let integral_estimate = pieces.iter().map(|p| p.value).sum();
    let certified_bound = pieces.iter().map(|p| p.bound).sum();
    let subintervals: Vec<Subinterval> = pieces
        .into_iter()
        .map(|p| Subinterval {
            interval: p.interval,
            local_bound: p.bound,
            depth: p.depth,
        })
        .collect();
    CertifiedResult {
        integral_estimate,
        certified_bound,
        subinterval_count: subintervals.len(),
        subintervals,
        converged,
    }
}

/// Heap entry: largest bound first, then leftmost.
struct Worst(Piece);

impl PartialEq for Worst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Worst {}

impl PartialOrd for Worst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Worst {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .bound
            .total_cmp(&other.0.bound)
            .then_with(|| other.0.interval.a().total_cmp(&self.0.interval.a()))
    }
}

/// Greedy worst-first bisection until the summed local bounds fall to `tol`.
///
/// Pieces that reach `max_depth` are frozen. If every remaining piece is frozen
/// before the target is met, the partial partition is returned with
/// `converged = false`.
pub fn certified_integrate<F, D>(f: F, df: D, iv: Interval, config: CertifyConfig) -> Result<CertifiedResult>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if config.tol.is_nan() || config.tol <= 0.0 {
        return Err(Error::invalid(format!("tol = {} must be > 0", config.tol)));
    }
    check_config(&df, iv, &config)?;
    let (params, q) = (config.params, config.q);

    let root = evaluate_piece(&f, &df, iv, params, q, 0)?;
    let mut running = root.bound;
    let mut heap = BinaryHeap::new();
    heap.push(Worst(root));
    let mut frozen = Vec::new();

    let converged = loop {
        if running <= config.tol {
            // the running total drifts; confirm with a fresh sum before stopping
            let exact: f64 = heap.iter().map(|w| w.0.bound).chain(frozen.iter().map(|p: &Piece| p.bound)).sum();
            if exact <= config.tol {
                break true;
            }
            running = exact;
        }
        let Some(Worst(worst)) = heap.pop() else {
            break false;
        };
        if worst.depth >= config.max_depth {
            frozen.push(worst);
            continue;
        }
        let m = worst.interval.midpoint();
        if m <= worst.interval.a() || m >= worst.interval.b() {
            frozen.push(worst);
            continue;
        }
        let left = evaluate_piece(&f, &df, Interval::new(worst.interval.a(), m)?, params, q, worst.depth + 1)?;
        let right = evaluate_piece(&f, &df, Interval::new(m, worst.interval.b())?, params, q, worst.depth + 1)?;
        running += left.bound + right.bound - worst.bound;
        heap.push(Worst(left));
        heap.push(Worst(right));
    };

    let mut pieces: Vec<Piece> = heap.into_iter().map(|w| w.0).collect();
    pieces.extend(frozen);
    Ok(finish(pieces, converged))
}

/// Uniform partition into `n` pieces with the same per-piece bound.
///
/// `converged` reports whether the summed bound meets `config.tol`.
pub fn composite_fixed<F, D>(f: F, df: D, iv: Interval, config: CertifyConfig, n: usize) -> Result<CertifiedResult>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if n == 0 {
        return Err(Error::invalid("composite rule needs at least one subinterval"));
    }
    check_config(&df, iv, &config)?;
    let step = iv.width() / n as f64;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| match i {
            0 => iv.a(),
            i if i == n => iv.b(),
            i => iv.a() + i as f64 * step,
        })
        .collect();
    let pieces = nodes
        .windows(2)
        .map(|w| evaluate_piece(&f, &df, Interval::new(w[0], w[1])?, config.params, config.q, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut result = finish(pieces, true);
    result.converged = result.certified_bound <= config.tol;
    Ok(result)
}
