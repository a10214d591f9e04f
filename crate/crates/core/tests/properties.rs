//! Property tests for the invariants of each module.

mod common;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use qbound::analysis::{
    check_derivative_power, check_quasiconvex_default, reference_mean_integral, sweep, verify_identity,
};
use qbound::bounds::{
    bound_holder, bound_power_mean, holder_kernel_factor, kernel_moment_holder, kernel_moment_pm, BoundReport,
    ExponentPair,
};
use qbound::integrate::{certified_integrate, CertifyConfig};
use qbound::means::{
    arithmetic, harmonic, logarithmic_mean, n_logarithmic_mean, power_lhs, reciprocal_lhs, weighted_arithmetic,
    weighted_harmonic,
};
use qbound::rules::{evaluate_rule, inner_node};
use qbound::{DualValue, Expr, Interval, Preset, RuleParams};

use common::CorpusFn;

fn params(theta: f64, lambda: f64) -> RuleParams {
    RuleParams::new(theta, lambda).unwrap()
}

fn interval(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

/// A sub-interval of `[lo, hi]` at least `min_width` wide.
fn sub_interval(lo: f64, hi: f64, min_width: f64) -> impl Strategy<Value = Interval> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(move |(s, t)| {
        let a = lo + s * (hi - lo - min_width);
        let b = a + min_width + t * (hi - a - min_width);
        Interval::new(a, b.min(hi)).unwrap()
    })
}

fn unit() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn corpus_member() -> impl Strategy<Value = CorpusFn> {
    (0..5usize).prop_map(|i| common::corpus()[i])
}

mod expr {
    use super::*;

    const SOURCES: &[&str] = &[
        "x^2",
        "1/x",
        "-x^2",
        "2^3^2",
        "exp(sin(x)) * cos(x) - 3.5e-1",
        "sqrt(abs(x - 0.25)) / (1 + x^2)",
        "ln(x^2 + 1) ^ 1.5",
        "-(x - 1) * -(-x)",
        "x / 2 / 3 - x - 1 - 2",
        "((((x))))",
        "1e3 * x ^ -2",
    ];

    #[test]
    fn corpus_sources_round_trip() {
        for src in SOURCES {
            let tree = Expr::parse(src).unwrap();
            let again = Expr::parse(&tree.to_string()).unwrap();
            assert_eq!(tree, again, "{src}");
        }
    }

    proptest! {
        #[test]
        fn unparse_then_parse_is_identity(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let tree = common::random_expr(&mut rng, 4);
            let printed = tree.to_string();
            prop_assert_eq!(Expr::parse(&printed).unwrap(), tree, "{}", printed);
        }

        #[test]
        fn builtin_derivatives_match_finite_differences(
            which in 0..6usize,
            x in -4.0..4.0f64,
        ) {
            let (src, ok) = match which {
                0 => ("exp(x)", true),
                1 => ("ln(x)", x > 0.05),
                2 => ("sin(x)", true),
                3 => ("cos(x)", true),
                4 => ("abs(x)", x.abs() > 1e-3),
                _ => ("sqrt(x)", x > 0.05),
            };
            prop_assume!(ok);
            let e = Expr::parse(src).unwrap();
            let ad = e.eval_derivative(x).unwrap().derivative;
            let fd = common::central_difference(&e, x).unwrap();
            prop_assert!((ad - fd).abs() <= 1e-6 * ad.abs().max(1.0), "{src} at {x}: {ad} vs {fd}");
        }

        #[test]
        fn evaluation_is_deterministic(seed in any::<u64>(), x in -3.0..3.0f64) {
            let mut rng = StdRng::seed_from_u64(seed);
            let e = common::random_expr(&mut rng, 4);
            let first = e.eval(x).map(f64::to_bits).ok();
            let from_threads: Vec<Option<u64>> = std::thread::scope(|s| {
                let handles: Vec<_> = (0..3).map(|_| s.spawn(|| e.eval(x).map(f64::to_bits).ok())).collect();
                handles.into_iter().map(|h| h.join().unwrap()).collect()
            });
            for other in from_threads {
                prop_assert_eq!(other, first);
            }
        }

        #[test]
        fn dual_arithmetic_follows_sum_product_chain_rules(
            u in -5.0..5.0f64, du in -5.0..5.0f64, v in 0.5..5.0f64, dv in -5.0..5.0f64,
        ) {
            let a = DualValue::new(u, du);
            let b = DualValue::new(v, dv);
            let close = |x: f64, y: f64| (x - y).abs() <= 1e-14 * x.abs().max(y.abs()).max(1.0);
            prop_assert!(close((a + b).derivative, du + dv));
            prop_assert!(close((a * b).derivative, du * v + u * dv));
            prop_assert!(close((a / b).derivative, (du * v - u * dv) / (v * v)));
            prop_assert!(close(a.sin().derivative, u.cos() * du));
            prop_assert!(close(b.ln().derivative, dv / v));
        }
    }
}

mod rules {
    use super::*;

    proptest! {
        #[test]
        fn affine_exact_when_either_parameter_is_half(
            free in unit(),
            which in any::<bool>(),
            alpha in -10.0..10.0f64,
            beta in -10.0..10.0f64,
            iv in sub_interval(-5.0, 5.0, 1e-3),
        ) {
            let p = if which { params(0.5, free) } else { params(free, 0.5) };
            let f = |x: f64| Ok(alpha * x + beta);
            let rule = evaluate_rule(p, iv, f).unwrap();
            let exact = alpha * (iv.a() + iv.b()) / 2.0 + beta;
            let scale = (alpha * iv.a()).abs().max((alpha * iv.b()).abs()) + beta.abs();
            prop_assert!((rule - exact).abs() <= 4.0 * f64::EPSILON * scale, "{rule} vs {exact}");
        }

        #[test]
        fn affine_defect_has_closed_form(
            theta in unit(),
            lambda in unit(),
            alpha in -10.0..10.0f64,
            beta in -10.0..10.0f64,
            iv in sub_interval(-5.0, 5.0, 1e-3),
        ) {
            let p = params(theta, lambda);
            let rule = evaluate_rule(p, iv, |x: f64| Ok(alpha * x + beta)).unwrap();
            let mean = alpha * (iv.a() + iv.b()) / 2.0 + beta;
            let defect = alpha * iv.width() * (2.0 * theta - 1.0) * (2.0 * lambda - 1.0) / 2.0;
            let scale = (alpha * iv.a()).abs().max((alpha * iv.b()).abs()) + beta.abs();
            prop_assert!((rule - mean - defect).abs() <= 16.0 * f64::EPSILON * scale);
        }

        #[test]
        fn simpson_preset_is_the_classical_formula(c in corpus_member()) {
            let iv = c.interval();
            let rule = evaluate_rule(Preset::Simpson.params(), iv, c.func()).unwrap();
            let (fa, fm, fb) = ((c.f)(iv.a()), (c.f)(iv.midpoint()), (c.f)(iv.b()));
            let classical = (fa + 4.0 * fm + fb) / 6.0;
            prop_assert!((rule - classical).abs() <= 4.0 * f64::EPSILON * fa.abs().max(fm.abs()).max(fb.abs()));
        }

        #[test]
        fn adding_a_constant_shifts_the_rule(
            theta in unit(), lambda in unit(), shift in -100.0..100.0f64, c in corpus_member(),
        ) {
            let p = params(theta, lambda);
            let iv = c.interval();
            let base = evaluate_rule(p, iv, c.func()).unwrap();
            let f = c.f;
            let shifted = evaluate_rule(p, iv, |x| Ok(f(x) + shift)).unwrap();
            let constant = evaluate_rule(p, iv, |_| Ok(shift)).unwrap();
            prop_assert!((shifted - base - shift).abs() <= 1e-13 * shift.abs().max(base.abs()).max(1.0));
            prop_assert!((constant - shift).abs() <= 2.0 * f64::EPSILON * shift.abs());
        }

        #[test]
        fn inner_node_stays_inside(lambda in unit(), iv in sub_interval(-1e6, 1e6, 1e-9)) {
            let c = inner_node(params(0.5, lambda), iv);
            prop_assert!(iv.a() <= c && c <= iv.b());
        }
    }
}

mod bounds {
    use super::*;

    proptest! {
        #[test]
        fn power_mean_bound_is_q_independent(
            theta in unit(), lambda in unit(), q1 in 1.0..1e3f64, q2 in 1.0..1e3f64,
            c in corpus_member(), s in 0.0..1.0f64, t in 0.0..1.0f64,
        ) {
            let a = c.a + s * (c.b - c.a) * 0.9;
            let iv = interval(a, a + (c.b - a) * (0.05 + 0.95 * t));
            let p = params(theta, lambda);
            let b1 = bound_power_mean(p, iv, c.deriv(), q1).unwrap();
            let b2 = bound_power_mean(p, iv, c.deriv(), q2).unwrap();
            prop_assert!(common::ulps(b1, b2) <= 4);
        }

        #[test]
        fn kernel_moments_are_symmetric(theta in 0.5..=1.0f64, p in 0.1..20.0f64) {
            prop_assert_eq!(kernel_moment_pm(theta), kernel_moment_pm(1.0 - theta));
            prop_assert_eq!(kernel_moment_holder(theta, p), kernel_moment_holder(1.0 - theta, p));
        }

        #[test]
        fn kernel_norm_is_monotone_in_p(theta in unit()) {
            let norms: Vec<f64> = [0.5, 1.0, 1.5, 2.0, 4.0, 10.0].iter().map(|&p| holder_kernel_factor(theta, p)).collect();
            prop_assert!(norms.windows(2).all(|w| w[0] <= w[1]), "{norms:?}");
        }

        #[test]
        fn holder_bound_is_monotone_in_q(theta in unit(), lambda in unit(), c in corpus_member()) {
            let p = params(theta, lambda);
            let bounds: Vec<f64> = [1.1, 1.5, 2.0, 4.0, 10.0]
                .iter()
                .map(|&q| bound_holder(p, c.interval(), c.deriv(), q).unwrap())
                .collect();
            prop_assert!(bounds.windows(2).all(|w| w[1] <= w[0]), "{bounds:?}");
        }

        #[test]
        fn holder_moment_meets_power_mean_moment_at_p_one(theta in unit()) {
            prop_assert_eq!(kernel_moment_holder(theta, 1.0), kernel_moment_pm(theta));
            let p = 1.0 + 1e-4;
            prop_assert!((kernel_moment_holder(theta, p).powf(1.0 / p) - kernel_moment_pm(theta)).abs() < 1e-3);
        }

        #[test]
        fn bounds_hold_on_the_corpus(
            theta in unit(), lambda in unit(), q in 1.0..10.0f64,
            c in corpus_member(), s in 0.0..1.0f64, t in 0.0..1.0f64,
        ) {
            let a = c.a + s * (c.b - c.a) * 0.9;
            let b = a + (c.b - a) * (0.05 + 0.95 * t);
            let iv = interval(a, b);
            prop_assume!(check_derivative_power(c.deriv(), iv, q).unwrap().is_quasiconvex);
            let p = params(theta, lambda);
            let actual = (evaluate_rule(p, iv, c.func()).unwrap() - c.exact_mean_over(a, b)).abs();
            let pm = bound_power_mean(p, iv, c.deriv(), q).unwrap();
            prop_assert!(actual <= pm * (1.0 + 1e-12) + 1e-15, "{} {actual} > {pm}", c.name);
            if q > 1.0 {
                let h = bound_holder(p, iv, c.deriv(), q).unwrap();
                prop_assert!(actual <= h * (1.0 + 1e-12) + 1e-15, "{} {actual} > {h}", c.name);
            }
        }

        #[test]
        fn bounds_survive_translation(
            theta in unit(), lambda in unit(), q in 1.01..10.0f64, shift in -3.0..3.0f64, exp_fn in any::<bool>(),
        ) {
            let p = params(theta, lambda);
            let df: fn(f64) -> f64 = if exp_fn { f64::exp } else { |x| 2.0 * x };
            let iv = interval(0.25, 1.5);
            let moved = interval(0.25 + shift, 1.5 + shift);
            let pm = bound_power_mean(p, iv, |x| Ok(df(x)), q).unwrap();
            let pm_moved = bound_power_mean(p, moved, |x| Ok(df(x - shift)), q).unwrap();
            let h = bound_holder(p, iv, |x| Ok(df(x)), q).unwrap();
            let h_moved = bound_holder(p, moved, |x| Ok(df(x - shift)), q).unwrap();
            prop_assert!((pm - pm_moved).abs() <= 1e-12 * pm.max(1e-300));
            prop_assert!((h - h_moved).abs() <= 1e-12 * h.max(1e-300));
        }

        #[test]
        fn exponent_pair_is_conjugate(q in 1.0001..1e4f64) {
            let e = ExponentPair::new(q).unwrap();
            let p = e.p().unwrap();
            prop_assert!(common::ulps(1.0 / p + 1.0 / q, 1.0) <= 4);
        }

        #[test]
        fn report_flags_agree_with_fields(theta in unit(), lambda in unit(), q in 1.0..5.0f64, c in corpus_member()) {
            let p = params(theta, lambda);
            let r = BoundReport::evaluate(p, c.interval(), c.func(), c.deriv(), q, c.exact_mean()).unwrap();
            prop_assert_eq!(r.actual_error, (r.rule_value - r.reference_mean).abs());
            prop_assert_eq!(r.pm_valid, qbound::bounds::within_bound(r.actual_error, r.bound_power_mean));
            prop_assert_eq!(r.holder_valid.is_some(), q > 1.0);
            prop_assert!(r.pm_valid);
        }
    }
}

mod analysis {
    use super::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn oracle_matches_power_closed_forms(n in 1..=6i32, iv in sub_interval(0.0, 2.0, 1e-3)) {
            let oracle = reference_mean_integral(|x: f64| Ok(x.powi(n)), iv, 1e-12).unwrap();
            let (a, b) = (iv.a(), iv.b());
            let exact = (b.powi(n + 1) - a.powi(n + 1)) / (f64::from(n + 1) * (b - a));
            prop_assert!((oracle - exact).abs() <= 1e-10 * exact.abs().max(1e-300), "{oracle} vs {exact}");
        }

        #[test]
        fn oracle_matches_reciprocal_logarithmic_mean(iv in sub_interval(0.5, 5.0, 1e-3)) {
            let oracle = reference_mean_integral(|x: f64| Ok(1.0 / x), iv, 1e-12).unwrap();
            let exact = 1.0 / logarithmic_mean(iv.a(), iv.b()).unwrap();
            prop_assert!((oracle - exact).abs() <= 1e-10 * exact);
        }

        #[test]
        fn identity_residual_within_ten_tol(
            coeffs in prop::collection::vec(-3.0..3.0f64, 7),
            theta in unit(), lambda in unit(),
        ) {
            let tol = 1e-10;
            let poly = |x: f64| Ok(coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c));
            let dpoly = |x: f64| {
                Ok(coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * x + k as f64 * c))
            };
            let p = params(theta, lambda);
            let r = verify_identity(p, interval(0.0, 1.0), poly, dpoly, tol).unwrap();
            prop_assert!(r <= 10.0 * tol, "polynomial residual {r}");
            for c in [common::exp(), common::reciprocal()] {
                let r = verify_identity(p, c.interval(), c.func(), c.deriv(), tol).unwrap();
                prop_assert!(r <= 10.0 * tol, "{} residual {r}", c.name);
            }
        }

        #[test]
        fn convex_samples_are_accepted(
            curvature in 0.0..10.0f64, centre in -2.0..2.0f64, slope in -5.0..5.0f64, rate in -3.0..3.0f64,
        ) {
            let g = |x: f64| Ok(curvature * (x - centre) * (x - centre) + slope * x + (rate * x).exp());
            let report = check_quasiconvex_default(g, interval(-1.0, 1.0)).unwrap();
            prop_assert!(report.is_quasiconvex, "violation {}", report.max_violation);
        }

        #[test]
        fn monotone_samples_are_accepted(
            scale in 0.1..10.0f64, wobble in 0.0..0.9f64, decreasing in any::<bool>(), steep in 0.1..20.0f64,
        ) {
            let sign = if decreasing { -1.0 } else { 1.0 };
            let g = |x: f64| Ok(sign * scale * (x + wobble * x.sin() + (steep * x).tanh()));
            let report = check_quasiconvex_default(g, interval(-3.0, 3.0)).unwrap();
            prop_assert!(report.is_quasiconvex, "violation {}", report.max_violation);
        }

        #[test]
        fn report_verdict_matches_violation(
            k in 0.1..6.0f64, phase in 0.0..6.3f64, bump in -1.0..1.0f64,
        ) {
            let g = |x: f64| Ok((k * x + phase).sin() + bump * x * x);
            let r = check_quasiconvex_default(g, interval(-2.0, 2.0)).unwrap();
            prop_assert_eq!(r.is_quasiconvex, r.max_violation <= r.tolerance);
            prop_assert_eq!(r.valley_index.is_some(), r.is_quasiconvex);
        }

        #[test]
        fn sweep_sharpness_never_exceeds_one(c in corpus_member()) {
            let grid = [0.0, 0.3, 0.5, 2.0 / 3.0, 1.0];
            let rows = sweep(c.func(), c.deriv(), c.interval(), &grid, &grid, &[1.0, 2.0, 7.5]).unwrap();
            for row in rows {
                prop_assert!(row.sharpness_pm <= 1.0 + 1e-12, "{row:?}");
                prop_assert!(row.sharpness_holder.is_none_or(|s| s <= 1.0 + 1e-12), "{row:?}");
            }
        }
    }
}

mod means {
    use super::*;

    proptest! {
        #[test]
        fn harmonic_logarithmic_arithmetic_order(a in 0.01..100.0f64, b in 0.01..100.0f64) {
            prop_assume!((a - b).abs() > 1e-6 * a.max(b));
            let h = harmonic(a, b).unwrap();
            let l = logarithmic_mean(a, b).unwrap();
            let m = arithmetic(a, b);
            prop_assert!(h < l && l < m, "{h} {l} {m}");
        }

        #[test]
        fn weighted_means_interpolate(alpha in unit(), a in 0.01..100.0f64, b in 0.01..100.0f64) {
            let (lo, hi) = (a.min(b), a.max(b));
            let slack = 4.0 * f64::EPSILON * hi;
            for m in [weighted_arithmetic(alpha, a, b).unwrap(), weighted_harmonic(alpha, a, b).unwrap()] {
                prop_assert!(lo - slack <= m && m <= hi + slack);
            }
        }

        #[test]
        fn first_logarithmic_mean_is_arithmetic(a in -100.0..100.0f64, b in -100.0..100.0f64) {
            prop_assume!(a != b);
            let l1 = n_logarithmic_mean(1, a, b).unwrap();
            let m = arithmetic(a, b);
            prop_assert!((l1 - m).abs() <= 1e-12 * a.abs().max(b.abs()));
        }

        #[test]
        fn means_route_agrees_with_rule_route(
            n in 2..=4u32, theta in unit(), lambda in unit(), iv in sub_interval(0.5, 5.0, 0.05),
        ) {
            let p = params(theta, lambda);
            let route = |f: &dyn Fn(f64) -> f64| {
                let f = |x: f64| Ok(f(x));
                (evaluate_rule(p, iv, f).unwrap() - reference_mean_integral(f, iv, 1e-14).unwrap()).abs()
            };
            let power = power_lhs(n, p, iv).unwrap();
            let via_rule = route(&|x: f64| x.powi(n as i32));
            let scale = iv.b().powi(n as i32);
            prop_assert!((power - via_rule).abs() <= 1e-12 * power.max(via_rule).max(1e-3 * scale));
            let recip = reciprocal_lhs(p, iv).unwrap();
            let via_rule = route(&|x: f64| 1.0 / x);
            prop_assert!((recip - via_rule).abs() <= 1e-12 * recip.max(via_rule).max(1e-3 / iv.a()));
        }
    }
}

mod integrate {
    use super::*;

    fn power(n: i32) -> CorpusFn {
        CorpusFn {
            name: "x^n",
            f: match n {
                2 => |x| x.powi(2),
                3 => |x| x.powi(3),
                4 => |x| x.powi(4),
                5 => |x| x.powi(5),
                _ => |x| x.powi(6),
            },
            df: match n {
                2 => |x| 2.0 * x,
                3 => |x| 3.0 * x.powi(2),
                4 => |x| 4.0 * x.powi(3),
                5 => |x| 5.0 * x.powi(4),
                _ => |x| 6.0 * x.powi(5),
            },
            antiderivative: match n {
                2 => |x| x.powi(3) / 3.0,
                3 => |x| x.powi(4) / 4.0,
                4 => |x| x.powi(5) / 5.0,
                5 => |x| x.powi(6) / 6.0,
                _ => |x| x.powi(7) / 7.0,
            },
            a: 0.0,
            b: 2.0,
        }
    }

    fn integrands() -> impl Strategy<Value = CorpusFn> {
        prop_oneof![
            (2..=6i32).prop_map(power),
            Just(common::exp()),
            Just(common::reciprocal()),
        ]
    }

    fn preset() -> impl Strategy<Value = Preset> {
        prop_oneof![Just(Preset::Simpson), Just(Preset::Midpoint), Just(Preset::Trapezoid)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn certified_bound_is_sound(
            c in integrands(), rule in preset(), q in prop_oneof![Just(1.0), Just(2.0)], exp10 in 1.0..4.0f64,
        ) {
            let tol = 10f64.powf(-exp10);
            let config = CertifyConfig::new(rule.params(), q, tol);
            let r = certified_integrate(c.func(), c.deriv(), c.interval(), config).unwrap();
            let exact = c.integral_over(c.a, c.b);
            prop_assert!(r.converged && r.certified_bound <= tol);
            prop_assert!((r.integral_estimate - exact).abs() <= r.certified_bound, "{} {rule}", c.name);
        }

        #[test]
        fn refinement_never_loosens(c in integrands(), rule in preset()) {
            let mut previous = f64::INFINITY;
            for depth in 0..=7 {
                let config = CertifyConfig::new(rule.params(), 1.0, 1e-300).max_depth(depth);
                let r = certified_integrate(c.func(), c.deriv(), c.interval(), config).unwrap();
                prop_assert!(r.certified_bound <= previous, "depth {depth}");
                previous = r.certified_bound;
            }
        }

        #[test]
        fn partition_is_exact_and_deterministic(
            c in integrands(), rule in preset(), exp10 in 1.0..3.5f64,
        ) {
            let config = CertifyConfig::new(rule.params(), 1.0, 10f64.powf(-exp10));
            let r = certified_integrate(c.func(), c.deriv(), c.interval(), config).unwrap();
            let pieces = &r.subintervals;
            prop_assert_eq!(pieces.len(), r.subinterval_count);
            prop_assert_eq!(pieces[0].interval.a(), c.a);
            prop_assert_eq!(pieces[pieces.len() - 1].interval.b(), c.b);
            for w in pieces.windows(2) {
                prop_assert_eq!(w[0].interval.b().to_bits(), w[1].interval.a().to_bits());
            }
            let count = pieces.len() as f64;
            let widths: f64 = pieces.iter().map(|s| s.interval.width()).sum();
            prop_assert!((widths - (c.b - c.a)).abs() <= 4.0 * count * f64::EPSILON * (c.b - c.a));
            let total: f64 = pieces.iter().map(|s| s.local_bound).sum();
            prop_assert!((total - r.certified_bound).abs() <= 4.0 * count * f64::EPSILON * r.certified_bound);

            let again = certified_integrate(c.func(), c.deriv(), c.interval(), config).unwrap();
            prop_assert_eq!(again, r);
        }
    }
}
