use convexquad::divergence::{self, DiscreteDistribution, GENERATOR_NAMES};
use convexquad::expr::{parse, BinaryOp, Expr, UnaryOp};
use convexquad::funcs::{catalog, Interval};
use convexquad::pointwise::{gap, lower_gap_bound, upper_gap_bound};
use convexquad::probability::{expectation_enclosure, MonotoneDensity};
use convexquad::quadrature::{adaptive_integrate, integrate, Partition};
use convexquad::Enclosure;
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = Interval> {
    (0.05f64..3.0, 0.1f64..4.0).prop_map(|(a, w)| Interval::new(a, a + w).unwrap())
}

fn catalog_member() -> impl Strategy<Value = (&'static str, Vec<f64>)> {
    prop_oneof![
        (0.0f64..10.0).prop_map(|k| ("kink", vec![k])),
        (0.0f64..3.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| ("quadratic", vec![a, b, c])),
        Just(("exp", vec![])),
        Just(("neg_log", vec![])),
        Just(("xlogx", vec![])),
        (1.0f64..4.0).prop_map(|p| ("power", vec![p])),
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(m, c)| ("linear", vec![m, c])),
    ]
}

/// Sorted interior breakpoints plus one split point per cell, as fractions.
fn partition_on(dom: Interval) -> impl Strategy<Value = Partition> {
    (1usize..20).prop_flat_map(move |n| {
        (
            prop::collection::vec(0.0f64..1.0, n - 1),
            prop::collection::vec(0.0f64..=1.0, n),
        )
            .prop_map(move |(mut cuts, fracs)| {
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let mut points = vec![dom.a()];
                points.extend(
                    cuts.iter()
                        .map(|c| dom.a() + c * dom.width())
                        .filter(|&p| p > dom.a() && p < dom.b()),
                );
                points.push(dom.b());
                points.dedup();
                let xi = points
                    .windows(2)
                    .zip(fracs.iter().cycle())
                    .map(|(w, f)| w[0] + f * (w[1] - w[0]))
                    .collect();
                Partition::new(points, xi).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gap_lies_between_its_bounds(dom in interval(), (name, params) in catalog_member(), frac in 0.001f64..0.999) {
        let f = catalog(name, &params, dom).unwrap();
        let x = dom.a() + frac * dom.width();
        let (lo, hi, g) = (lower_gap_bound(&f, x).unwrap(), upper_gap_bound(&f, x).unwrap(), gap(&f, x).unwrap());
        let slack = 1e-9 * (1.0 + g.abs());
        prop_assert!(lo <= g + slack && g <= hi + slack, "{lo} <= {g} <= {hi}");
    }

    #[test]
    fn composite_enclosure_contains_integral(
        (dom, p) in interval().prop_flat_map(|d| (Just(d), partition_on(d))),
        (name, params) in catalog_member(),
    ) {
        let f = catalog(name, &params, dom).unwrap();
        let truth = f.closed_form_integral(dom.a(), dom.b()).unwrap();
        let r = integrate(&f, &p).unwrap();
        prop_assert!(r.integral.contains_with_slack(truth, 1e-10 * (1.0 + truth.abs())), "{} vs {truth}", r.integral);
        prop_assert!(r.remainder.lo() >= -1e-12 * (1.0 + r.gn.abs()) || !p.is_midpoint());
    }

    #[test]
    fn adaptive_meets_tolerance(dom in interval(), (name, params) in catalog_member(), exp in 3i32..8) {
        let f = catalog(name, &params, dom).unwrap();
        let eps = 10f64.powi(-exp);
        let truth = f.closed_form_integral(dom.a(), dom.b()).unwrap();
        let res = adaptive_integrate(&f, eps, 1 << 18).unwrap();
        prop_assert!(res.eps_met);
        prop_assert!(res.result.integral.width() <= eps);
        prop_assert!(res.result.integral.contains_with_slack(truth, 1e-12 * (1.0 + truth.abs())));
    }

    #[test]
    fn enclosure_sum_contains_sum(a in -1e3f64..1e3, b in -1e3f64..1e3, c in -1e3f64..1e3, d in -1e3f64..1e3, t in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        let x = Enclosure::new(a.min(b), a.max(b)).unwrap();
        let y = Enclosure::new(c.min(d), c.max(d)).unwrap();
        let (u, v) = (x.lo() + t * (x.hi() - x.lo()), y.lo() + s * (y.hi() - y.lo()));
        prop_assert!((x + y).contains_with_slack(u + v, 1e-9));
        prop_assert!(x.scale(-2.0).contains_with_slack(-2.0 * u, 1e-9));
    }

    #[test]
    fn divergence_sandwich_and_gap(
        (p, q) in (1usize..30).prop_flat_map(|n| (
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], n),
        )),
    ) {
        prop_assume!(q.iter().sum::<f64>() > 0.0);
        let p = DiscreteDistribution::normalized(p).unwrap();
        let q = DiscreteDistribution::normalized(q).unwrap();
        for name in GENERATOR_NAMES {
            let f = divergence::generator(name).unwrap();
            let s = divergence::sandwich_report(&f, &p, &q).unwrap();
            prop_assert!(s.holds, "{name}: {s:?}");
            let g = divergence::gap_enclosure(&f, &p, &q).unwrap();
            let truth = s.half_csiszar - s.hh.midpoint();
            prop_assert!(g.contains_with_slack(truth, 1e-9), "{name}: {truth} outside {g}");
            let reference = f.reference(&p, &q).unwrap();
            let direct = divergence::csiszar(&f, &p, &q).unwrap();
            prop_assert!((reference - direct).abs() <= 1e-12 * (1.0 + reference.abs()));
        }
    }

    #[test]
    fn expectation_brackets_step_means(at in 0.05f64..0.95, low in 0.0f64..1.0, frac in 0.01f64..0.99) {
        // pick high so the step density has unit mass
        let high = (1.0 - low * at) / (1.0 - at);
        prop_assume!(high >= low);
        let unit = Interval::new(0.0, 1.0).unwrap();
        let d = MonotoneDensity::step(unit, at, low, high).unwrap();
        let mean = 0.5 * low * at * at + 0.5 * high * (1.0 - at * at);
        let e = expectation_enclosure(&d, frac).unwrap();
        prop_assert!(e.lo <= mean + 1e-12 && mean <= e.hi + 1e-12, "{e:?} vs {mean}");
    }

    #[test]
    fn printed_expressions_reparse(e in expression()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}

/// Trees in the shape the parser produces: constants are nonnegative.
fn expression() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (0.0f64..1e6).prop_map(Expr::Const),
        (0u32..100).prop_map(|k| Expr::Const(k as f64)),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (
                prop_oneof![
                    Just(UnaryOp::Neg),
                    Just(UnaryOp::Exp),
                    Just(UnaryOp::Log),
                    Just(UnaryOp::Abs),
                    Just(UnaryOp::Sqrt)
                ],
                inner.clone()
            )
                .prop_map(|(op, e)| Expr::unary(op, e)),
            (
                prop_oneof![
                    Just(BinaryOp::Add),
                    Just(BinaryOp::Sub),
                    Just(BinaryOp::Mul),
                    Just(BinaryOp::Div)
                ],
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
            (inner.clone(), -4.0f64..4.0).prop_map(|(b, p)| Expr::pow(b, p)),
            (inner.clone(), inner).prop_map(|(l, r)| Expr::max(l, r)),
        ]
    })
}
