//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the verdicts are always printed.

use std::process::{Command, ExitCode};
use std::time::Instant;

use convexquad::divergence::{self, DiscreteDistribution, GENERATOR_NAMES};
use convexquad::expr::{derivative, parse, Expr};
use convexquad::funcs::{catalog, kink, ConvexFunction, Interval};
use convexquad::pointwise::{gap, hh_bounds, hh_difference, lower_gap_bound, upper_gap_bound};
use convexquad::probability::{midpoint_expectation_enclosure, MonotoneDensity};
use convexquad::quadrature::{
    adaptive_integrate, integrate, remainder_enclosure, trapezoid_remainder_enclosure, Partition, XiRule,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * 1f64.max(x.abs()).max(y.abs())
}

/// Eight catalog members on a positive domain.
fn catalog_on(dom: Interval) -> Vec<ConvexFunction> {
    let c = dom.a() + 0.3 * dom.width();
    [
        ("kink", vec![2.0, c]),
        ("quadratic", vec![]),
        ("exp", vec![]),
        ("neg_log", vec![]),
        ("xlogx", vec![]),
        ("power", vec![2.5]),
        ("linear", vec![1.5, -0.5]),
        ("constant", vec![2.0]),
    ]
    .into_iter()
    .map(|(name, params)| catalog(name, &params, dom).expect("catalog member"))
    .collect()
}

fn ac1_sharpness() -> Check {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..20 {
        let k = 10.0 * (1.0 - rng.random::<f64>());
        let a = rng.random_range(-5.0..5.0);
        let b = a + rng.random_range(0.1..5.0);
        let dom = Interval::new(a, b).map_err(|x| x.to_string())?;
        let f = kink(dom, k, dom.midpoint());
        let m = dom.midpoint();
        let want = 0.25 * k * (b - a) * (b - a);
        let got = [
            lower_gap_bound(&f, m).map_err(|x| x.to_string())?,
            upper_gap_bound(&f, m).map_err(|x| x.to_string())?,
            gap(&f, m).map_err(|x| x.to_string())?,
        ];
        ensure(got.iter().all(|&v| close(v, want, 1e-12)), || {
            format!("k = {k}, [{a}, {b}]: {got:?} vs {want}")
        })?;
    }
    Ok(())
}

fn ac2_gap_sandwich() -> Check {
    let dom = Interval::new(0.25, 2.5).unwrap();
    let mut rng = StdRng::seed_from_u64(2);
    for f in catalog_on(dom) {
        ensure(f.has_antiderivative(), || format!("{} lacks a closed form", f.label()))?;
        for _ in 0..200 {
            let x = rng.random_range(dom.a()..dom.b());
            if x == dom.a() {
                continue;
            }
            let lo = lower_gap_bound(&f, x).map_err(|x| x.to_string())?;
            let hi = upper_gap_bound(&f, x).map_err(|x| x.to_string())?;
            let g = gap(&f, x).map_err(|x| x.to_string())?;
            let slack = 1e-9 * 1f64.max(g.abs());
            ensure(lo <= g + slack && g <= hi + slack, || {
                format!("{} at {x}: {lo} <= {g} <= {hi} fails", f.label())
            })?;
        }
    }
    Ok(())
}

fn ac3_hermite_hadamard() -> Check {
    let dom = Interval::new(0.25, 2.5).unwrap();
    for f in catalog_on(dom) {
        let b = hh_bounds(&f).map_err(|x| x.to_string())?;
        let d = hh_difference(&f).map_err(|x| x.to_string())?;
        ensure(b.contains_with_slack(d, 1e-9), || {
            format!("{}: {d} outside {b}", f.label())
        })?;
    }
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        let k = 10.0 * (1.0 - rng.random::<f64>());
        let a = rng.random_range(-5.0..5.0);
        let w = rng.random_range(0.1..5.0);
        let dom = Interval::new(a, a + w).unwrap();
        let b = hh_bounds(&kink(dom, k, dom.midpoint())).map_err(|x| x.to_string())?;
        let want = 0.25 * k * dom.width();
        ensure(close(b.lo(), want, 1e-12) && close(b.hi(), want, 1e-12), || {
            format!("kink k = {k} on {dom}: {b} vs {want}")
        })?;
    }
    let lin = catalog("linear", &[-3.0, 7.0], dom).unwrap();
    let b = hh_bounds(&lin).map_err(|x| x.to_string())?;
    ensure(b.lo() == 0.0 && b.hi() == 0.0, || format!("linear: {b}"))
}

fn ac4_composite_order() -> Check {
    let unit = Interval::new(0.0, 1.0).unwrap();
    let f = catalog("exp", &[], unit).unwrap();
    let truth = std::f64::consts::E - 1.0;
    let mut widths = vec![0.0];
    for n in 1..=32 {
        let p = Partition::uniform(unit, n, &XiRule::Midpoint).map_err(|x| x.to_string())?;
        let r = integrate(&f, &p).map_err(|x| x.to_string())?;
        ensure(r.integral.contains(truth), || {
            format!("n = {n}: {} misses e - 1", r.integral)
        })?;
        widths.push(r.integral.width());
        if n == 4 {
            ensure(r.integral.lo() >= 1.71379 && r.integral.hi() <= 1.72723, || {
                format!("n = 4: {} not inside [1.71379, 1.72723]", r.integral)
            })?;
        }
    }
    for n in [8, 16] {
        let ratio = widths[2 * n] / widths[n];
        ensure((ratio - 0.25).abs() <= 0.05, || {
            format!("width ratio at n = {n}: {ratio}")
        })?;
    }
    Ok(())
}

fn ac5_adaptive() -> Check {
    let unit = Interval::new(0.0, 1.0).unwrap();
    for (name, truth) in [
        ("exp", std::f64::consts::E - 1.0),
        ("xlogx", -0.25),
        ("quadratic", 1.0 / 3.0),
    ] {
        let f = catalog(name, &[], unit).unwrap();
        let res = adaptive_integrate(&f, 1e-6, 1 << 16).map_err(|x| x.to_string())?;
        let enc = res.result.integral;
        ensure(res.eps_met && enc.width() <= 1e-6, || {
            format!("{name}: width {}", enc.width())
        })?;
        ensure(enc.contains(truth), || format!("{name}: {enc} misses {truth}"))?;
        ensure(res.result.cells <= 10_000, || {
            format!("{name}: {} cells", res.result.cells)
        })?;
    }
    Ok(())
}

fn ac6_specialization() -> Check {
    let dom = Interval::new(0.25, 2.5).unwrap();
    for f in catalog_on(dom) {
        for n in 1..=32 {
            let p = Partition::uniform(dom, n, &XiRule::Midpoint).map_err(|x| x.to_string())?;
            let general = remainder_enclosure(&f, &p).map_err(|x| x.to_string())?;
            let special = trapezoid_remainder_enclosure(&f, &p).map_err(|x| x.to_string())?;
            ensure(
                close(general.lo(), special.lo(), 1e-12) && close(general.hi(), special.hi(), 1e-12),
                || format!("{} n = {n}: {general} vs {special}", f.label()),
            )?;
        }
    }
    Ok(())
}

fn ac7_expectation() -> Check {
    let unit = Interval::new(0.0, 1.0).unwrap();
    let lin = midpoint_expectation_enclosure(&MonotoneDensity::linear(unit)).map_err(|x| x.to_string())?;
    ensure(lin.lo == 0.5 && lin.hi == 0.75 && lin.contains(2.0 / 3.0), || {
        format!("2t: {lin:?}")
    })?;
    let uni = midpoint_expectation_enclosure(&MonotoneDensity::uniform(unit)).map_err(|x| x.to_string())?;
    ensure(uni.lo == 0.5 && uni.hi == 0.5, || format!("uniform: {uni:?}"))?;
    let step = MonotoneDensity::step(unit, 0.5, 0.0, 2.0).map_err(|x| x.to_string())?;
    let st = midpoint_expectation_enclosure(&step).map_err(|x| x.to_string())?;
    ensure(st.lo == 0.75 && st.hi == 0.75, || format!("step: {st:?}"))
}

fn random_pair(rng: &mut StdRng) -> (DiscreteDistribution, DiscreteDistribution) {
    let n = rng.random_range(1..=50);
    let mut draw = || {
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        DiscreteDistribution::normalized(w).unwrap()
    };
    (draw(), draw())
}

fn ac8_divergences() -> Check {
    let mut rng = StdRng::seed_from_u64(8);
    let corpus: Vec<_> = (0..100).map(|_| random_pair(&mut rng)).collect();
    let chi2 = divergence::generator("chi2").map_err(|x| x.to_string())?;
    for (p, q) in &corpus {
        let x2 = divergence::chi_squared(p, q);
        let d = divergence::csiszar(&chi2, p, q).map_err(|x| x.to_string())?;
        let lw = divergence::lin_wong(&chi2, p, q).map_err(|x| x.to_string())?;
        let hh = divergence::hh_divergence(&chi2, p, q).map_err(|x| x.to_string())?.value;
        ensure(close(d, x2, 1e-10), || format!("D_f {d} vs chi2 {x2}"))?;
        ensure(close(lw, x2 / 4.0, 1e-10), || format!("Lin-Wong {lw} vs {}", x2 / 4.0))?;
        ensure(hh.contains_with_slack(x2 / 3.0, 1e-10 * 1f64.max(x2)), || {
            format!("HH {hh} vs {}", x2 / 3.0)
        })?;
    }
    for name in GENERATOR_NAMES {
        let f = divergence::generator(name).map_err(|x| x.to_string())?;
        for (p, q) in &corpus {
            let s = divergence::sandwich_report(&f, p, q).map_err(|x| x.to_string())?;
            ensure(s.holds, || format!("{name}: sandwich fails {s:?}"))?;
            let g = divergence::gap_enclosure(&f, p, q).map_err(|x| x.to_string())?;
            let truth = s.half_csiszar - s.hh.midpoint();
            ensure(g.contains_with_slack(truth, 1e-9 * 1f64.max(truth.abs())), || {
                format!("{name}: gap {truth} outside {g}")
            })?;
        }
    }
    let p = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
    let q = DiscreteDistribution::new(vec![0.25, 0.75]).unwrap();
    let s = divergence::sandwich_report(&chi2, &p, &q).map_err(|x| x.to_string())?;
    let g = divergence::gap_enclosure(&chi2, &p, &q).map_err(|x| x.to_string())?;
    let truth = s.half_csiszar - s.hh.midpoint();
    ensure(
        s.holds
            && s.lin_wong == 0.0625
            && (s.hh.midpoint() - 0.0833333).abs() < 1e-6
            && s.half_csiszar == 0.125
            && (truth - 0.0416667).abs() < 1e-6
            && g.lo() == 0.0
            && g.hi() == 0.0625,
        || format!("spot check: {s:?}, gap {g}"),
    )
}

type Reference = fn(f64) -> f64;

/// Expression, independent evaluator, sampling interval, smooth there.
fn parser_corpus() -> Vec<(&'static str, Reference, (f64, f64), bool)> {
    vec![
        ("x^2", |x| x * x, (-2.0, 2.0), true),
        ("abs(x-0.5)", |x| (x - 0.5).abs(), (0.0, 1.0), false),
        ("x*log(x)", |x| x * x.ln(), (0.1, 3.0), true),
        ("exp(x)", f64::exp, (-3.0, 3.0), true),
        ("1/x", |x| 1.0 / x, (0.2, 4.0), true),
        ("(x-0.5)^2 + 0", |x| (x - 0.5) * (x - 0.5), (-1.0, 2.0), true),
        ("-x^2", |x| -(x * x), (-2.0, 2.0), true),
        ("2*x + 3", |x| 2.0 * x + 3.0, (-5.0, 5.0), true),
        ("x - 1 - 2", |x| x - 3.0, (-5.0, 5.0), true),
        ("8/x/2", |x| 4.0 / x, (0.5, 4.0), true),
        ("sqrt(x)", f64::sqrt, (0.1, 4.0), true),
        ("-sqrt(x) + x^3", |x| -x.sqrt() + x * x * x, (0.1, 2.0), true),
        ("exp(-x^2)", |x| (-x * x).exp(), (-2.0, 2.0), true),
        ("log(1 + x^2)", |x| (1.0 + x * x).ln(), (-3.0, 3.0), true),
        ("x^-1", |x| 1.0 / x, (0.5, 3.0), true),
        ("x^(1/2)", f64::sqrt, (0.1, 3.0), true),
        ("x^1.5", |x| x.powf(1.5), (0.1, 3.0), true),
        ("(2*x - 1)^4", |x| (2.0 * x - 1.0).powi(4), (-1.0, 2.0), true),
        ("max(x, 1 - x)", |x| x.max(1.0 - x), (0.0, 1.0), false),
        ("abs(x) + abs(x - 1)", |x| x.abs() + (x - 1.0).abs(), (-1.0, 2.0), false),
        ("exp(x)*sqrt(x + 1)", |x| x.exp() * (x + 1.0).sqrt(), (-0.5, 2.0), true),
        ("ln(x)/x", |x| x.ln() / x, (0.5, 5.0), true),
        ("-(x - 1)*(x + 1)", |x| -((x - 1.0) * (x + 1.0)), (-2.0, 2.0), true),
        ("x/(1 + x)", |x| x / (1.0 + x), (0.0, 5.0), true),
        ("pi*x^2", |x| std::f64::consts::PI * x * x, (-1.0, 1.0), true),
        ("e*x^2 - e", |x| std::f64::consts::E * (x * x - 1.0), (-2.0, 2.0), true),
        ("--x", |x| x, (-1.0, 1.0), true),
        ("3 - -x", |x| 3.0 + x, (-1.0, 1.0), true),
        ("1e-3*x^2 + 2.5E2", |x| 1e-3 * x * x + 250.0, (-10.0, 10.0), true),
        ("(x + 1)^2^2", |x| (x + 1.0).powi(4), (-2.0, 1.0), true),
    ]
}

fn ac9_parser() -> Check {
    let corpus = parser_corpus();
    ensure(corpus.len() == 30, || format!("corpus has {} entries", corpus.len()))?;
    let mut rng = StdRng::seed_from_u64(9);
    for (src, reference, (lo, hi), smooth) in corpus {
        let tree = parse(src).map_err(|x| format!("{src}: {x}"))?;
        let printed = tree.to_string();
        let again: Expr = parse(&printed).map_err(|x| format!("{src} -> {printed}: {x}"))?;
        ensure(again == tree, || format!("{src} -> {printed} does not round-trip"))?;
        for _ in 0..100 {
            let t = rng.random_range(lo..hi);
            let (got, want) = (tree.eval(t).map_err(|x| x.to_string())?, reference(t));
            ensure(close(got, want, 1e-12), || format!("{src} at {t}: {got} vs {want}"))?;
        }
        if !smooth {
            ensure(derivative(&tree).is_err(), || format!("{src}: kink differentiated"))?;
            continue;
        }
        let d = derivative(&tree).map_err(|x| format!("{src}: {x}"))?;
        let h = 1e-5;
        for i in 1..20 {
            let t = lo + (hi - lo) * i as f64 / 20.0;
            let fd = (reference(t + h) - reference(t - h)) / (2.0 * h);
            let dv = d.eval(t).map_err(|x| x.to_string())?;
            ensure(close(dv, fd, 1e-6), || format!("d/dx {src} at {t}: {dv} vs {fd} ({d})"))?;
        }
    }
    Ok(())
}

fn cli(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_convexquad"))
        .args(args)
        .output()
        .map_err(|x| x.to_string())?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    ))
}

fn ac10_cli() -> Check {
    let dir = tempfile::tempdir().map_err(|x| x.to_string())?;
    let p = dir.path().join("p.csv");
    let q = dir.path().join("q.csv");
    std::fs::write(&p, "0.5\n0.5\n").map_err(|x| x.to_string())?;
    std::fs::write(&q, "0.25\n0.75\n").map_err(|x| x.to_string())?;
    let (p, q) = (p.to_str().unwrap(), q.to_str().unwrap());
    let runs: [Vec<&str>; 3] = [
        vec!["integrate", "--fn", "exp(x)", "--interval", "0", "1", "--eps", "1e-6"],
        vec!["gap", "--fn", "abs(x-0.5)", "--interval", "0", "1", "--x", "0.5"],
        vec!["divergence", "--generator", "chi2", "--p", p, "--q", q],
    ];
    let mut reports = Vec::new();
    for args in &runs {
        let (c1, first) = cli(args)?;
        let (c2, second) = cli(args)?;
        ensure(c1 == 0 && c2 == 0, || format!("{args:?} exited {c1}, {c2}"))?;
        ensure(first == second, || format!("{args:?} is not deterministic"))?;
        reports.push(serde_json::from_str::<Value>(&first).map_err(|x| x.to_string())?);
    }
    let num = |v: &Value| v.as_f64().unwrap_or(f64::NAN);
    let r = &reports[0];
    let (lo, hi) = (num(&r["integral"]["lo"]), num(&r["integral"]["hi"]));
    ensure(lo <= 1.7182818 && 1.7182818 <= hi && hi - lo <= 1e-6, || {
        format!("integrate: [{lo}, {hi}]")
    })?;
    ensure(r["certified"] == Value::Bool(true) && r["cells"].is_u64(), || {
        "integrate fields".into()
    })?;
    let r = &reports[1];
    ensure(num(&r["lower"]) == 0.25 && num(&r["upper"]) == 0.25, || {
        format!("gap: {r}")
    })?;
    let r = &reports[2];
    ensure(
        num(&r["csiszar"]) == 0.25
            && (num(&r["hh"]["lo"]) - 0.0833333).abs() < 1e-6
            && (num(&r["hh"]["hi"]) - 0.0833333).abs() < 1e-6
            && r["sandwich_holds"] == Value::Bool(true),
        || format!("divergence: {r}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 sharpness equalities for the kink", ac1_sharpness),
        ("AC2 gap sandwich on the catalog", ac2_gap_sandwich),
        ("AC3 Hermite-Hadamard bounds", ac3_hermite_hadamard),
        ("AC4 composite containment and order", ac4_composite_order),
        ("AC5 adaptive integrator", ac5_adaptive),
        ("AC6 trapezoid specialization identity", ac6_specialization),
        ("AC7 expectation bounds", ac7_expectation),
        ("AC8 divergence closed forms and sandwich", ac8_divergences),
        ("AC9 parser round trip and derivatives", ac9_parser),
        ("AC10 end-to-end CLI determinism", ac10_cli),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match verdict {
            Ok(()) => println!("PASS  {name}  ({ms:.1} ms)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}  ({ms:.1} ms): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
