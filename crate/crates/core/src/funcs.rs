//! Convex functions on a compact interval, their one-sided derivatives, and a
//! catalog of reference functions with closed-form antiderivatives.
//!
//! A [`ConvexFunction`] carries either an exact derivative oracle (the pair
//! `f'_-`, `f'_+`) or falls back to one-sided difference quotients. Oracle
//! values may be infinite at the domain endpoints, e.g. `f'_+(0) = -inf` for
//! `t ln t`; downstream bounds treat those as trivially true.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result, Side};

/// Shared, thread-safe real function.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default relative tolerance for convexity and monotonicity checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Self { a, b })
        } else {
            Err(Error::InvalidInterval { a, b })
        }
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
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.a <= x && x <= self.b
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.a < x && x < self.b
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    pub(crate) fn check_contains(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }

    pub(crate) fn check_interior(&self, x: f64) -> Result<()> {
        if self.contains_interior(x) {
            Ok(())
        } else {
            Err(Error::NotInterior {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }

    /// `n` equispaced points including both endpoints exactly.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "a grid needs at least both endpoints");
        let last = n - 1;
        (0..n)
            .map(|i| {
                if i == last {
                    self.b
                } else {
                    self.a + self.width() * (i as f64) / (last as f64)
                }
            })
            .collect()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMethod {
    Exact,
    FiniteDifference,
}

/// A one-sided derivative value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub side: Side,
    pub uncertainty: f64,
    pub method: DerivativeMethod,
}

/// Step schedule for one-sided difference quotients: `h0, h0/2, ...,
/// h0/2^(levels-1)`, with `h0` expressed as a fraction of the domain width
/// and clipped to the distance from the evaluation point to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSchedule {
    pub h0_fraction: f64,
    pub levels: u32,
}

impl Default for FdSchedule {
    fn default() -> Self {
        Self {
            h0_fraction: 1.0 / 256.0,
            levels: 16,
        }
    }
}

#[derive(Clone)]
enum Derivatives {
    Exact { right: RealFn, left: RealFn },
    FiniteDifference(FdSchedule),
}

/// A convex function on a compact interval.
///
/// Immutable after construction; cloning shares the underlying closures.
#[derive(Clone)]
pub struct ConvexFunction {
    domain: Interval,
    eval: RealFn,
    derivatives: Derivatives,
    antiderivative: Option<RealFn>,
    label: String,
    tol: f64,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("exact_derivatives", &self.has_exact_derivatives())
            .field("antiderivative", &self.antiderivative.is_some())
            .finish()
    }
}

impl ConvexFunction {
    /// Function with an exact one-sided derivative oracle.
    pub fn new<F, R, L>(domain: Interval, eval: F, right: R, left: L, label: impl Into<String>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            domain,
            eval: Arc::new(eval),
            derivatives: Derivatives::Exact {
                right: Arc::new(right),
                left: Arc::new(left),
            },
            antiderivative: None,
            label: label.into(),
            tol: DEFAULT_TOLERANCE,
        }
    }

    /// Function whose one-sided derivatives are estimated by difference
    /// quotients.
    pub fn from_fn<F>(domain: Interval, eval: F, label: impl Into<String>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            domain,
            eval: Arc::new(eval),
            derivatives: Derivatives::FiniteDifference(FdSchedule::default()),
            antiderivative: None,
            label: label.into(),
            tol: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_antiderivative<F>(mut self, antiderivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.antiderivative = Some(Arc::new(antiderivative));
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Replace the step schedule; switches an exact oracle to difference
    /// quotients.
    pub fn with_fd_schedule(mut self, schedule: FdSchedule) -> Self {
        self.derivatives = Derivatives::FiniteDifference(schedule);
        self
    }

    /// Same function viewed on a subinterval of its domain.
    pub fn restrict(&self, domain: Interval) -> Result<Self> {
        if !self.domain.contains_interval(&domain) {
            return Err(Error::OutOfDomain {
                x: if domain.a() < self.domain.a() {
                    domain.a()
                } else {
                    domain.b()
                },
                a: self.domain.a(),
                b: self.domain.b(),
            });
        }
        let mut out = self.clone();
        out.domain = domain;
        Ok(out)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn has_exact_derivatives(&self) -> bool {
        matches!(self.derivatives, Derivatives::Exact { .. })
    }

    pub fn has_antiderivative(&self) -> bool {
        self.antiderivative.is_some()
    }

    /// `f(x)`; fails outside the domain or on a non-finite value.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.domain.check_contains(x)?;
        self.eval_raw(x)
    }

    fn eval_raw(&self, x: f64) -> Result<f64> {
        let v = (self.eval)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                at: x,
                detail: format!("{} evaluated to {v}", self.label),
            })
        }
    }

    /// One-sided derivative; see [`one_sided_derivative`].
    pub fn derivative(&self, x: f64, side: Side) -> Result<f64> {
        one_sided_derivative(self, x, side)
    }

    pub fn right_derivative(&self, x: f64) -> Result<f64> {
        one_sided_derivative(self, x, Side::Right)
    }

    pub fn left_derivative(&self, x: f64) -> Result<f64> {
        one_sided_derivative(self, x, Side::Left)
    }

    /// `int_lo^hi f` from the attached antiderivative, if any.
    pub fn closed_form_integral(&self, lo: f64, hi: f64) -> Option<f64> {
        self.antiderivative.as_ref().map(|big_f| big_f(hi) - big_f(lo))
    }
}

/// `f'_-(x)` or `f'_+(x)`.
///
/// The left derivative needs `x > a`, the right one `x < b`. Values may be
/// infinite at the endpoints; a NaN from the oracle is reported as an
/// evaluation failure.
pub fn one_sided_derivative(f: &ConvexFunction, x: f64, side: Side) -> Result<f64> {
    let dom = f.domain;
    dom.check_contains(x)?;
    match side {
        Side::Left if x <= dom.a() => return Err(Error::UndefinedSide { x, side }),
        Side::Right if x >= dom.b() => return Err(Error::UndefinedSide { x, side }),
        _ => {}
    }
    match &f.derivatives {
        Derivatives::Exact { right, left } => {
            let v = match side {
                Side::Right => right(x),
                Side::Left => left(x),
            };
            if v.is_nan() {
                Err(Error::Evaluation {
                    at: x,
                    detail: format!("{side} derivative of {} is undefined", f.label),
                })
            } else {
                Ok(v)
            }
        }
        Derivatives::FiniteDifference(schedule) => {
            let room = match side {
                Side::Right => dom.b() - x,
                Side::Left => x - dom.a(),
            };
            let h0 = (dom.width() * schedule.h0_fraction).min(room);
            finite_difference_derivative(f, x, side, h0, schedule.levels).map(|e| e.value)
        }
    }
}

/// One-sided difference quotients at the steps `h0 / 2^k`, `k < levels`.
///
/// Returns the quotient at the smallest step; the uncertainty is its
/// distance to the quotient at the previous step. For convex `f` the right
/// quotients are nonincreasing and the left quotients nondecreasing as the
/// step shrinks; a violation beyond tolerance is reported as non-convexity.
/// Only `f`'s evaluator is used.
pub fn finite_difference_derivative(
    f: &ConvexFunction,
    x: f64,
    side: Side,
    h0: f64,
    levels: u32,
) -> Result<DerivativeEstimate> {
    let dom = f.domain;
    dom.check_contains(x)?;
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "initial step must be positive, got {h0}"
        )));
    }
    if levels < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 levels, got {levels}")));
    }
    let outer = match side {
        Side::Right => x + h0,
        Side::Left => x - h0,
    };
    if x == outer {
        return Err(Error::UndefinedSide { x, side });
    }
    dom.check_contains(outer)?;

    let fx = f.eval_raw(x)?;
    let mut quotients = Vec::with_capacity(levels as usize);
    let mut noise = Vec::with_capacity(levels as usize);
    let mut h = h0;
    for _ in 0..levels {
        let t = match side {
            Side::Right => x + h,
            Side::Left => x - h,
        };
        // realized step, so the quotient of an affine piece is exact
        let step = (t - x).abs();
        if step == 0.0 {
            break;
        }
        let ft = f.eval_raw(t)?;
        let q = match side {
            Side::Right => (ft - fx) / step,
            Side::Left => (fx - ft) / step,
        };
        quotients.push(q);
        noise.push(8.0 * f64::EPSILON * (fx.abs() + ft.abs()) / step);
        h *= 0.5;
    }
    if quotients.len() < 2 {
        return Err(Error::Precondition(format!(
            "step schedule collapses below machine resolution at x = {x}"
        )));
    }

    for k in 1..quotients.len() {
        let (prev, next) = (quotients[k - 1], quotients[k]);
        let tol = f.tol * 1f64.max(prev.abs()) + noise[k] + noise[k - 1];
        let violated = match side {
            Side::Right => next > prev + tol,
            Side::Left => next < prev - tol,
        };
        if violated {
            return Err(Error::NotConvex(format!(
                "{side} difference quotients of {} at {x} are not monotone ({prev} then {next})",
                f.label
            )));
        }
    }

    let n = quotients.len();
    Ok(DerivativeEstimate {
        value: quotients[n - 1],
        side,
        uncertainty: (quotients[n - 1] - quotients[n - 2]).abs(),
        method: DerivativeMethod::FiniteDifference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub passed: bool,
    /// Largest normalized secant-slope decrease found; `<= tol` means pass.
    pub worst_violation: f64,
    /// Grid triple where the worst violation occurs.
    pub witness: (f64, f64, f64),
}

/// Checks secant-slope monotonicity on `gridpoints` equispaced points
/// including both endpoints.
///
/// For each consecutive triple `t1 < t2 < t3` the violation is
/// `(slope(t1,t2) - slope(t2,t3)) * (t3 - t1) / max(1, max |f|)`, which is
/// dimensionless. Evaluation failures surface as errors, not as a verdict.
pub fn check_convexity(f: &ConvexFunction, gridpoints: usize) -> Result<ConvexityReport> {
    check_convexity_with_tol(f, gridpoints, f.tol)
}

pub fn check_convexity_with_tol(f: &ConvexFunction, gridpoints: usize, tol: f64) -> Result<ConvexityReport> {
    if gridpoints < 3 {
        return Err(Error::InvalidParameter(format!(
            "convexity check needs at least 3 grid points, got {gridpoints}"
        )));
    }
    let ts = f.domain.grid(gridpoints);
    let vs = ts.iter().map(|&t| f.eval(t)).collect::<Result<Vec<_>>>()?;
    let magnitude = vs.iter().fold(1f64, |m, v| m.max(v.abs()));

    let mut worst = f64::NEG_INFINITY;
    let mut witness = (ts[0], ts[1], ts[2]);
    for i in 0..ts.len() - 2 {
        let s12 = (vs[i + 1] - vs[i]) / (ts[i + 1] - ts[i]);
        let s23 = (vs[i + 2] - vs[i + 1]) / (ts[i + 2] - ts[i + 1]);
        let violation = (s12 - s23) * (ts[i + 2] - ts[i]) / magnitude;
        if violation > worst {
            worst = violation;
            witness = (ts[i], ts[i + 1], ts[i + 2]);
        }
    }
    Ok(ConvexityReport {
        passed: worst <= tol,
        worst_violation: worst,
        witness,
    })
}

/// Names accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 8] = [
    "kink",
    "quadratic",
    "exp",
    "neg_log",
    "xlogx",
    "power",
    "linear",
    "constant",
];

/// Reference convex functions with exact one-sided derivatives and a
/// closed-form antiderivative.
///
/// | name        | params            | f(t)                         |
/// |-------------|-------------------|------------------------------|
/// | `kink`      | `k [, c]`         | `k |t - c|`, c defaults to the domain midpoint |
/// | `quadratic` | `[] | [a, b, c]`  | `t^2` or `a t^2 + b t + c`, a >= 0 |
/// | `exp`       | `[]`              | `e^t`                        |
/// | `neg_log`   | `[]`              | `-ln t`, domain in `[0, inf)` |
/// | `xlogx`     | `[]`              | `t ln t` (0 at 0), domain in `[0, inf)` |
/// | `power`     | `p`               | `|t|^p`, p >= 1              |
/// | `linear`    | `m, c`            | `m t + c`                    |
/// | `constant`  | `c`               | `c`                          |
pub fn catalog(name: &str, params: &[f64], domain: Interval) -> Result<ConvexFunction> {
    let arity = |allowed: &[usize]| -> Result<()> {
        if allowed.contains(&params.len()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{name} takes {allowed:?} parameters, got {}",
                params.len()
            )))
        }
    };
    if let Some(p) = params.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite parameter {p}")));
    }
    let name = if name == "power_p" { "power" } else { name };
    match name {
        "kink" => {
            arity(&[1, 2])?;
            let k = params[0];
            let c = params.get(1).copied().unwrap_or_else(|| domain.midpoint());
            if k < 0.0 {
                return Err(Error::InvalidParameter(format!("kink slope must be >= 0, got {k}")));
            }
            Ok(kink(domain, k, c))
        }
        "quadratic" => {
            arity(&[0, 3])?;
            let (qa, qb, qc) = if params.is_empty() {
                (1.0, 0.0, 0.0)
            } else {
                (params[0], params[1], params[2])
            };
            if qa < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "quadratic leading coefficient must be >= 0, got {qa}"
                )));
            }
            let label = if params.is_empty() {
                "t^2".to_string()
            } else {
                format!("{qa}*t^2 + {qb}*t + {qc}")
            };
            let d = move |t: f64| 2.0 * qa * t + qb;
            Ok(
                ConvexFunction::new(domain, move |t| (qa * t + qb) * t + qc, d, d, label)
                    .with_antiderivative(move |t| ((qa / 3.0 * t + qb / 2.0) * t + qc) * t),
            )
        }
        "exp" => {
            arity(&[0])?;
            Ok(ConvexFunction::new(domain, f64::exp, f64::exp, f64::exp, "exp(t)").with_antiderivative(f64::exp))
        }
        "neg_log" => {
            arity(&[0])?;
            nonnegative_domain(name, domain)?;
            let d = |t: f64| -1.0 / t;
            Ok(
                ConvexFunction::new(domain, |t: f64| -t.ln(), d, d, "-ln(t)").with_antiderivative(|t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        t - t * t.ln()
                    }
                }),
            )
        }
        "xlogx" => {
            arity(&[0])?;
            nonnegative_domain(name, domain)?;
            let d = |t: f64| t.ln() + 1.0;
            Ok(
                ConvexFunction::new(domain, xlogx, d, d, "t*ln(t)").with_antiderivative(|t: f64| {
                    if t == 0.0 {
                        0.0
                    } else {
                        0.5 * t * t * t.ln() - 0.25 * t * t
                    }
                }),
            )
        }
        "power" => {
            arity(&[1])?;
            let p = params[0];
            if p < 1.0 {
                return Err(Error::InvalidParameter(format!("power needs p >= 1, got {p}")));
            }
            if p == 1.0 {
                let mut f = kink(domain, 1.0, 0.0);
                f.label = "|t|".into();
                return Ok(f);
            }
            let d = move |t: f64| p * t.abs().powf(p - 1.0) * t.signum();
            Ok(
                ConvexFunction::new(domain, move |t: f64| t.abs().powf(p), d, d, format!("|t|^{p}"))
                    .with_antiderivative(move |t: f64| t.signum() * t.abs().powf(p + 1.0) / (p + 1.0)),
            )
        }
        "linear" => {
            arity(&[2])?;
            let (m, c) = (params[0], params[1]);
            let d = move |_: f64| m;
            Ok(
                ConvexFunction::new(domain, move |t| m * t + c, d, d, format!("{m}*t + {c}"))
                    .with_antiderivative(move |t| (0.5 * m * t + c) * t),
            )
        }
        "constant" => {
            arity(&[1])?;
            let c = params[0];
            let d = |_: f64| 0.0;
            Ok(ConvexFunction::new(domain, move |_| c, d, d, format!("{c}")).with_antiderivative(move |t| c * t))
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

/// `k |t - c|`, the extremal function for the trapezoid-gap bounds.
pub fn kink(domain: Interval, k: f64, c: f64) -> ConvexFunction {
    ConvexFunction::new(
        domain,
        move |t: f64| k * (t - c).abs(),
        move |t: f64| if t >= c { k } else { -k },
        move |t: f64| if t > c { k } else { -k },
        format!("{k}*|t - {c}|"),
    )
    .with_antiderivative(move |t: f64| 0.5 * k * (t - c) * (t - c).abs())
}

pub(crate) fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn nonnegative_domain(name: &str, domain: Interval) -> Result<()> {
    if domain.a() < 0.0 {
        Err(Error::InvalidParameter(format!(
            "{name} needs a domain inside [0, inf), got {domain}"
        )))
    } else {
        Ok(())
    }
}
