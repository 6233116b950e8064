//! Single-interval bounds on the generalized trapezoid gap
//!
//! ```text
//! gap(x) = (x - a) f(a) + (b - x) f(b) - int_a^b f
//! ```
//!
//! for convex `f`, together with the Hermite-Hadamard refinements and the
//! classical bounded-variation / Lipschitz / Sobolev-norm bounds.

use serde::Serialize;

use crate::enclosure::{weighted, Enclosure};
use crate::error::{Error, Result};
use crate::funcs::{ConvexFunction, Interval};
use crate::quadrature::{derivative_at_smooth_point, integral_reference};

/// Slack used when reporting whether an inequality holds numerically.
pub const REPORT_SLACK: f64 = 1e-9;

/// A convex function and the split point of the generalized trapezoid.
#[derive(Debug, Clone, Copy)]
pub struct GapQuery<'a> {
    f: &'a ConvexFunction,
    x: f64,
}

impl<'a> GapQuery<'a> {
    /// `x` must lie in the closed domain; operations that need an interior
    /// point check that themselves.
    pub fn new(f: &'a ConvexFunction, x: f64) -> Result<Self> {
        f.domain().check_contains(x)?;
        Ok(Self { f, x })
    }

    pub fn function(&self) -> &'a ConvexFunction {
        self.f
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `(x - a) f(a) + (b - x) f(b)`.
    pub fn rule(&self) -> Result<f64> {
        let dom = self.f.domain();
        let (a, b) = (dom.a(), dom.b());
        Ok((self.x - a) * self.f.eval(a)? + (b - self.x) * self.f.eval(b)?)
    }

    /// Reference gap value (closed-form antiderivative when available).
    /// Not certified; see [`GapQuery::enclosure`].
    pub fn gap(&self) -> Result<f64> {
        Ok(self.rule()? - integral_reference(self.f, self.f.domain())?)
    }

    /// `1/2 [(b - x)^2 f'_+(x) - (x - a)^2 f'_-(x)] <= gap`, for interior `x`.
    /// Equality holds for `k |t - (a+b)/2|` at the midpoint.
    pub fn lower_bound(&self) -> Result<f64> {
        let dom = self.f.domain();
        dom.check_interior(self.x)?;
        let (a, b, x) = (dom.a(), dom.b(), self.x);
        Ok(0.5
            * (weighted((b - x) * (b - x), self.f.right_derivative(x)?)
                - weighted((x - a) * (x - a), self.f.left_derivative(x)?)))
    }

    /// `gap <= 1/2 [(b - x)^2 f'_-(b) - (x - a)^2 f'_+(a)]`, for `x` in
    /// `[a, b]`. Infinite endpoint slopes make this `+inf`.
    pub fn upper_bound(&self) -> Result<f64> {
        upper_gap_bound_at(self.f, self.x)
    }

    /// `[lower_bound, upper_bound]`.
    pub fn enclosure(&self) -> Result<Enclosure> {
        Enclosure::new(self.lower_bound()?, self.upper_bound()?)
    }
}

fn upper_gap_bound_at(f: &ConvexFunction, x: f64) -> Result<f64> {
    let dom = f.domain();
    dom.check_contains(x)?;
    let (a, b) = (dom.a(), dom.b());
    let right = if x == b {
        0.0
    } else {
        weighted((b - x) * (b - x), f.left_derivative(b)?)
    };
    let left = if x == a {
        0.0
    } else {
        weighted((x - a) * (x - a), f.right_derivative(a)?)
    };
    Ok(0.5 * (right - left))
}

/// Reference gap `(x - a) f(a) + (b - x) f(b) - int f`.
pub fn gap(f: &ConvexFunction, x: f64) -> Result<f64> {
    GapQuery::new(f, x)?.gap()
}

pub fn lower_gap_bound(f: &ConvexFunction, x: f64) -> Result<f64> {
    GapQuery::new(f, x)?.lower_bound()
}

pub fn upper_gap_bound(f: &ConvexFunction, x: f64) -> Result<f64> {
    GapQuery::new(f, x)?.upper_bound()
}

pub fn gap_enclosure(f: &ConvexFunction, x: f64) -> Result<Enclosure> {
    GapQuery::new(f, x)?.enclosure()
}

/// Enclosure of the Hermite-Hadamard difference
/// `(f(a) + f(b))/2 - 1/(b-a) int_a^b f`:
///
/// ```text
/// 1/8 [f'_+(m) - f'_-(m)] (b - a)  <=  diff  <=  1/8 [f'_-(b) - f'_+(a)] (b - a)
/// ```
///
/// with `m = (a + b)/2`. Both constants are attained by the kink at `m`.
pub fn hh_bounds(f: &ConvexFunction) -> Result<Enclosure> {
    let dom = f.domain();
    let (a, b, m) = (dom.a(), dom.b(), dom.midpoint());
    let w = dom.width();
    let lo = 0.125 * (f.right_derivative(m)? - f.left_derivative(m)?) * w;
    let hi = 0.125 * (f.left_derivative(b)? - f.right_derivative(a)?) * w;
    Enclosure::new(lo, hi)
}

/// Reference value of `(f(a) + f(b))/2 - mean(f)`.
pub fn hh_difference(f: &ConvexFunction) -> Result<f64> {
    let dom = f.domain();
    let mean = integral_reference(f, dom)? / dom.width();
    Ok(0.5 * (f.eval(dom.a())? + f.eval(dom.b())?) - mean)
}

/// `(b - a)((a + b)/2 - x) f'(x) <= gap` at a point of differentiability.
pub fn differentiable_lower(f: &ConvexFunction, x: f64) -> Result<f64> {
    let dom = f.domain();
    dom.check_interior(x)?;
    let d = derivative_at_smooth_point(f, dom, x)?;
    Ok(dom.width() * (dom.midpoint() - x) * d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowReport {
    /// `1/8 h^2 [f'_+(x) - f'_-(x)]`
    pub lhs: f64,
    /// `h (f(x - h/2) + f(x + h/2))/2 - int_{x-h/2}^{x+h/2} f`
    pub rhs: f64,
    pub holds: bool,
}

/// Hermite-Hadamard gap on the window `[x - h/2, x + h/2]` against the jump
/// of the derivative at its centre.
pub fn window_inequality(f: &ConvexFunction, x: f64, h: f64) -> Result<WindowReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window width must be positive, got {h}"
        )));
    }
    let (lo, hi) = (x - 0.5 * h, x + 0.5 * h);
    let dom = f.domain();
    dom.check_contains(lo)?;
    dom.check_contains(hi)?;
    let lhs = 0.125 * h * h * (f.right_derivative(x)? - f.left_derivative(x)?);
    let window = Interval::new(lo, hi)?;
    let rhs = 0.5 * h * (f.eval(lo)? + f.eval(hi)?) - integral_reference(f, window)?;
    let slack = REPORT_SLACK * 1f64.max(rhs.abs());
    Ok(WindowReport {
        lhs,
        rhs,
        holds: lhs >= -slack && lhs <= rhs + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalPoint {
    /// Minimizer of the upper gap bound over `[a, b]`.
    pub x0: f64,
    /// The upper gap bound at `x0`.
    pub gap_upper: f64,
}

/// Minimizes the upper gap bound over the split point.
///
/// With `A = f'_+(a)` and `B = f'_-(b)`,
///
/// ```text
/// (b - x)^2 B - (x - a)^2 A = (B - A)(x - x0)^2 - A B (b - a)^2 / (B - A)
/// x0 = (bB - aA) / (B - A)
/// ```
///
/// so the bound is smallest at `x0`, where it equals
/// `-1/2 A B (b - a)^2 / (B - A)`. `x0` lies in `[a, b]` exactly when
/// `A <= 0 <= B`, which is required.
pub fn optimal_point_bound(f: &ConvexFunction) -> Result<OptimalPoint> {
    let dom = f.domain();
    let (a, b) = (dom.a(), dom.b());
    let big_a = f.right_derivative(a)?;
    let big_b = f.left_derivative(b)?;
    if !(big_a.is_finite() && big_b.is_finite()) {
        return Err(Error::Precondition(format!(
            "endpoint slopes must be finite (f'_+(a) = {big_a}, f'_-(b) = {big_b})"
        )));
    }
    if big_b <= big_a {
        return Err(Error::Precondition(format!(
            "need f'_-(b) > f'_+(a), got {big_b} <= {big_a}"
        )));
    }
    if big_a > 0.0 || big_b < 0.0 {
        return Err(Error::Precondition(format!(
            "the minimizer leaves [a, b] unless f'_+(a) <= 0 <= f'_-(b) (got {big_a}, {big_b})"
        )));
    }
    let spread = big_b - big_a;
    let x0 = ((b * big_b - a * big_a) / spread).clamp(a, b);
    let gap_upper = -0.5 * big_a * big_b * dom.width() * dom.width() / spread;
    Ok(OptimalPoint { x0, gap_upper })
}

/// User-supplied constants for the classical gap bounds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassicalConstants {
    /// Total variation of `f` on `[a, b]`.
    pub total_variation: Option<f64>,
    /// Set when `f` is known to be nondecreasing; the bound then uses
    /// `f(b) - f(a)`.
    pub monotone_nondecreasing: bool,
    /// Lipschitz constant `L > 0`.
    pub lipschitz: Option<f64>,
    /// `||f'||_inf`.
    pub dnorm_inf: Option<f64>,
    /// `(||f'||_p, p)` with `p > 1`.
    pub dnorm_p: Option<(f64, f64)>,
    /// `||f'||_1`.
    pub dnorm_1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalKind {
    BoundedVariation,
    Monotone,
    Lipschitz,
    SupNorm,
    PNorm,
    OneNorm,
}

impl ClassicalKind {
    pub const ALL: [ClassicalKind; 6] = [
        ClassicalKind::BoundedVariation,
        ClassicalKind::Monotone,
        ClassicalKind::Lipschitz,
        ClassicalKind::SupNorm,
        ClassicalKind::PNorm,
        ClassicalKind::OneNorm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassicalKind::BoundedVariation => "bounded_variation",
            ClassicalKind::Monotone => "monotone",
            ClassicalKind::Lipschitz => "lipschitz",
            ClassicalKind::SupNorm => "sup_norm",
            ClassicalKind::PNorm => "p_norm",
            ClassicalKind::OneNorm => "one_norm",
        }
    }
}

/// One classical bound on `|gap(x)|`; fails if its constant is missing.
pub fn classical_bound(f: &ConvexFunction, x: f64, c: &ClassicalConstants, kind: ClassicalKind) -> Result<f64> {
    let dom = f.domain();
    dom.check_contains(x)?;
    let (a, b) = (dom.a(), dom.b());
    let half_plus = 0.5 * dom.width() + (x - dom.midpoint()).abs();
    let quarter_plus = 0.25 * dom.width() * dom.width() + (x - dom.midpoint()).powi(2);
    let missing = || Error::InvalidParameter(format!("missing constant for the {} bound", kind.name()));
    let nonneg = |name: &str, v: f64| -> Result<f64> {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParameter(format!(
                "{name} must be finite and >= 0, got {v}"
            )))
        }
    };
    match kind {
        ClassicalKind::BoundedVariation => {
            Ok(half_plus * nonneg("total variation", c.total_variation.ok_or_else(missing)?)?)
        }
        ClassicalKind::Monotone => {
            if !c.monotone_nondecreasing {
                return Err(missing());
            }
            Ok(half_plus * (f.eval(b)? - f.eval(a)?))
        }
        ClassicalKind::Lipschitz => {
            let l = c.lipschitz.ok_or_else(missing)?;
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "Lipschitz constant must be > 0, got {l}"
                )));
            }
            Ok(quarter_plus * l)
        }
        ClassicalKind::SupNorm => Ok(quarter_plus * nonneg("sup norm", c.dnorm_inf.ok_or_else(missing)?)?),
        ClassicalKind::PNorm => {
            let (norm, p) = c.dnorm_p.ok_or_else(missing)?;
            let norm = nonneg("p-norm", norm)?;
            if !(p > 1.0 && p.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "p-norm exponent must exceed 1, got {p}"
                )));
            }
            let q = p / (p - 1.0);
            let spread = (x - a).powf(q + 1.0) + (b - x).powf(q + 1.0);
            Ok((spread / (q + 1.0)).powf(1.0 / q) * norm)
        }
        ClassicalKind::OneNorm => Ok(half_plus * nonneg("1-norm", c.dnorm_1.ok_or_else(missing)?)?),
    }
}

/// Every classical bound whose constant is present, in a fixed order.
pub fn classical_bounds(f: &ConvexFunction, x: f64, c: &ClassicalConstants) -> Result<Vec<(ClassicalKind, f64)>> {
    let present = |k: &ClassicalKind| match k {
        ClassicalKind::BoundedVariation => c.total_variation.is_some(),
        ClassicalKind::Monotone => c.monotone_nondecreasing,
        ClassicalKind::Lipschitz => c.lipschitz.is_some(),
        ClassicalKind::SupNorm => c.dnorm_inf.is_some(),
        ClassicalKind::PNorm => c.dnorm_p.is_some(),
        ClassicalKind::OneNorm => c.dnorm_1.is_some(),
    };
    let kinds: Vec<ClassicalKind> = ClassicalKind::ALL.iter().copied().filter(present).collect();
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("no classical constants supplied".into()));
    }
    kinds
        .into_iter()
        .map(|k| classical_bound(f, x, c, k).map(|v| (k, v)))
        .collect()
}
