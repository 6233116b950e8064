//! Expectation bounds for random variables on `[a, b]` with nondecreasing
//! densities.
//!
//! The distribution function `F(x) = int_a^x f` of such a variable is
//! convex with one-sided derivatives `F'_-(x) = f(x-)` and `F'_+(x) = f(x+)`,
//! and `int_a^b F = b - E(X)`. Applying the trapezoid-gap bounds to `F` at a
//! split point `x` gives
//!
//! ```text
//! 1/2 [(b-x)^2 f(x+) - (x-a)^2 f(x-)] + x  <=  E(X)  <=  1/2 [(b-x)^2 f(b-) - (x-a)^2 f(a+)] + x
//! ```

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::enclosure::{weighted, Enclosure};
use crate::error::{Error, Result, Side};
use crate::funcs::{ConvexFunction, Interval, RealFn};
use crate::quadrature::adaptive_integrate;

/// Cells used for the Riemann-sum normalization enclosure.
const NORMALIZATION_CELLS: usize = 1 << 16;
/// A density is accepted when its total mass enclosure meets `[1 - tol, 1 + tol]`.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Grid used when screening nonnegativity and monotonicity.
pub const SCREEN_GRIDPOINTS: usize = 1001;

/// A probability density on `[a, b]`, expected to be nondecreasing.
///
/// One-sided limits default to the density value itself (continuous
/// densities); piecewise densities supply them explicitly.
#[derive(Clone)]
pub struct MonotoneDensity {
    domain: Interval,
    pdf: RealFn,
    left_limit: Option<RealFn>,
    right_limit: Option<RealFn>,
    cdf: Option<RealFn>,
    mean: Option<f64>,
    label: String,
}

impl fmt::Debug for MonotoneDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneDensity")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("mean", &self.mean)
            .finish()
    }
}

impl MonotoneDensity {
    pub fn new<F>(domain: Interval, pdf: F, label: impl Into<String>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            domain,
            pdf: Arc::new(pdf),
            left_limit: None,
            right_limit: None,
            cdf: None,
            mean: None,
            label: label.into(),
        }
    }

    /// Explicit one-sided limits `f(x-)` and `f(x+)`.
    pub fn with_limits<L, R>(mut self, left: L, right: R) -> Self
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.left_limit = Some(Arc::new(left));
        self.right_limit = Some(Arc::new(right));
        self
    }

    /// Closed-form distribution function, used by the cross-check of `E(X)`.
    pub fn with_cdf<F>(mut self, cdf: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.cdf = Some(Arc::new(cdf));
        self
    }

    /// Closed-form mean for reference checks.
    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = Some(mean);
        self
    }

    /// `f(t) = 1/(b - a)`.
    pub fn uniform(domain: Interval) -> Self {
        let c = 1.0 / domain.width();
        let a = domain.a();
        Self::new(domain, move |_| c, "uniform")
            .with_cdf(move |t| (t - a) * c)
            .with_mean(domain.midpoint())
    }

    /// `f(t) = 2 (t - a)/(b - a)^2`, the triangular density rising to `b`.
    pub fn linear(domain: Interval) -> Self {
        let (a, w) = (domain.a(), domain.width());
        Self::new(domain, move |t| 2.0 * (t - a) / (w * w), "linear")
            .with_cdf(move |t| (t - a) * (t - a) / (w * w))
            .with_mean(a + 2.0 * w / 3.0)
    }

    /// `low` on `[a, at)` and `high` on `[at, b]`. Normalization is up to the
    /// caller; [`validate_density`] checks it.
    pub fn step(domain: Interval, at: f64, low: f64, high: f64) -> Result<Self> {
        domain.check_interior(at)?;
        let (a, b) = (domain.a(), domain.b());
        let value = move |t: f64| if t < at { low } else { high };
        let left = move |t: f64| if t <= at { low } else { high };
        let cdf = move |t: f64| {
            if t <= at {
                low * (t - a)
            } else {
                low * (at - a) + high * (t - at)
            }
        };
        let mass = low * (at - a) + high * (b - at);
        let moment = 0.5 * low * (at * at - a * a) + 0.5 * high * (b * b - at * at);
        Ok(Self::new(domain, value, format!("step({low} -> {high} at {at})"))
            .with_limits(left, value)
            .with_cdf(cdf)
            .with_mean(moment / mass))
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mean(&self) -> Option<f64> {
        self.mean
    }

    pub fn pdf(&self, t: f64) -> Result<f64> {
        self.domain.check_contains(t)?;
        finite(t, (self.pdf)(t), &self.label)
    }

    /// `f(x-)` or `f(x+)`; the left limit needs `x > a`, the right `x < b`.
    pub fn limit(&self, x: f64, side: Side) -> Result<f64> {
        self.domain.check_contains(x)?;
        let v = match side {
            Side::Left if x <= self.domain.a() => return Err(Error::UndefinedSide { x, side }),
            Side::Right if x >= self.domain.b() => return Err(Error::UndefinedSide { x, side }),
            Side::Left => self.left_limit.as_ref().unwrap_or(&self.pdf)(x),
            Side::Right => self.right_limit.as_ref().unwrap_or(&self.pdf)(x),
        };
        finite(x, v, &self.label)
    }

    /// The distribution function as a convex function whose derivative
    /// oracle is the density's one-sided limits. Needs a closed-form cdf.
    pub fn cdf_function(&self) -> Result<ConvexFunction> {
        let cdf = self
            .cdf
            .clone()
            .ok_or_else(|| Error::InvalidDensity(format!("{} carries no distribution function", self.label)))?;
        let pdf = self.pdf.clone();
        let right = self.right_limit.clone().unwrap_or_else(|| pdf.clone());
        let left = self.left_limit.clone().unwrap_or(pdf);
        Ok(ConvexFunction::new(
            self.domain,
            move |t| cdf(t),
            move |t| right(t),
            move |t| left(t),
            format!("cdf of {}", self.label),
        ))
    }
}

fn finite(at: f64, v: f64, label: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation {
            at,
            detail: format!("density {label} evaluated to {v}"),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityReport {
    pub nonnegative: bool,
    pub monotone: bool,
    /// Enclosure of the total mass (left/right Riemann sums when the density
    /// is monotone, a degenerate trapezoid value otherwise).
    pub mass: Enclosure,
    pub normalized: bool,
    /// Grid point where the first failed check was observed.
    pub witness: Option<f64>,
}

impl DensityReport {
    pub fn is_valid(&self) -> bool {
        self.nonnegative && self.monotone && self.normalized
    }
}

/// Screens the hypotheses of the expectation bounds: nonnegativity and
/// monotonicity on a grid, and total mass 1.
///
/// For a nondecreasing density the left and right Riemann sums bracket the
/// mass, so the normalization check is certified up to the grid; otherwise
/// a plain trapezoid value is compared with the same tolerance.
pub fn validate_density(d: &MonotoneDensity) -> Result<DensityReport> {
    let grid = d.domain.grid(SCREEN_GRIDPOINTS);
    let values = grid.iter().map(|&t| d.pdf(t)).collect::<Result<Vec<_>>>()?;
    let scale = values.iter().fold(1f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;

    let mut witness = None;
    let negative = grid.iter().zip(&values).find(|(_, v)| **v < -tol);
    if let Some((t, _)) = negative {
        witness = Some(*t);
    }
    let decreasing = values.windows(2).position(|w| w[1] < w[0] - tol);
    if let (None, Some(i)) = (witness, decreasing) {
        witness = Some(grid[i + 1]);
    }
    let monotone = decreasing.is_none();

    let fine = d.domain.grid(NORMALIZATION_CELLS + 1);
    let fv = fine.iter().map(|&t| d.pdf(t)).collect::<Result<Vec<_>>>()?;
    let h = d.domain.width() / NORMALIZATION_CELLS as f64;
    let mass = if monotone {
        // left-endpoint values of a nondecreasing density undercount, right
        // ones overcount
        let left: f64 = fv[..NORMALIZATION_CELLS].iter().sum::<f64>() * h;
        let right: f64 = fv[1..].iter().sum::<f64>() * h;
        Enclosure::new(left.min(right), left.max(right))?
    } else {
        let interior: f64 = fv[1..NORMALIZATION_CELLS].iter().sum();
        Enclosure::point(h * (interior + 0.5 * (fv[0] + fv[NORMALIZATION_CELLS])))
    };
    let normalized = mass.lo() <= 1.0 + NORMALIZATION_TOL && mass.hi() >= 1.0 - NORMALIZATION_TOL;
    Ok(DensityReport {
        nonnegative: negative.is_none(),
        monotone,
        mass,
        normalized,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationEnclosure {
    pub lo: f64,
    pub hi: f64,
    pub x_used: f64,
}

impl ExpectationEnclosure {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `1/2 [(b-x)^2 f(x+) - (x-a)^2 f(x-)] + x <= E(X)`, for interior `x`.
pub fn expectation_lower(d: &MonotoneDensity, x: f64) -> Result<f64> {
    let dom = d.domain;
    dom.check_interior(x)?;
    let (a, b) = (dom.a(), dom.b());
    Ok(0.5 * ((b - x) * (b - x) * d.limit(x, Side::Right)? - (x - a) * (x - a) * d.limit(x, Side::Left)?) + x)
}

/// `E(X) <= 1/2 [(b-x)^2 f(b-) - (x-a)^2 f(a+)] + x`, for `x` in `[a, b]`.
pub fn expectation_upper(d: &MonotoneDensity, x: f64) -> Result<f64> {
    let dom = d.domain;
    dom.check_contains(x)?;
    let (a, b) = (dom.a(), dom.b());
    let right = if x == b {
        0.0
    } else {
        weighted((b - x) * (b - x), d.limit(b, Side::Left)?)
    };
    let left = if x == a {
        0.0
    } else {
        weighted((x - a) * (x - a), d.limit(a, Side::Right)?)
    };
    Ok(0.5 * (right - left) + x)
}

fn checked(lo: f64, hi: f64, x: f64) -> Result<ExpectationEnclosure> {
    let scale = 1f64.max(lo.abs()).max(hi.abs());
    if lo > hi + 1e-12 * scale {
        return Err(Error::InvalidDensity(format!(
            "expectation bounds inverted at x = {x} ({lo} > {hi}); the density is not nondecreasing"
        )));
    }
    Ok(ExpectationEnclosure {
        lo: lo.min(hi),
        hi: hi.max(lo),
        x_used: x,
    })
}

/// Both expectation bounds at the interior split point `x`.
pub fn expectation_enclosure(d: &MonotoneDensity, x: f64) -> Result<ExpectationEnclosure> {
    checked(expectation_lower(d, x)?, expectation_upper(d, x)?, x)
}

/// The bounds at the midpoint `m`:
///
/// ```text
/// 1/8 [f(m+) - f(m-)] (b-a)^2 + m  <=  E(X)  <=  1/8 [f(b-) - f(a+)] (b-a)^2 + m
/// ```
pub fn midpoint_expectation_enclosure(d: &MonotoneDensity) -> Result<ExpectationEnclosure> {
    expectation_enclosure(d, d.domain.midpoint())
}

/// Best bounds over an equispaced grid: the largest lower bound over the
/// interior points and the smallest upper bound over all points.
pub fn best_expectation_enclosure(d: &MonotoneDensity, gridpoints: usize) -> Result<ExpectationEnclosure> {
    if gridpoints < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 grid points, got {gridpoints}"
        )));
    }
    let grid = d.domain.grid(gridpoints);
    let mut lo = f64::NEG_INFINITY;
    let mut x_used = d.domain.midpoint();
    for &x in &grid[1..gridpoints - 1] {
        let v = expectation_lower(d, x)?;
        if v > lo {
            lo = v;
            x_used = x;
        }
    }
    let mut hi = f64::INFINITY;
    for &x in &grid {
        hi = hi.min(expectation_upper(d, x)?);
    }
    // the midpoint is always a candidate
    let mid = midpoint_expectation_enclosure(d)?;
    if mid.lo > lo {
        lo = mid.lo;
        x_used = mid.x_used;
    }
    hi = hi.min(mid.hi);
    checked(lo, hi, x_used)
}

/// `E(X)` two ways: from the closed-form mean (when declared) and from the
/// identity `E(X) = b - int_a^b F`, with `int F` certified by the adaptive
/// integrator applied to the convex distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCrossCheck {
    pub declared: Option<f64>,
    pub via_cdf: Enclosure,
}

pub fn mean_cross_check(d: &MonotoneDensity, eps: f64) -> Result<MeanCrossCheck> {
    let cdf = d.cdf_function()?;
    let res = adaptive_integrate(&cdf, eps, 1 << 20)?;
    Ok(MeanCrossCheck {
        declared: d.mean,
        via_cdf: res.result.integral.subtract_from(d.domain.b()),
    })
}

/// `int_a^b t f(t) dt` by composite Simpson on `cells` cells (rounded up to
/// even). Reference only; accurate for densities smooth between grid
/// points.
pub fn mean_by_moment(d: &MonotoneDensity, cells: usize) -> Result<f64> {
    let n = (cells.max(2) + 1) & !1;
    let grid = d.domain.grid(n + 1);
    let h = d.domain.width() / n as f64;
    let mut acc = 0.0;
    for (i, &t) in grid.iter().enumerate() {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * t * d.pdf(t)?;
    }
    Ok(acc * h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn step() -> MonotoneDensity {
        MonotoneDensity::step(unit(), 0.5, 0.0, 2.0).unwrap()
    }

    #[test]
    fn validation_verdicts() {
        assert!(validate_density(&MonotoneDensity::linear(unit())).unwrap().is_valid());
        assert!(validate_density(&MonotoneDensity::uniform(unit())).unwrap().is_valid());
        assert!(validate_density(&step()).unwrap().is_valid());

        let falling = MonotoneDensity::new(unit(), |t| 2.0 - 2.0 * t, "2-2t");
        let r = validate_density(&falling).unwrap();
        assert!(!r.monotone);
        assert!(r.nonnegative);
        assert!(r.normalized);
        assert!(!r.is_valid());
        assert!(r.witness.is_some());
    }

    #[test]
    fn validation_flags_each_hypothesis() {
        let heavy = MonotoneDensity::new(unit(), |t| 3.0 * t, "3t");
        let r = validate_density(&heavy).unwrap();
        assert!(r.monotone && r.nonnegative && !r.normalized);

        let negative = MonotoneDensity::new(unit(), |t| 4.0 * t - 1.0, "4t-1");
        let r = validate_density(&negative).unwrap();
        assert!(!r.nonnegative && r.monotone && r.normalized);
        assert_eq!(r.witness, Some(0.0));
    }

    #[test]
    fn linear_density_bounds() {
        let d = MonotoneDensity::linear(unit());
        let e = expectation_enclosure(&d, 0.5).unwrap();
        assert_eq!((e.lo, e.hi), (0.5, 0.75));
        assert!(e.contains(2.0 / 3.0));
        let e = expectation_enclosure(&d, 0.25).unwrap();
        assert_eq!((e.lo, e.hi), (0.375, 0.8125));
    }

    #[test]
    fn uniform_is_exact() {
        let d = MonotoneDensity::uniform(unit());
        let e = expectation_enclosure(&d, 0.5).unwrap();
        assert_eq!((e.lo, e.hi), (0.5, 0.5));
        let e = midpoint_expectation_enclosure(&d).unwrap();
        assert_eq!((e.lo, e.hi), (0.5, 0.5));
    }

    #[test]
    fn step_density_midpoint_is_exact() {
        let e = midpoint_expectation_enclosure(&step()).unwrap();
        assert_eq!((e.lo, e.hi), (0.75, 0.75));
        assert_eq!(step().mean(), Some(0.75));
    }

    #[test]
    fn best_enclosures() {
        let close = |e: ExpectationEnclosure, lo: f64, hi: f64| (e.lo - lo).abs() < 1e-15 && (e.hi - hi).abs() < 1e-15;
        let e = best_expectation_enclosure(&MonotoneDensity::linear(unit()), 1001).unwrap();
        assert!(e.lo >= 0.5 && e.hi <= 0.75 && e.contains(2.0 / 3.0), "{e:?}");
        let e = best_expectation_enclosure(&MonotoneDensity::uniform(unit()), 1001).unwrap();
        assert!(close(e, 0.5, 0.5), "{e:?}");
        let e = best_expectation_enclosure(&step(), 1001).unwrap();
        assert!(close(e, 0.75, 0.75), "{e:?}");
        assert!(best_expectation_enclosure(&step(), 2).is_err());
    }

    #[test]
    fn endpoints() {
        let d = MonotoneDensity::linear(unit());
        assert!(expectation_enclosure(&d, 0.0).is_err());
        assert_eq!(expectation_upper(&d, 0.0).unwrap(), 1.0);
        assert_eq!(expectation_upper(&d, 1.0).unwrap(), 1.0);
        assert!(expectation_upper(&d, 1.5).is_err());
    }

    #[test]
    fn cross_check_identity() {
        for d in [
            MonotoneDensity::linear(unit()),
            MonotoneDensity::uniform(unit()),
            step(),
        ] {
            let c = mean_cross_check(&d, 1e-12).unwrap();
            let declared = c.declared.unwrap();
            assert!(
                c.via_cdf.contains_with_slack(declared, 1e-12),
                "{}: {} vs {declared}",
                d.label(),
                c.via_cdf
            );
        }
        let d = MonotoneDensity::new(unit(), |_| 1.0, "no cdf");
        assert!(mean_cross_check(&d, 1e-6).is_err());
    }

    #[test]
    fn moment_reference() {
        let m = mean_by_moment(&MonotoneDensity::linear(unit()), 64).unwrap();
        assert!((m - 2.0 / 3.0).abs() < 1e-14);
    }
}
