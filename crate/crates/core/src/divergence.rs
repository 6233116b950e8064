//! Csiszar f-divergences, the Lin-Wong divergence and the Hermite-Hadamard
//! (HH) divergence between finite discrete distributions, with the sandwich
//!
//! ```text
//! D_f(p, (p+q)/2) <= D_HH(p, q) <= D_f(p, q) / 2
//! ```
//!
//! and two-sided bounds on the gap `D_f/2 - D_HH`.
//!
//! Per support point with `p > 0` and ratio `r = q/p`, the HH term is
//! `p` times the mean of the generator over the segment between `1` and
//! `r`, which is what is computed here; it equals `p^2/(q-p) int_1^r f`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::enclosure::{weighted, Enclosure};
use crate::error::{Error, Result, Side};
use crate::funcs::{xlogx, ConvexFunction, Interval, RealFn};
use crate::quadrature::adaptive_integrate;

/// Tolerance on the total mass accepted by [`DiscreteDistribution::new`].
pub const MASS_TOL: f64 = 1e-12;
/// `|q - p| <= RATIO_TIE * p` counts as `q = p`.
const RATIO_TIE: f64 = 1e-14;
/// Slack used for the sandwich verdict.
pub const SANDWICH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Weights must be finite, nonnegative and sum to 1 within `1e-12`.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(weights, MASS_TOL)
    }

    pub fn with_tolerance(weights: Vec<f64>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no weights".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("weight {i} is {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Divides by the total mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::InvalidDistribution(format!("cannot normalize total mass {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(self + other)/2` componentwise.
    pub fn mixture(&self, other: &Self) -> Result<Self> {
        check_lengths(self, other)?;
        Ok(Self {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(p, q)| 0.5 * (p + q))
                .collect(),
        })
    }
}

fn check_lengths(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch(p.len(), q.len()))
    }
}

type ReferenceFn = Arc<dyn Fn(&DiscreteDistribution, &DiscreteDistribution) -> f64 + Send + Sync>;

/// A normalized convex generator `f` on `[0, inf)` with `f(1) = 0`.
///
/// At `u = 0` the left derivative is taken to be the right one (the limit
/// from inside the domain).
#[derive(Clone)]
pub struct GeneratorFunction {
    eval: RealFn,
    right: RealFn,
    left: RealFn,
    antiderivative: Option<RealFn>,
    slope_at_infinity: Option<f64>,
    reference: Option<ReferenceFn>,
    label: String,
}

impl fmt::Debug for GeneratorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorFunction")
            .field("label", &self.label)
            .field("antiderivative", &self.antiderivative.is_some())
            .field("slope_at_infinity", &self.slope_at_infinity)
            .finish()
    }
}

/// Names accepted by [`generator`].
pub const GENERATOR_NAMES: [&str; 4] = ["chi_squared", "kl", "total_variation", "hellinger"];

impl GeneratorFunction {
    /// Checks `f(1) = 0` and convexity of secant slopes on a grid over
    /// `[0, 4]`.
    pub fn new<F, R, L>(eval: F, right: R, left: L, label: impl Into<String>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = Self {
            eval: Arc::new(eval),
            right: Arc::new(right),
            left: Arc::new(left),
            antiderivative: None,
            slope_at_infinity: None,
            reference: None,
            label: label.into(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_antiderivative<F>(mut self, antiderivative: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.antiderivative = Some(Arc::new(antiderivative));
        self
    }

    /// `lim f(u)/u` as `u -> inf`, used for support points with `p = 0 < q`.
    pub fn with_slope_at_infinity(mut self, slope: f64) -> Self {
        self.slope_at_infinity = Some(slope);
        self
    }

    /// Closed-form `D_f(p, q)` for golden tests.
    pub fn with_reference<F>(mut self, reference: F) -> Self
    where
        F: Fn(&DiscreteDistribution, &DiscreteDistribution) -> f64 + Send + Sync + 'static,
    {
        self.reference = Some(Arc::new(reference));
        self
    }

    /// Drops the closed-form antiderivative so HH terms go through the
    /// adaptive integrator.
    pub fn without_antiderivative(mut self) -> Self {
        self.antiderivative = None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn reference(&self, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Option<f64> {
        self.reference.as_ref().map(|r| r(p, q))
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::OutOfDomain {
                x: u,
                a: 0.0,
                b: f64::INFINITY,
            });
        }
        let v = (self.eval)(u);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                at: u,
                detail: format!("generator {} evaluated to {v}", self.label),
            })
        }
    }

    pub fn derivative(&self, u: f64, side: Side) -> Result<f64> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::OutOfDomain {
                x: u,
                a: 0.0,
                b: f64::INFINITY,
            });
        }
        let v = match side {
            Side::Right => (self.right)(u),
            Side::Left if u == 0.0 => (self.right)(u),
            Side::Left => (self.left)(u),
        };
        if v.is_nan() {
            Err(Error::Evaluation {
                at: u,
                detail: format!("{side} derivative of generator {} is undefined", self.label),
            })
        } else {
            Ok(v)
        }
    }

    fn validate(&self) -> Result<()> {
        let at_one = self.eval(1.0)?;
        if at_one.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "generator {} is not normalized: f(1) = {at_one}",
                self.label
            )));
        }
        let probe = self.restricted(Interval::new(0.0, 4.0)?);
        let report = crate::funcs::check_convexity(&probe, 401)?;
        if !report.passed {
            return Err(Error::NotConvex(format!(
                "generator {} fails the secant test near {:?}",
                self.label, report.witness
            )));
        }
        Ok(())
    }

    /// The generator as a [`ConvexFunction`] on a compact piece of its domain.
    pub fn restricted(&self, domain: Interval) -> ConvexFunction {
        let (eval, right, left) = (self.eval.clone(), self.right.clone(), self.left.clone());
        let f = ConvexFunction::new(
            domain,
            move |u| eval(u),
            move |u| right(u),
            move |u| left(u),
            self.label.clone(),
        );
        match self.antiderivative.clone() {
            Some(big_f) => f.with_antiderivative(move |u| big_f(u)),
            None => f,
        }
    }
}

/// Catalog generators with exact one-sided derivatives and closed-form
/// antiderivatives: `chi_squared` `(u-1)^2`, `kl` `u ln u`,
/// `total_variation` `|u-1|`, `hellinger` `(sqrt(u)-1)^2`. Short aliases
/// `chi2`, `tv` are accepted.
pub fn generator(name: &str) -> Result<GeneratorFunction> {
    match name {
        "chi_squared" | "chi2" => {
            let d = |u: f64| 2.0 * (u - 1.0);
            Ok(
                GeneratorFunction::new(|u: f64| (u - 1.0) * (u - 1.0), d, d, "chi_squared")?
                    .with_antiderivative(|u: f64| (u - 1.0).powi(3) / 3.0)
                    .with_reference(chi_squared),
            )
        }
        "kl" => {
            let d = |u: f64| u.ln() + 1.0;
            Ok(GeneratorFunction::new(xlogx, d, d, "kl")?
                .with_antiderivative(|u: f64| {
                    if u == 0.0 {
                        0.0
                    } else {
                        0.5 * u * u * u.ln() - 0.25 * u * u
                    }
                })
                .with_reference(|p, q| {
                    // KL(q || p)
                    p.weights()
                        .iter()
                        .zip(q.weights())
                        .filter(|(_, &qi)| qi > 0.0)
                        .map(|(&pi, &qi)| qi * (qi / pi).ln())
                        .sum()
                }))
        }
        "total_variation" | "tv" => Ok(GeneratorFunction::new(
            |u: f64| (u - 1.0).abs(),
            |u: f64| if u >= 1.0 { 1.0 } else { -1.0 },
            |u: f64| if u > 1.0 { 1.0 } else { -1.0 },
            "total_variation",
        )?
        .with_antiderivative(|u: f64| 0.5 * (u - 1.0) * (u - 1.0).abs())
        .with_slope_at_infinity(1.0)
        .with_reference(|p, q| p.weights().iter().zip(q.weights()).map(|(a, b)| (a - b).abs()).sum())),
        "hellinger" => {
            let d = |u: f64| 1.0 - 1.0 / u.sqrt();
            Ok(
                GeneratorFunction::new(|u: f64| (u.sqrt() - 1.0).powi(2), d, d, "hellinger")?
                    .with_antiderivative(|u: f64| 0.5 * u * u - 4.0 / 3.0 * u * u.sqrt() + u)
                    .with_slope_at_infinity(1.0)
                    .with_reference(|p, q| {
                        p.weights()
                            .iter()
                            .zip(q.weights())
                            .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
                            .sum()
                    }),
            )
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

/// `chi^2 = sum (q - p)^2 / p`.
pub fn chi_squared(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    p.weights()
        .iter()
        .zip(q.weights())
        .map(|(&pi, &qi)| {
            if pi == 0.0 && qi == 0.0 {
                0.0
            } else {
                (qi - pi) * (qi - pi) / pi
            }
        })
        .sum()
}

/// `D_f(p, q) = sum p f(q/p)`.
///
/// A point with `p = q = 0` contributes nothing; one with `p = 0 < q`
/// contributes `q * lim f(u)/u` when the generator declares that limit and
/// is an error otherwise.
pub fn csiszar(f: &GeneratorFunction, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_lengths(p, q)?;
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.weights().iter().zip(q.weights()).enumerate() {
        total += if pi > 0.0 {
            pi * f.eval(qi / pi)?
        } else if qi == 0.0 {
            0.0
        } else {
            qi * slope_at_infinity(f, i, qi)?
        };
    }
    Ok(total)
}

fn slope_at_infinity(f: &GeneratorFunction, index: usize, q: f64) -> Result<f64> {
    f.slope_at_infinity.ok_or(Error::UndefinedDivergence { index, q })
}

/// `D_f(p, (p + q)/2)`.
pub fn lin_wong(f: &GeneratorFunction, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    csiszar(f, p, &p.mixture(q)?)
}

/// Integration settings for HH terms without a closed-form antiderivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhOptions {
    /// Target width of the whole HH enclosure; split evenly across terms.
    pub eps: f64,
    pub max_cells: usize,
}

impl Default for HhOptions {
    fn default() -> Self {
        Self {
            eps: 1e-10,
            max_cells: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HhDivergence {
    pub value: Enclosure,
    /// False when some inner integral exhausted its cell budget.
    pub converged: bool,
}

/// Enclosure of `D_HH(p, q) = sum p^2/(q - p) int_1^{q/p} f`.
///
/// Terms with `q = p` vanish. Inner integrals use the generator's
/// antiderivative when it has one (degenerate enclosure), otherwise the
/// adaptive integrator. A point with `p = 0 < q` contributes
/// `q/2 * lim f(u)/u`.
pub fn hh_divergence(
    f: &GeneratorFunction,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<HhDivergence> {
    hh_divergence_with(f, p, q, HhOptions::default())
}

pub fn hh_divergence_with(
    f: &GeneratorFunction,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    opts: HhOptions,
) -> Result<HhDivergence> {
    check_lengths(p, q)?;
    let per_term_eps = opts.eps / p.len() as f64;
    let mut total = Enclosure::point(0.0);
    let mut converged = true;
    for (i, (&pi, &qi)) in p.weights().iter().zip(q.weights()).enumerate() {
        if pi == 0.0 {
            if qi > 0.0 {
                total = total + Enclosure::point(0.5 * qi * slope_at_infinity(f, i, qi)?);
            }
            continue;
        }
        if (qi - pi).abs() <= RATIO_TIE * pi {
            continue;
        }
        let r = qi / pi;
        let (lo, hi) = if r < 1.0 { (r, 1.0) } else { (1.0, r) };
        let segment = Interval::new(lo, hi)?;
        let mean = match &f.antiderivative {
            Some(big_f) => Enclosure::point((big_f(hi) - big_f(lo)) / (hi - lo)),
            None => {
                let piece = f.restricted(segment);
                // the term is p * integral / (hi - lo)
                let eps = per_term_eps * (hi - lo) / pi;
                let res = adaptive_integrate(&piece, eps, opts.max_cells)?;
                converged &= res.eps_met;
                res.result.integral.scale(1.0 / (hi - lo))
            }
        };
        total = total + mean.scale(pi);
    }
    Ok(HhDivergence {
        value: total,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub lin_wong: f64,
    pub hh: Enclosure,
    pub half_csiszar: f64,
    pub holds: bool,
}

/// `D_f(p, (p+q)/2) <= D_HH <= D_f(p, q)/2`, checked against the HH
/// enclosure with slack `1e-9`.
pub fn sandwich_report(
    f: &GeneratorFunction,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<SandwichReport> {
    let lw = lin_wong(f, p, q)?;
    let hh = hh_divergence(f, p, q)?.value;
    let half = 0.5 * csiszar(f, p, q)?;
    let slack = |v: f64| SANDWICH_SLACK * 1f64.max(v.abs());
    Ok(SandwichReport {
        lin_wong: lw,
        hh,
        half_csiszar: half,
        holds: lw <= hh.hi() + slack(lw) && hh.lo() <= half + slack(half),
    })
}

/// Enclosure of `D_f(p, q)/2 - D_HH(p, q)`:
///
/// ```text
/// lo = 1/8 sum [f'_+((p+q)/(2p)) - f'_-((p+q)/(2p))] |q - p|
/// hi = 1/8 sum f'_-(q/p) (q - p)
/// ```
///
/// The upper form drops `f'_+(1) sum (q - p)`, which vanishes. Points with
/// `p = 0 < q` contribute `q/8 * lim f(u)/u` to `hi` and nothing to `lo`.
pub fn gap_enclosure(f: &GeneratorFunction, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<Enclosure> {
    check_lengths(p, q)?;
    let (mut lo, mut hi) = (0.0, 0.0);
    for (i, (&pi, &qi)) in p.weights().iter().zip(q.weights()).enumerate() {
        if pi == 0.0 {
            if qi > 0.0 {
                hi += 0.125 * qi * slope_at_infinity(f, i, qi)?;
            }
            continue;
        }
        let spread = qi - pi;
        if spread == 0.0 {
            continue;
        }
        let m = (pi + qi) / (2.0 * pi);
        lo += 0.125 * (f.derivative(m, Side::Right)? - f.derivative(m, Side::Left)?) * spread.abs();
        hi += 0.125 * weighted(spread, f.derivative(qi / pi, Side::Left)?);
    }
    Enclosure::new(lo, hi)
}

/// Upper gap bound in the un-simplified form
/// `1/8 sum [f'_-(q/p) - f'_+(1)] (q - p)`; equal to `gap_enclosure().hi()`
/// up to rounding.
pub fn gap_upper_unsimplified(
    f: &GeneratorFunction,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
) -> Result<f64> {
    check_lengths(p, q)?;
    let at_one = f.derivative(1.0, Side::Right)?;
    let mut hi = 0.0;
    for (i, (&pi, &qi)) in p.weights().iter().zip(q.weights()).enumerate() {
        if pi == 0.0 {
            if qi > 0.0 {
                hi += 0.125 * qi * (slope_at_infinity(f, i, qi)? - at_one);
            }
            continue;
        }
        hi += 0.125 * weighted(qi - pi, f.derivative(qi / pi, Side::Left)? - at_one);
    }
    Ok(hi)
}
