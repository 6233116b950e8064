//! Composite generalized trapezoid rules with certified remainder
//! enclosures, and an adaptive integrator driven by the enclosure widths.
//!
//! For a partition `a = x_0 < ... < x_n = b` with split points
//! `xi_i in [x_i, x_{i+1}]`, the rule is
//!
//! ```text
//! G_n = sum (xi_i - x_i) f(x_i) + (x_{i+1} - xi_i) f(x_{i+1})
//! ```
//!
//! and `int_a^b f = G_n - S_n`. Per cell, the remainder is bracketed by
//!
//! ```text
//! 1/2 [(x_{i+1} - xi)^2 f'_+(xi)      - (xi - x_i)^2 f'_-(xi)]   <= S_i
//! 1/2 [(x_{i+1} - xi)^2 f'_-(x_{i+1}) - (xi - x_i)^2 f'_+(x_i)]  >= S_i
//! ```
//!
//! Terms whose squared weight vanishes are skipped, so a split point on a
//! cell endpoint never asks for a one-sided derivative that does not exist.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::enclosure::{weighted_with, Enclosure};
use crate::error::{Error, Result};
use crate::funcs::{ConvexFunction, Interval};

/// Allowed inversion of a cell's remainder bounds, relative to the cell's
/// magnitude, before the cell is reported as a convexity violation.
const CELL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum XiRule {
    Midpoint,
    Left,
    Right,
    Custom(Vec<f64>),
}

impl XiRule {
    /// Parses `midpoint`, `left` or `right`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "midpoint" | "mid" => Ok(XiRule::Midpoint),
            "left" => Ok(XiRule::Left),
            "right" => Ok(XiRule::Right),
            other => Err(Error::InvalidParameter(format!(
                "unknown split-point rule '{other}' (expected midpoint, left or right)"
            ))),
        }
    }
}

/// A division of `[a, b]` with one split point per cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    points: Vec<f64>,
    xi: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("need at least one cell".into()));
        }
        if xi.len() != points.len() - 1 {
            return Err(Error::InvalidPartition(format!(
                "{} cells but {} split points",
                points.len() - 1,
                xi.len()
            )));
        }
        if points.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPartition("non-finite node".into()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::InvalidPartition(format!(
                    "nodes must increase strictly: x_{i} = {} >= x_{} = {}",
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
            if !(w[0] <= xi[i] && xi[i] <= w[1]) {
                return Err(Error::InvalidPartition(format!(
                    "split point {} lies outside cell {i} = [{}, {}]",
                    xi[i], w[0], w[1]
                )));
            }
        }
        Ok(Self { points, xi })
    }

    /// `n` equal cells with split points chosen by `rule`.
    pub fn uniform(iv: Interval, n: usize, rule: &XiRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("number of cells must be >= 1".into()));
        }
        let points = iv.grid(n + 1);
        let xi = match rule {
            XiRule::Midpoint => points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            XiRule::Left => points[..n].to_vec(),
            XiRule::Right => points[1..].to_vec(),
            XiRule::Custom(xi) => xi.clone(),
        };
        Self::new(points, xi)
    }

    /// Partition with the given nodes and midpoint split points.
    pub fn with_midpoints(points: Vec<f64>) -> Result<Self> {
        let xi = points.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self::new(points, xi)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn cells(&self) -> usize {
        self.xi.len()
    }

    /// `(x_i, x_{i+1}, xi_i)`.
    pub fn cell(&self, i: usize) -> (f64, f64, f64) {
        (self.points[i], self.points[i + 1], self.xi[i])
    }

    pub fn cell_iter(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.cells()).map(|i| self.cell(i))
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.points[0], self.points[self.points.len() - 1]).expect("partition nodes increase strictly")
    }

    pub fn is_midpoint(&self) -> bool {
        self.cell_iter().all(|(x0, x1, xi)| xi == 0.5 * (x0 + x1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    /// Value of the generalized trapezoid rule.
    pub gn: f64,
    /// Enclosure of `S_n = G_n - int f`.
    pub remainder: Enclosure,
    /// Enclosure of `int_a^b f`.
    pub integral: Enclosure,
    pub cells: usize,
}

impl QuadratureResult {
    fn from_parts(gn: f64, remainder: Enclosure, cells: usize) -> Self {
        Self {
            gn,
            remainder,
            integral: remainder.subtract_from(gn),
            cells,
        }
    }
}

fn check_partition(f: &ConvexFunction, p: &Partition) -> Result<()> {
    let dom = f.domain();
    let (a, b) = (p.points[0], p.points[p.points.len() - 1]);
    if dom.contains(a) && dom.contains(b) {
        Ok(())
    } else {
        Err(Error::InvalidPartition(format!(
            "partition [{a}, {b}] does not lie in the domain {dom} of {}",
            f.label()
        )))
    }
}

fn cell_rule(f: &ConvexFunction, x0: f64, x1: f64, xi: f64) -> Result<f64> {
    Ok(weighted_with(xi - x0, || f.eval(x0))? + weighted_with(x1 - xi, || f.eval(x1))?)
}

/// `(lo, hi)` bounds on one cell's remainder, unchecked.
fn cell_remainder(f: &ConvexFunction, x0: f64, x1: f64, xi: f64) -> Result<(f64, f64)> {
    let right_sq = (x1 - xi) * (x1 - xi);
    let left_sq = (xi - x0) * (xi - x0);
    let lo =
        0.5 * (weighted_with(right_sq, || f.right_derivative(xi))? - weighted_with(left_sq, || f.left_derivative(xi))?);
    let hi =
        0.5 * (weighted_with(right_sq, || f.left_derivative(x1))? - weighted_with(left_sq, || f.right_derivative(x0))?);
    Ok((lo, hi))
}

fn checked_cell(cell: usize, x0: f64, x1: f64, lo: f64, hi: f64) -> Result<Enclosure> {
    if lo <= hi {
        return Enclosure::new(lo, hi);
    }
    let scale = 1f64.max(lo.abs()).max(hi.abs());
    if lo - hi <= CELL_SLACK * scale {
        Enclosure::new(hi, lo)
    } else {
        Err(Error::ConvexityViolation {
            cell,
            left: x0,
            right: x1,
            lo,
            hi,
        })
    }
}

/// `G_n(f; P, xi)`.
pub fn generalized_trapezoid(f: &ConvexFunction, p: &Partition) -> Result<f64> {
    check_partition(f, p)?;
    p.cell_iter().map(|(x0, x1, xi)| cell_rule(f, x0, x1, xi)).sum()
}

/// Classical trapezoid rule `sum (f(x_i) + f(x_{i+1}))/2 * h_i` on the nodes
/// of `p` (split points ignored).
pub fn trapezoid(f: &ConvexFunction, p: &Partition) -> Result<f64> {
    check_partition(f, p)?;
    p.points
        .windows(2)
        .map(|w| Ok(0.5 * (f.eval(w[0])? + f.eval(w[1])?) * (w[1] - w[0])))
        .sum()
}

/// Enclosure of `S_n = G_n - int f` from the per-cell two-sided bounds.
///
/// A cell whose lower bound exceeds its upper bound by more than the slack
/// cannot come from a convex function and is reported by index.
pub fn remainder_enclosure(f: &ConvexFunction, p: &Partition) -> Result<Enclosure> {
    check_partition(f, p)?;
    let mut total = Enclosure::point(0.0);
    for (i, (x0, x1, xi)) in p.cell_iter().enumerate() {
        let (lo, hi) = cell_remainder(f, x0, x1, xi)?;
        total = total + checked_cell(i, x0, x1, lo, hi)?;
    }
    Ok(total)
}

/// Remainder enclosure for the midpoint-split (classical trapezoid) rule:
///
/// ```text
/// 1/8 sum [f'_+(m_i) - f'_-(m_i)] h_i^2 <= Q_n <= 1/8 sum [f'_-(x_{i+1}) - f'_+(x_i)] h_i^2
/// ```
///
/// Non-midpoint partitions are rejected.
pub fn trapezoid_remainder_enclosure(f: &ConvexFunction, p: &Partition) -> Result<Enclosure> {
    check_partition(f, p)?;
    if !p.is_midpoint() {
        return Err(Error::InvalidPartition(
            "the trapezoid remainder needs midpoint split points".into(),
        ));
    }
    let mut total = Enclosure::point(0.0);
    for (i, (x0, x1, m)) in p.cell_iter().enumerate() {
        let h2 = (x1 - x0) * (x1 - x0);
        let lo = 0.125 * h2 * (f.right_derivative(m)? - f.left_derivative(m)?);
        let hi = 0.125 * h2 * (f.left_derivative(x1)? - f.right_derivative(x0)?);
        total = total + checked_cell(i, x0, x1, lo, hi)?;
    }
    Ok(total)
}

/// Lower bound `sum (m_i - xi_i) h_i f'(xi_i)` on `S_n` for `f`
/// differentiable at every split point.
pub fn differentiable_lower_remainder(f: &ConvexFunction, p: &Partition) -> Result<f64> {
    check_partition(f, p)?;
    let dom = f.domain();
    let mut total = 0.0;
    for (x0, x1, xi) in p.cell_iter() {
        let d = derivative_at_smooth_point(f, dom, xi)?;
        total += (0.5 * (x0 + x1) - xi) * (x1 - x0) * d;
    }
    Ok(total)
}

/// `f'(x)`, requiring the available one-sided derivatives to agree.
pub(crate) fn derivative_at_smooth_point(f: &ConvexFunction, dom: Interval, x: f64) -> Result<f64> {
    if x <= dom.a() {
        return f.right_derivative(x);
    }
    if x >= dom.b() {
        return f.left_derivative(x);
    }
    let (left, right) = (f.left_derivative(x)?, f.right_derivative(x)?);
    if left == right {
        return Ok(left);
    }
    let tol = f.tolerance() * 1f64.max(left.abs()).max(right.abs());
    if (right - left).abs() <= tol {
        Ok(0.5 * (left + right))
    } else {
        Err(Error::NotDifferentiable { x, left, right })
    }
}

/// `G_n` together with the certified remainder and integral enclosures.
pub fn integrate(f: &ConvexFunction, p: &Partition) -> Result<QuadratureResult> {
    let gn = generalized_trapezoid(f, p)?;
    let remainder = remainder_enclosure(f, p)?;
    Ok(QuadratureResult::from_parts(gn, remainder, p.cells()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptiveResult {
    #[serde(flatten)]
    pub result: QuadratureResult,
    /// Whether the integral enclosure reached the requested width.
    pub eps_met: bool,
    #[serde(skip)]
    pub partition: Partition,
}

/// Certified integral enclosure of one cell.
///
/// Uses the midpoint split. When that leaves a side infinite (an infinite
/// one-sided derivative at a cell endpoint), the enclosures for the
/// endpoint splits `xi = x_0` and `xi = x_1` are intersected in: each is
/// valid on its own and their zero-weight terms avoid the infinite
/// derivative on one side.
fn adaptive_cell(f: &ConvexFunction, index: usize, x0: f64, x1: f64) -> Result<(f64, Enclosure)> {
    let mid = 0.5 * (x0 + x1);
    let g_mid = cell_rule(f, x0, x1, mid)?;
    let (lo, hi) = cell_remainder(f, x0, x1, mid)?;
    let mut integral = checked_cell(index, x0, x1, lo, hi)?.subtract_from(g_mid);
    if !integral.is_finite() {
        for xi in [x0, x1] {
            let g = cell_rule(f, x0, x1, xi)?;
            let (lo, hi) = cell_remainder(f, x0, x1, xi)?;
            let other = checked_cell(index, x0, x1, lo, hi)?.subtract_from(g);
            integral = integral.intersect(&other).ok_or(Error::ConvexityViolation {
                cell: index,
                left: x0,
                right: x1,
                lo: other.lo(),
                hi: integral.hi(),
            })?;
        }
    }
    Ok((g_mid, integral))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Width(f64);

impl Eq for Width {}

impl PartialOrd for Width {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Width {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

struct Cell {
    x0: f64,
    x1: f64,
    rule: f64,
    integral: Enclosure,
}

/// Greedy bisection: start from one midpoint cell and repeatedly split the
/// cell with the widest integral enclosure (leftmost on ties) until the
/// total width is at most `eps` or `max_cells` cells exist.
///
/// The returned enclosure is valid whether or not `eps` was met.
pub fn adaptive_integrate(f: &ConvexFunction, eps: f64, max_cells: usize) -> Result<AdaptiveResult> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if max_cells == 0 {
        return Err(Error::InvalidParameter("max_cells must be >= 1".into()));
    }
    let dom = f.domain();
    let mut cells: Vec<Option<Cell>> = Vec::new();
    let mut heap: BinaryHeap<(Width, Reverse<Width>, usize)> = BinaryHeap::new();
    let mut finite_width = 0.0;
    let mut infinite = 0usize;
    let mut live = 0usize;

    let push = |cells: &mut Vec<Option<Cell>>,
                heap: &mut BinaryHeap<(Width, Reverse<Width>, usize)>,
                x0: f64,
                x1: f64|
     -> Result<f64> {
        let index = cells.len();
        let (rule, integral) = adaptive_cell(f, index, x0, x1)?;
        let w = integral.width();
        let mid = 0.5 * (x0 + x1);
        // cells too narrow to split further stay out of the queue
        if x0 < mid && mid < x1 {
            heap.push((Width(w), Reverse(Width(x0)), index));
        }
        cells.push(Some(Cell { x0, x1, rule, integral }));
        Ok(w)
    };

    let w = push(&mut cells, &mut heap, dom.a(), dom.b())?;
    live += 1;
    if w.is_finite() {
        finite_width += w;
    } else {
        infinite += 1;
    }

    loop {
        if infinite == 0 && finite_width <= eps {
            let exact: f64 = total(&cells).width();
            if exact <= eps {
                break;
            }
            finite_width = exact;
        }
        if live >= max_cells {
            break;
        }
        let Some((Width(w), _, index)) = heap.pop() else {
            break;
        };
        let cell = cells[index].take().expect("queued cells are live");
        if w.is_finite() {
            finite_width -= w;
        } else {
            infinite -= 1;
        }
        let mid = 0.5 * (cell.x0 + cell.x1);
        for (x0, x1) in [(cell.x0, mid), (mid, cell.x1)] {
            let w = push(&mut cells, &mut heap, x0, x1)?;
            if w.is_finite() {
                finite_width += w;
            } else {
                infinite += 1;
            }
        }
        live += 1;
    }

    let mut live_cells: Vec<&Cell> = cells.iter().flatten().collect();
    live_cells.sort_by(|l, r| l.x0.total_cmp(&r.x0));
    let mut points: Vec<f64> = live_cells.iter().map(|c| c.x0).collect();
    points.push(dom.b());
    let partition = Partition::with_midpoints(points)?;
    let gn: f64 = live_cells.iter().map(|c| c.rule).sum();
    let integral = total(&cells);
    let remainder = integral.subtract_from(gn);
    let eps_met = integral.is_finite() && integral.width() <= eps;
    Ok(AdaptiveResult {
        result: QuadratureResult {
            gn,
            remainder,
            integral,
            cells: live_cells.len(),
        },
        eps_met,
        partition,
    })
}

fn total(cells: &[Option<Cell>]) -> Enclosure {
    let mut sorted: Vec<&Cell> = cells.iter().flatten().collect();
    sorted.sort_by(|l, r| l.x0.total_cmp(&r.x0));
    sorted.iter().map(|c| c.integral).sum()
}

/// Reference value of `int_lo^hi f`: the closed form when `f` carries an
/// antiderivative, otherwise the midpoint of an adaptive enclosure of width
/// at most `1e-10`.
pub fn integral_reference(f: &ConvexFunction, iv: Interval) -> Result<f64> {
    if let Some(v) = f.closed_form_integral(iv.a(), iv.b()) {
        return Ok(v);
    }
    let sub = f.restrict(iv)?;
    let res = adaptive_integrate(&sub, REFERENCE_EPS, REFERENCE_MAX_CELLS)?;
    if res.eps_met {
        Ok(res.result.integral.midpoint())
    } else {
        Err(Error::Integration(format!(
            "reference integral of {} over {iv} only reached width {} with {} cells",
            f.label(),
            res.result.integral.width(),
            res.result.cells
        )))
    }
}

pub const REFERENCE_EPS: f64 = 1e-10;
pub const REFERENCE_MAX_CELLS: usize = 1 << 20;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::catalog;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn uniform_partitions() {
        let p = Partition::uniform(unit(), 2, &XiRule::Midpoint).unwrap();
        assert_eq!(p.points(), &[0.0, 0.5, 1.0]);
        assert_eq!(p.xi(), &[0.25, 0.75]);
        let p = Partition::uniform(unit(), 1, &XiRule::Left).unwrap();
        assert_eq!(p.xi(), &[0.0]);
        let p = Partition::uniform(unit(), 4, &XiRule::Midpoint).unwrap();
        assert!(p.points().windows(2).all(|w| w[1] - w[0] == 0.25));
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::uniform(unit(), 0, &XiRule::Midpoint).is_err());
        assert!(Partition::uniform(unit(), 2, &XiRule::Custom(vec![0.1, 0.2])).is_err());
        assert!(Partition::uniform(unit(), 2, &XiRule::Custom(vec![0.1, 0.9])).is_ok());
        assert!(Partition::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.5]).is_err());
        assert!(Partition::new(vec![0.0, 1.0], vec![]).is_err());
    }

    #[test]
    fn rule_on_simple_inputs() {
        let c = catalog("constant", &[2.5], Interval::new(-1.0, 3.0).unwrap()).unwrap();
        let p = Partition::uniform(
            c.domain(),
            7,
            &XiRule::Custom(vec![-1.0, -0.2, 0.3, 1.0, 1.4, 2.0, 3.0]),
        )
        .unwrap();
        assert!((generalized_trapezoid(&c, &p).unwrap() - 10.0).abs() < 1e-14);

        let q = catalog("quadratic", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 1, &XiRule::Midpoint).unwrap();
        assert_eq!(generalized_trapezoid(&q, &p).unwrap(), 0.5);
    }

    #[test]
    fn midpoint_rule_is_trapezoid() {
        let f = catalog("exp", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 4, &XiRule::Midpoint).unwrap();
        let g = generalized_trapezoid(&f, &p).unwrap();
        let t = trapezoid(&f, &p).unwrap();
        assert!((g - t).abs() < 1e-15);
        // direct summation oracle
        let direct: f64 = (0..4)
            .map(|i| {
                let (x0, x1) = (i as f64 / 4.0, (i + 1) as f64 / 4.0);
                0.125 * (x0.exp() + x1.exp())
            })
            .sum();
        assert!((g - direct).abs() < 1e-15);
        assert!((g - 1.727222).abs() < 5e-7);
    }

    #[test]
    fn skipped_endpoint_terms() {
        // f(0) is infinite but carries zero weight when xi = 0
        let f = catalog("neg_log", &[], unit()).unwrap();
        let p = Partition::new(vec![0.0, 0.5, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(generalized_trapezoid(&f, &p).is_ok());
        let r = remainder_enclosure(&f, &p).unwrap();
        assert_eq!(r.lo(), f64::NEG_INFINITY);
        assert!(r.hi().is_finite());
    }

    #[test]
    fn exp_remainder_telescopes() {
        let f = catalog("exp", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 4, &XiRule::Midpoint).unwrap();
        let r = remainder_enclosure(&f, &p).unwrap();
        assert_eq!(r.lo(), 0.0);
        let telescoped = 0.125 * 0.0625 * (1f64.exp() - 1.0);
        assert!((r.hi() - telescoped).abs() < 1e-15);
        assert!((r.hi() - 0.013424).abs() < 5e-7);
    }

    #[test]
    fn kink_single_cell_is_exact() {
        let f = catalog("kink", &[1.0, 0.5], unit()).unwrap();
        let p = Partition::uniform(unit(), 1, &XiRule::Midpoint).unwrap();
        let r = remainder_enclosure(&f, &p).unwrap();
        assert_eq!((r.lo(), r.hi()), (0.25, 0.25));
        let t = trapezoid_remainder_enclosure(&f, &p).unwrap();
        assert_eq!((t.lo(), t.hi()), (0.25, 0.25));
        let res = integrate(&f, &p).unwrap();
        assert_eq!((res.integral.lo(), res.integral.hi()), (0.25, 0.25));
    }

    #[test]
    fn linear_remainder_is_exact() {
        let f = catalog("linear", &[2.0, -1.0], unit()).unwrap();
        let p = Partition::uniform(unit(), 3, &XiRule::Custom(vec![0.1, 0.5, 0.9])).unwrap();
        let r = remainder_enclosure(&f, &p).unwrap();
        let exact = generalized_trapezoid(&f, &p).unwrap() - f.closed_form_integral(0.0, 1.0).unwrap();
        assert!((r.lo() - exact).abs() < 1e-15 && (r.hi() - exact).abs() < 1e-15);
        let p = Partition::uniform(unit(), 3, &XiRule::Midpoint).unwrap();
        let t = trapezoid_remainder_enclosure(&f, &p).unwrap();
        assert_eq!((t.lo(), t.hi()), (0.0, 0.0));
    }

    #[test]
    fn trapezoid_remainder_rejects_non_midpoint() {
        let f = catalog("exp", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 2, &XiRule::Left).unwrap();
        assert!(matches!(
            trapezoid_remainder_enclosure(&f, &p),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn differentiable_lower_examples() {
        let f = catalog("quadratic", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 1, &XiRule::Custom(vec![0.25])).unwrap();
        assert_eq!(differentiable_lower_remainder(&f, &p).unwrap(), 0.125);
        let p = Partition::uniform(unit(), 2, &XiRule::Midpoint).unwrap();
        assert_eq!(differentiable_lower_remainder(&f, &p).unwrap(), 0.0);
        let e = catalog("exp", &[], unit()).unwrap();
        let p = Partition::uniform(unit(), 5, &XiRule::Midpoint).unwrap();
        assert_eq!(differentiable_lower_remainder(&e, &p).unwrap(), 0.0);

        let k = catalog("kink", &[1.0, 0.5], unit()).unwrap();
        let p = Partition::uniform(unit(), 1, &XiRule::Midpoint).unwrap();
        assert!(matches!(
            differentiable_lower_remainder(&k, &p),
            Err(Error::NotDifferentiable { .. })
        ));
    }

    #[test]
    fn concave_integrand_is_flagged() {
        let f =
            crate::funcs::ConvexFunction::new(unit(), |t: f64| -t * t, |t: f64| -2.0 * t, |t: f64| -2.0 * t, "-t^2");
        let p = Partition::uniform(unit(), 4, &XiRule::Midpoint).unwrap();
        match remainder_enclosure(&f, &p) {
            Err(Error::ConvexityViolation { cell, .. }) => assert_eq!(cell, 0),
            other => panic!("expected a convexity violation, got {other:?}"),
        }
    }

    #[test]
    fn adaptive_constant_and_kink_converge_immediately() {
        let c = catalog("constant", &[4.0], unit()).unwrap();
        let r = adaptive_integrate(&c, 1e-12, 10).unwrap();
        assert!(r.eps_met);
        assert_eq!(r.result.cells, 1);
        assert_eq!(r.result.integral.width(), 0.0);

        let k = catalog("kink", &[1.0, 0.5], unit()).unwrap();
        let r = adaptive_integrate(&k, 1e-12, 10).unwrap();
        assert!(r.eps_met);
        assert_eq!(r.result.cells, 1);
        assert_eq!((r.result.integral.lo(), r.result.integral.hi()), (0.25, 0.25));
    }

    #[test]
    fn adaptive_budget_exhaustion_is_flagged_not_fatal() {
        let f = catalog("exp", &[], unit()).unwrap();
        let r = adaptive_integrate(&f, 1e-12, 8).unwrap();
        assert!(!r.eps_met);
        assert_eq!(r.result.cells, 8);
        assert!(r.result.integral.contains(1f64.exp() - 1.0));
        assert_eq!(r.partition.cells(), 8);
    }

    #[test]
    fn adaptive_handles_infinite_endpoint_slope() {
        let f = catalog("xlogx", &[], unit()).unwrap();
        let r = adaptive_integrate(&f, 1e-6, 10_000).unwrap();
        assert!(r.eps_met);
        assert!(r.result.integral.contains(-0.25));
    }

    #[test]
    fn adaptive_rejects_bad_arguments() {
        let f = catalog("exp", &[], unit()).unwrap();
        assert!(adaptive_integrate(&f, 0.0, 10).is_err());
        assert!(adaptive_integrate(&f, 1e-3, 0).is_err());
    }

    #[test]
    fn adaptive_result_is_consistent() {
        let f = catalog("power", &[3.0], Interval::new(-1.0, 2.0).unwrap()).unwrap();
        let r = adaptive_integrate(&f, 1e-8, 100_000).unwrap();
        let res = &r.result;
        assert_eq!(res.cells, r.partition.cells());
        let back = res.remainder.subtract_from(res.gn);
        assert!((back.lo() - res.integral.lo()).abs() < 1e-12);
        assert!((back.hi() - res.integral.hi()).abs() < 1e-12);
        assert!(res.integral.contains(f.closed_form_integral(-1.0, 2.0).unwrap()));
    }

    #[test]
    fn reference_integral_without_antiderivative() {
        let f = crate::funcs::ConvexFunction::new(unit(), f64::exp, f64::exp, f64::exp, "exp");
        let v = integral_reference(&f, unit()).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
    }
}
