//! Python bindings: `import convexquad`.

use ::convexquad as cq;
use cq::divergence::{self, DiscreteDistribution};
use cq::error::Side;
use cq::funcs::Interval;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn interval(a: f64, b: f64) -> PyResult<Interval> {
    Interval::new(a, b).map_err(err)
}

fn side(name: &str) -> PyResult<Side> {
    match name {
        "left" | "-" => Ok(Side::Left),
        "right" | "+" => Ok(Side::Right),
        other => Err(PyValueError::new_err(format!(
            "side must be 'left' or 'right', got '{other}'"
        ))),
    }
}

/// Closed interval `[lo, hi]` certified to contain a value.
#[pyclass(frozen, skip_from_py_object, name = "Enclosure")]
#[derive(Clone, Copy)]
pub struct PyEnclosure(cq::Enclosure);

#[pymethods]
impl PyEnclosure {
    #[new]
    fn new(lo: f64, hi: f64) -> PyResult<Self> {
        cq::Enclosure::new(lo, hi).map(Self).map_err(err)
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.0.lo()
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.0.hi()
    }

    #[getter]
    fn width(&self) -> f64 {
        self.0.width()
    }

    #[getter]
    fn midpoint(&self) -> f64 {
        self.0.midpoint()
    }

    fn __contains__(&self, v: f64) -> bool {
        self.0.contains(v)
    }

    fn __repr__(&self) -> String {
        format!("Enclosure({:?}, {:?})", self.0.lo(), self.0.hi())
    }
}

/// Convex function on a compact interval with one-sided derivatives.
#[pyclass(frozen, skip_from_py_object, name = "ConvexFunction")]
#[derive(Clone)]
pub struct PyConvexFunction(cq::ConvexFunction);

#[pymethods]
impl PyConvexFunction {
    /// Catalog member: kink, quadratic, exp, neg_log, xlogx, power, linear, constant.
    #[staticmethod]
    #[pyo3(signature = (name, a, b, params = Vec::new()))]
    fn catalog(name: &str, a: f64, b: f64, params: Vec<f64>) -> PyResult<Self> {
        cq::catalog(name, &params, interval(a, b)?).map(Self).map_err(err)
    }

    /// Function given as text, e.g. `"x*log(x)"`. Convexity is not checked.
    #[staticmethod]
    #[pyo3(signature = (text, a, b, var = "x"))]
    fn from_expr(text: &str, a: f64, b: f64, var: &str) -> PyResult<Self> {
        let e = cq::expr::parse_with_var(text, var).map_err(err)?;
        Ok(Self(e.to_convex_function(interval(a, b)?)))
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    #[getter]
    fn domain(&self) -> (f64, f64) {
        (self.0.domain().a(), self.0.domain().b())
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.0.eval(x).map_err(err)
    }

    #[pyo3(signature = (x, side = "right"))]
    fn derivative(&self, x: f64, side: &str) -> PyResult<f64> {
        self.0.derivative(x, self::side(side)?).map_err(err)
    }

    /// `(passed, worst_violation)` of the secant-slope screen.
    #[pyo3(signature = (gridpoints = 1001))]
    fn check_convexity(&self, gridpoints: usize) -> PyResult<(bool, f64)> {
        let r = cq::funcs::check_convexity(&self.0, gridpoints).map_err(err)?;
        Ok((r.passed, r.worst_violation))
    }

    fn __repr__(&self) -> String {
        let d = self.0.domain();
        format!("ConvexFunction({:?} on [{}, {}])", self.0.label(), d.a(), d.b())
    }
}

/// Composite rule value, remainder and integral enclosures.
#[pyclass(frozen, get_all, name = "QuadratureResult")]
pub struct PyQuadratureResult {
    gn: f64,
    remainder: PyEnclosure,
    integral: PyEnclosure,
    cells: usize,
    eps_met: bool,
}

#[pymethods]
impl PyQuadratureResult {
    fn __repr__(&self) -> String {
        format!(
            "QuadratureResult(integral={}, cells={}, eps_met={})",
            self.integral.0, self.cells, self.eps_met
        )
    }
}

impl PyQuadratureResult {
    fn from(r: cq::quadrature::QuadratureResult, eps_met: bool) -> Self {
        Self {
            gn: r.gn,
            remainder: PyEnclosure(r.remainder),
            integral: PyEnclosure(r.integral),
            cells: r.cells,
            eps_met,
        }
    }
}

#[pyfunction]
fn lower_gap_bound(f: &PyConvexFunction, x: f64) -> PyResult<f64> {
    cq::pointwise::lower_gap_bound(&f.0, x).map_err(err)
}

#[pyfunction]
fn upper_gap_bound(f: &PyConvexFunction, x: f64) -> PyResult<f64> {
    cq::pointwise::upper_gap_bound(&f.0, x).map_err(err)
}

#[pyfunction]
fn gap(f: &PyConvexFunction, x: f64) -> PyResult<f64> {
    cq::pointwise::gap(&f.0, x).map_err(err)
}

#[pyfunction]
fn gap_enclosure(f: &PyConvexFunction, x: f64) -> PyResult<PyEnclosure> {
    cq::pointwise::gap_enclosure(&f.0, x).map(PyEnclosure).map_err(err)
}

#[pyfunction]
fn hh_bounds(f: &PyConvexFunction) -> PyResult<PyEnclosure> {
    cq::pointwise::hh_bounds(&f.0).map(PyEnclosure).map_err(err)
}

/// Uniform partition with `n` cells and split rule `midpoint`, `left` or `right`.
#[pyfunction]
#[pyo3(signature = (f, n, xi = "midpoint"))]
fn integrate(f: &PyConvexFunction, n: usize, xi: &str) -> PyResult<PyQuadratureResult> {
    let rule = cq::XiRule::from_name(xi).map_err(err)?;
    let p = cq::Partition::uniform(f.0.domain(), n, &rule).map_err(err)?;
    let r = cq::integrate(&f.0, &p).map_err(err)?;
    Ok(PyQuadratureResult::from(r, true))
}

#[pyfunction]
#[pyo3(signature = (f, eps = 1e-6, max_cells = 1 << 16))]
fn adaptive_integrate(
    py: Python<'_>,
    f: &PyConvexFunction,
    eps: f64,
    max_cells: usize,
) -> PyResult<PyQuadratureResult> {
    let g = f.0.clone();
    let r = py
        .detach(move || cq::adaptive_integrate(&g, eps, max_cells))
        .map_err(err)?;
    Ok(PyQuadratureResult::from(r.result, r.eps_met))
}

/// Midpoint (or `x`) expectation bounds for `uniform`, `linear` or `step`
/// (`params = [at, low, high]`) densities.
#[pyfunction]
#[pyo3(signature = (density, a, b, params = Vec::new(), x = None))]
fn expectation_enclosure(density: &str, a: f64, b: f64, params: Vec<f64>, x: Option<f64>) -> PyResult<(f64, f64)> {
    let dom = interval(a, b)?;
    let d = match (density, &params[..]) {
        ("uniform", []) => cq::MonotoneDensity::uniform(dom),
        ("linear", []) => cq::MonotoneDensity::linear(dom),
        ("step", &[at, low, high]) => cq::MonotoneDensity::step(dom, at, low, high).map_err(err)?,
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown density '{density}' with {} params",
                params.len()
            )))
        }
    };
    let e = match x {
        Some(x) => cq::probability::expectation_enclosure(&d, x),
        None => cq::probability::midpoint_expectation_enclosure(&d),
    }
    .map_err(err)?;
    Ok((e.lo, e.hi))
}

fn pair(p: Vec<f64>, q: Vec<f64>) -> PyResult<(DiscreteDistribution, DiscreteDistribution)> {
    Ok((
        DiscreteDistribution::new(p).map_err(err)?,
        DiscreteDistribution::new(q).map_err(err)?,
    ))
}

fn generator(name: &str) -> PyResult<divergence::GeneratorFunction> {
    divergence::generator(name).map_err(err)
}

#[pyfunction]
fn csiszar(generator: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let (p, q) = pair(p, q)?;
    divergence::csiszar(&self::generator(generator)?, &p, &q).map_err(err)
}

#[pyfunction]
fn lin_wong(generator: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let (p, q) = pair(p, q)?;
    divergence::lin_wong(&self::generator(generator)?, &p, &q).map_err(err)
}

#[pyfunction]
fn hh_divergence(generator: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<PyEnclosure> {
    let (p, q) = pair(p, q)?;
    divergence::hh_divergence(&self::generator(generator)?, &p, &q)
        .map(|r| PyEnclosure(r.value))
        .map_err(err)
}

/// Enclosure of `D_f/2 - D_HH`.
#[pyfunction]
fn divergence_gap(generator: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<PyEnclosure> {
    let (p, q) = pair(p, q)?;
    divergence::gap_enclosure(&self::generator(generator)?, &p, &q)
        .map(PyEnclosure)
        .map_err(err)
}

/// `(lin_wong, hh_lo, hh_hi, half_csiszar, holds)`.
#[pyfunction]
fn sandwich(generator: &str, p: Vec<f64>, q: Vec<f64>) -> PyResult<(f64, f64, f64, f64, bool)> {
    let (p, q) = pair(p, q)?;
    let s = divergence::sandwich_report(&self::generator(generator)?, &p, &q).map_err(err)?;
    Ok((s.lin_wong, s.hh.lo(), s.hh.hi(), s.half_csiszar, s.holds))
}

#[pymodule]
#[pyo3(name = "convexquad")]
fn convexquad_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnclosure>()?;
    m.add_class::<PyConvexFunction>()?;
    m.add_class::<PyQuadratureResult>()?;
    m.add_function(wrap_pyfunction!(lower_gap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(upper_gap_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gap, m)?)?;
    m.add_function(wrap_pyfunction!(gap_enclosure, m)?)?;
    m.add_function(wrap_pyfunction!(hh_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_integrate, m)?)?;
    m.add_function(wrap_pyfunction!(expectation_enclosure, m)?)?;
    m.add_function(wrap_pyfunction!(csiszar, m)?)?;
    m.add_function(wrap_pyfunction!(lin_wong, m)?)?;
    m.add_function(wrap_pyfunction!(hh_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(divergence_gap, m)?)?;
    m.add_function(wrap_pyfunction!(sandwich, m)?)?;
    Ok(())
}
