//! Command-line front end.
//!
//! Every subcommand resolves its inputs, calls the library and renders the
//! result as JSON (default) or an aligned table. Exit codes:
//!
//! - `0`: success;
//! - `1`: usage error (bad flags, unparsable expression or input file);
//! - `2`: a mathematical hypothesis failed (non-convex function, invalid
//!   density or distribution, singular expression on the interval).
//!
//! `--force` computes bounds for a function that fails the convexity screen;
//! such reports carry `"certified": false`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::divergence::{self, DiscreteDistribution};
use crate::enclosure::Enclosure;
use crate::error::Error;
use crate::expr::parse_with_var;
use crate::funcs::{catalog, check_convexity, ConvexFunction, Interval, CATALOG_NAMES};
use crate::pointwise;
use crate::probability::{self, MonotoneDensity};
use crate::quadrature::{self, Partition, XiRule};

/// Grid used by the convexity screen.
pub const CONVEXITY_GRIDPOINTS: usize = 1001;
/// Mass tolerance for distributions read from files.
pub const FILE_MASS_TOL: f64 = 1e-9;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Integrate,
    Gap,
    Hh,
    Expectation,
    Divergence,
    Check,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Gap => "gap",
            Command::Hh => "hh",
            Command::Expectation => "expectation",
            Command::Divergence => "divergence",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FileFormat {
    Csv,
    Json,
}

/// One fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Catalog name or expression text.
    pub function: Option<String>,
    pub params: Vec<f64>,
    pub var: String,
    pub interval: Option<(f64, f64)>,
    pub eps: f64,
    /// Uniform partition size; adaptive refinement when absent.
    pub n: Option<usize>,
    pub max_cells: usize,
    pub x: Option<f64>,
    pub xi_rule: String,
    /// Density (catalog name or expression) for `expectation`.
    pub density: Option<String>,
    pub generator: Option<String>,
    /// `p` then `q` for `divergence`.
    pub input_files: Vec<PathBuf>,
    pub normalize: bool,
    pub force: bool,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            function: None,
            params: Vec::new(),
            var: "x".into(),
            interval: None,
            eps: 1e-6,
            n: None,
            max_cells: 1 << 16,
            x: None,
            xi_rule: "midpoint".into(),
            density: None,
            generator: None,
            input_files: Vec::new(),
            normalize: false,
            force: false,
            output_format: OutputFormat::Json,
        }
    }
}

/// Exit status and rendered streams of one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn hypothesis(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_HYPOTHESIS,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConvex(_)
            | Error::ConvexityViolation { .. }
            | Error::InvalidDensity(_)
            | Error::InvalidDistribution(_)
            | Error::UndefinedDivergence { .. }
            | Error::Evaluation { .. }
            | Error::Eval(_)
            | Error::Integration(_) => EXIT_HYPOTHESIS,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

pub fn run(config: &RunConfig) -> RunOutput {
    let mut stderr = String::new();
    match dispatch(config, &mut stderr) {
        Ok(report) => RunOutput {
            code: EXIT_OK,
            stdout: render(&report, config.output_format),
            stderr,
        },
        Err(f) => {
            stderr.push_str(&format!("error: {}\n", f.message));
            RunOutput {
                code: f.code,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn dispatch(c: &RunConfig, warnings: &mut String) -> Outcome<Value> {
    if !(c.eps > 0.0 && c.eps.is_finite()) {
        return Err(Failure::usage(format!("--eps must be positive, got {}", c.eps)));
    }
    let mut report = Map::new();
    report.insert("command".into(), json!(c.command.name()));
    match c.command {
        Command::Integrate => integrate(c, warnings, &mut report)?,
        Command::Gap => gap(c, warnings, &mut report)?,
        Command::Hh => hh(c, warnings, &mut report)?,
        Command::Expectation => expectation(c, &mut report)?,
        Command::Divergence => divergence_cmd(c, &mut report)?,
        Command::Check => check(c, &mut report)?,
    }
    Ok(Value::Object(report))
}

fn interval(c: &RunConfig) -> Outcome<Interval> {
    let (a, b) = c.interval.ok_or_else(|| Failure::usage("--interval A B is required"))?;
    Ok(Interval::new(a, b)?)
}

/// Catalog entry or parsed expression on the configured interval.
pub fn resolve_function(c: &RunConfig) -> Outcome<ConvexFunction> {
    let text = c
        .function
        .as_deref()
        .ok_or_else(|| Failure::usage("--fn is required"))?;
    let domain = interval(c)?;
    if CATALOG_NAMES.contains(&text) || text == "power_p" {
        return Ok(catalog(text, &c.params, domain)?);
    }
    if !c.params.is_empty() {
        return Err(Failure::usage("--param only applies to catalog functions"));
    }
    let e = parse_with_var(text, &c.var).map_err(|e| Failure::usage(format!("in --fn: {e}")))?;
    // surface singularities with the offending subexpression
    for t in domain.grid(CONVEXITY_GRIDPOINTS) {
        e.eval(t).map_err(|err| Failure::hypothesis(err.to_string()))?;
    }
    Ok(e.to_convex_function(domain))
}

/// Runs the convexity screen; `Ok(true)` when it passes, `Ok(false)` when
/// it fails under `--force`.
fn screen(f: &ConvexFunction, c: &RunConfig, warnings: &mut String) -> Outcome<bool> {
    let report = check_convexity(f, CONVEXITY_GRIDPOINTS)?;
    if report.passed {
        return Ok(true);
    }
    let msg = format!(
        "{} failed the convexity screen (violation {:e} near {:?})",
        f.label(),
        report.worst_violation,
        report.witness
    );
    if c.force {
        warnings.push_str(&format!("warning: {msg}; continuing because of --force\n"));
        Ok(false)
    } else {
        Err(Failure::hypothesis(format!("{msg}; pass --force to compute anyway")))
    }
}

fn describe(report: &mut Map<String, Value>, f: &ConvexFunction) {
    let d = f.domain();
    report.insert("function".into(), json!(f.label()));
    report.insert("interval".into(), json!([d.a(), d.b()]));
    report.insert("exact_derivatives".into(), json!(f.has_exact_derivatives()));
}

fn integrate(c: &RunConfig, warnings: &mut String, out: &mut Map<String, Value>) -> Outcome<()> {
    let f = resolve_function(c)?;
    let certified = screen(&f, c, warnings)?;
    describe(out, &f);
    let result = match c.n {
        Some(n) => {
            let rule = XiRule::from_name(&c.xi_rule)?;
            let p = Partition::uniform(f.domain(), n, &rule)?;
            out.insert("method".into(), json!("uniform"));
            out.insert("xi_rule".into(), json!(c.xi_rule));
            quadrature::integrate(&f, &p)?
        }
        None => {
            let res = quadrature::adaptive_integrate(&f, c.eps, c.max_cells)?;
            out.insert("method".into(), json!("adaptive"));
            out.insert("eps".into(), num(c.eps));
            out.insert("eps_met".into(), json!(res.eps_met));
            if !res.eps_met {
                warnings.push_str(&format!(
                    "warning: width {} exceeds eps after {} cells\n",
                    res.result.integral.width(),
                    res.result.cells
                ));
            }
            res.result
        }
    };
    out.insert("gn".into(), num(result.gn));
    out.insert("integral".into(), enclosure(result.integral));
    out.insert("remainder".into(), enclosure(result.remainder));
    out.insert("width".into(), num(result.integral.width()));
    out.insert("cells".into(), json!(result.cells));
    out.insert("certified".into(), json!(certified));
    Ok(())
}

fn gap(c: &RunConfig, warnings: &mut String, out: &mut Map<String, Value>) -> Outcome<()> {
    let f = resolve_function(c)?;
    let certified = screen(&f, c, warnings)?;
    describe(out, &f);
    let x = c.x.unwrap_or_else(|| f.domain().midpoint());
    let q = pointwise::GapQuery::new(&f, x)?;
    out.insert("x".into(), num(x));
    out.insert("rule".into(), num(q.rule()?));
    let lower = q.lower_bound()?;
    let upper = q.upper_bound()?;
    out.insert("lower".into(), num(lower));
    out.insert("upper".into(), num(upper));
    let reference = match q.gap() {
        Ok(v) => num(v),
        Err(e) if !certified => {
            warnings.push_str(&format!("warning: no reference gap: {e}\n"));
            Value::Null
        }
        Err(e) => return Err(e.into()),
    };
    out.insert("gap".into(), reference);
    out.insert("certified".into(), json!(certified));
    Ok(())
}

fn hh(c: &RunConfig, warnings: &mut String, out: &mut Map<String, Value>) -> Outcome<()> {
    let f = resolve_function(c)?;
    let certified = screen(&f, c, warnings)?;
    describe(out, &f);
    let bounds = pointwise::hh_bounds(&f)?;
    out.insert("bounds".into(), enclosure(bounds));
    out.insert("difference".into(), num(pointwise::hh_difference(&f)?));
    out.insert("certified".into(), json!(certified));
    Ok(())
}

/// `uniform`, `linear`, `step` (params `at low high`) or an expression.
pub fn resolve_density(c: &RunConfig) -> Outcome<MonotoneDensity> {
    let text = c
        .density
        .as_deref()
        .ok_or_else(|| Failure::usage("--density is required"))?;
    let domain = interval(c)?;
    let no_params = |d: MonotoneDensity| {
        if c.params.is_empty() {
            Ok(d)
        } else {
            Err(Failure::usage(format!("density '{text}' takes no --param")))
        }
    };
    match text {
        "uniform" => no_params(MonotoneDensity::uniform(domain)),
        "linear" => no_params(MonotoneDensity::linear(domain)),
        "step" => match c.params[..] {
            [at, low, high] => Ok(MonotoneDensity::step(domain, at, low, high)?),
            _ => Err(Failure::usage(
                "density 'step' needs --param AT --param LOW --param HIGH",
            )),
        },
        _ => {
            if !c.params.is_empty() {
                return Err(Failure::usage("--param only applies to catalog densities"));
            }
            let e = parse_with_var(text, &c.var).map_err(|e| Failure::usage(format!("in --density: {e}")))?;
            for t in domain.grid(CONVEXITY_GRIDPOINTS) {
                e.eval(t).map_err(|err| Failure::hypothesis(err.to_string()))?;
            }
            let label = e.display_with_var(&c.var);
            Ok(MonotoneDensity::new(
                domain,
                move |t| e.eval(t).unwrap_or(f64::NAN),
                label,
            ))
        }
    }
}

fn expectation(c: &RunConfig, out: &mut Map<String, Value>) -> Outcome<()> {
    let d = resolve_density(c)?;
    let report = probability::validate_density(&d)?;
    let certified = report.is_valid();
    if !certified {
        let msg = format!(
            "{} is not a nondecreasing probability density (nonnegative: {}, nondecreasing: {}, mass {})",
            d.label(),
            report.nonnegative,
            report.monotone,
            report.mass
        );
        if !c.force {
            return Err(Failure::hypothesis(msg));
        }
    }
    let dom = d.domain();
    let e = match c.x {
        Some(x) => probability::expectation_enclosure(&d, x)?,
        None => probability::midpoint_expectation_enclosure(&d)?,
    };
    out.insert("density".into(), json!(d.label()));
    out.insert("interval".into(), json!([dom.a(), dom.b()]));
    out.insert("x".into(), num(e.x_used));
    out.insert("expectation".into(), json!({"lo": num(e.lo), "hi": num(e.hi)}));
    if let Some(m) = d.mean() {
        out.insert("mean".into(), num(m));
    }
    out.insert("mass".into(), enclosure(report.mass));
    out.insert("certified".into(), json!(certified));
    Ok(())
}

/// Reads one weight per line (CSV) or a JSON array. Blank lines and lines
/// starting with `#` are skipped in CSV. Without `normalize` the weights
/// must sum to 1 within `1e-9`.
pub fn load_distribution(path: &Path, format: Option<FileFormat>, normalize: bool) -> Outcome<DiscreteDistribution> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let format = format.unwrap_or_else(|| detect_format(path, &text));
    let weights = match format {
        FileFormat::Json => serde_json::from_str::<Vec<f64>>(&text)
            .map_err(|e| Failure::usage(format!("{}: line {}: {e}", path.display(), e.line())))?,
        FileFormat::Csv => {
            parse_csv(&text).map_err(|(line, msg)| Failure::usage(format!("{}: line {line}: {msg}", path.display())))?
        }
    };
    let dist = if normalize {
        DiscreteDistribution::normalized(weights)
    } else {
        DiscreteDistribution::with_tolerance(weights, FILE_MASS_TOL)
    };
    dist.map_err(|e| Failure::hypothesis(format!("{}: {e}", path.display())))
}

fn detect_format(path: &Path, text: &str) -> FileFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => FileFormat::Json,
        Some("csv") | Some("txt") => FileFormat::Csv,
        _ if text.trim_start().starts_with('[') => FileFormat::Json,
        _ => FileFormat::Csv,
    }
}

fn parse_csv(text: &str) -> std::result::Result<Vec<f64>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.trim().trim_end_matches(',').trim();
        if field.is_empty() || field.starts_with('#') {
            continue;
        }
        let v: f64 = field
            .parse()
            .map_err(|_| (i + 1, format!("cannot parse '{field}' as a number")))?;
        out.push(v);
    }
    Ok(out)
}

fn distributions(c: &RunConfig) -> Outcome<(DiscreteDistribution, DiscreteDistribution)> {
    match &c.input_files[..] {
        [p, q] => {
            let p = load_distribution(p, None, c.normalize)?;
            let q = load_distribution(q, None, c.normalize)?;
            if p.len() != q.len() {
                return Err(Failure::usage(Error::LengthMismatch(p.len(), q.len()).to_string()));
            }
            Ok((p, q))
        }
        _ => Err(Failure::usage("--p FILE and --q FILE are required")),
    }
}

fn divergence_cmd(c: &RunConfig, out: &mut Map<String, Value>) -> Outcome<()> {
    let name = c
        .generator
        .as_deref()
        .ok_or_else(|| Failure::usage("--generator is required"))?;
    let f = divergence::generator(name)?;
    let (p, q) = distributions(c)?;
    let csiszar = divergence::csiszar(&f, &p, &q)?;
    let lin_wong = divergence::lin_wong(&f, &p, &q)?;
    let hh = divergence::hh_divergence(&f, &p, &q)?;
    let sandwich = divergence::sandwich_report(&f, &p, &q)?;
    let gap = divergence::gap_enclosure(&f, &p, &q)?;
    out.insert("generator".into(), json!(f.label()));
    out.insert("support".into(), json!(p.len()));
    out.insert("csiszar".into(), num(csiszar));
    out.insert("lin_wong".into(), num(lin_wong));
    out.insert("hh".into(), enclosure(hh.value));
    out.insert("hh_converged".into(), json!(hh.converged));
    out.insert("half_csiszar".into(), num(sandwich.half_csiszar));
    out.insert("sandwich_holds".into(), json!(sandwich.holds));
    out.insert("gap".into(), enclosure(gap));
    out.insert("certified".into(), json!(hh.converged));
    Ok(())
}

fn check(c: &RunConfig, out: &mut Map<String, Value>) -> Outcome<()> {
    let mut ok = true;
    let mut ran = false;
    if c.function.is_some() {
        ran = true;
        let f = resolve_function(c)?;
        let r = check_convexity(&f, CONVEXITY_GRIDPOINTS)?;
        ok &= r.passed;
        out.insert(
            "convexity".into(),
            json!({
                "function": f.label(),
                "passed": r.passed,
                "worst_violation": num(r.worst_violation),
                "witness": [r.witness.0, r.witness.1, r.witness.2],
            }),
        );
    }
    if c.density.is_some() {
        ran = true;
        let d = resolve_density(c)?;
        let r = probability::validate_density(&d)?;
        ok &= r.is_valid();
        out.insert(
            "density".into(),
            json!({
                "density": d.label(),
                "nonnegative": r.nonnegative,
                "nondecreasing": r.monotone,
                "mass": enclosure(r.mass),
                "normalized": r.normalized,
                "witness": r.witness.map(num),
            }),
        );
    }
    if !c.input_files.is_empty() {
        ran = true;
        let mut files = Vec::new();
        for path in &c.input_files {
            let verdict = match load_distribution(path, None, c.normalize) {
                Ok(d) => json!({"path": path.display().to_string(), "valid": true, "support": d.len()}),
                Err(f) if f.code == EXIT_HYPOTHESIS => {
                    ok = false;
                    json!({"path": path.display().to_string(), "valid": false, "reason": f.message})
                }
                Err(f) => return Err(f),
            };
            files.push(verdict);
        }
        out.insert("distributions".into(), Value::Array(files));
    }
    if !ran {
        return Err(Failure::usage("check needs --fn, --density or --p/--q"));
    }
    out.insert("ok".into(), json!(ok));
    if ok {
        Ok(())
    } else {
        Err(Failure::hypothesis(format!(
            "check failed: {}",
            serde_json::to_string(&Value::Object(out.clone())).unwrap_or_default()
        )))
    }
}

/// Finite numbers as JSON numbers, infinities as `"inf"` / `"-inf"`.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn enclosure(e: Enclosure) -> Value {
    json!({"lo": num(e.lo()), "hi": num(e.hi())})
}

fn render(report: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports are plain JSON");
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, child, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

/// `convexquad` argument grammar.
#[derive(Debug, Parser)]
#[command(
    name = "convexquad",
    version,
    about = "Certified quadrature and divergence bounds for convex functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Enclose int_a^b f with a composite or adaptive trapezoid rule.
    Integrate(FnArgs),
    /// Two-sided bounds on the generalized trapezoid gap at a split point.
    Gap(FnArgs),
    /// Hermite-Hadamard difference bounds.
    Hh(FnArgs),
    /// Expectation bounds for a nondecreasing density.
    Expectation(DensityArgs),
    /// Csiszar, Lin-Wong and Hermite-Hadamard divergences.
    Divergence(DivergenceArgs),
    /// Validate hypotheses only.
    Check(CheckArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Interval endpoints.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,
    /// Catalog parameter (repeatable).
    #[arg(long = "param", allow_negative_numbers = true)]
    pub params: Vec<f64>,
    /// Variable name used in expressions.
    #[arg(long, default_value = "x")]
    pub var: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args, Clone)]
pub struct FnArgs {
    /// Catalog name or expression, e.g. "exp(x)" or "abs(x-0.5)".
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: String,
    #[command(flatten)]
    pub common: Common,
    /// Target enclosure width for adaptive integration.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Uniform partition with N cells instead of adaptive refinement.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1 << 16)]
    pub max_cells: usize,
    /// Split point (gap); defaults to the midpoint.
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    /// Split-point rule per cell: midpoint, left or right.
    #[arg(long = "xi", default_value = "midpoint")]
    pub xi_rule: String,
    /// Compute even if the convexity screen fails (result not certified).
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Clone)]
pub struct DensityArgs {
    /// uniform, linear, step, or an expression.
    #[arg(long, allow_hyphen_values = true)]
    pub density: String,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Clone)]
pub struct DivergenceArgs {
    /// chi2, kl, tv or hellinger.
    #[arg(long)]
    pub generator: String,
    #[arg(long)]
    pub p: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    /// Rescale weights to unit mass.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args, Clone)]
pub struct CheckArgs {
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub function: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub density: Option<String>,
    #[arg(long)]
    pub p: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<PathBuf>,
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub common: Common,
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        c.interval = self.interval.as_ref().map(|v| (v[0], v[1]));
        c.params = self.params.clone();
        c.var = self.var.clone();
        c.output_format = self.format;
    }
}

impl From<Sub> for RunConfig {
    fn from(sub: Sub) -> Self {
        match sub {
            Sub::Integrate(a) => fn_config(Command::Integrate, a),
            Sub::Gap(a) => fn_config(Command::Gap, a),
            Sub::Hh(a) => fn_config(Command::Hh, a),
            Sub::Expectation(a) => {
                let mut c = RunConfig::new(Command::Expectation);
                a.common.apply(&mut c);
                c.density = Some(a.density);
                c.x = a.x;
                c.force = a.force;
                c
            }
            Sub::Divergence(a) => {
                let mut c = RunConfig::new(Command::Divergence);
                c.generator = Some(a.generator);
                c.input_files = vec![a.p, a.q];
                c.normalize = a.normalize;
                c.output_format = a.format;
                c
            }
            Sub::Check(a) => {
                let mut c = RunConfig::new(Command::Check);
                a.common.apply(&mut c);
                c.function = a.function;
                c.density = a.density;
                c.input_files = a.p.into_iter().chain(a.q).collect();
                c.normalize = a.normalize;
                c
            }
        }
    }
}

fn fn_config(command: Command, a: FnArgs) -> RunConfig {
    let mut c = RunConfig::new(command);
    a.common.apply(&mut c);
    c.function = Some(a.function);
    c.eps = a.eps;
    c.n = a.n;
    c.max_cells = a.max_cells;
    c.x = a.x;
    c.xi_rule = a.xi_rule;
    c.force = a.force;
    c
}

/// Parses `args` (including the program name) and runs. Help and version
/// requests exit 0; malformed command lines exit 1.
pub fn run_args<I, T>(args: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&RunConfig::from(cli.command)),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                RunOutput {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                RunOutput {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}
