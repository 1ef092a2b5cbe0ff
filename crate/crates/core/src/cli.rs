//! `nhse` command-line front end.
//!
//! Every subcommand writes either CSV or JSON. CSV output starts with `#` comment lines
//! carrying the tool version, the resolved digits and the full configuration as JSON,
//! followed by a header row. Columns per subcommand:
//!
//! | subcommand    | columns |
//! |---------------|---------|
//! | `fractal`     | psi0, psi0_sq, omega_re, omega_im, residual, support, band_tag |
//! | `solve`       | psi0, omega_re, omega_im, residual, support, band_tag, stability_tag |
//! | `exceptional` | psi0, omega_re, omega_im, residual, support, band_tag, stability_tag |
//! | `band`        | lo, hi, lo_open, hi_open, empty, source, reliable |
//! | `gap`         | lo, hi, lo_open, hi_open, empty, source, reliable |
//! | `residual`    | omega_re, omega_im, residual_abs, residual_normalized, exponent |
//! | `stability`   | formula, omega_re, omega_im, support, site, delta, growth, classification, diverged |
//! | `count`       | support, omega_re, omega_im, multiplicity |
//! | `dispersion`  | k, omega_re, omega_im |
//!
//! JSON output is a single object `{config, results, diagnostics}`.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::bands::{self, BandInterval, GapReport};
use crate::error::{Error, Result};
use crate::models::{self, ModelKind, ModelParams, Nonlinearity};
use crate::numerics::{leading_exponent, required_digits_estimate, ComplexAmp, Precision};
use crate::solver::{self, Axis, BandTag, ScanGrid, SolutionCount, SolutionRecord, StabilityTag};
use crate::stability::{perturb_growth, Stability};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `start:stop[:step]` or a single value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeArg {
    pub start: f64,
    pub stop: f64,
    pub step: Option<f64>,
}

impl RangeArg {
    pub fn single(x: f64) -> Self {
        RangeArg { start: x, stop: x, step: None }
    }

    pub fn is_single(&self) -> bool {
        self.start == self.stop
    }

    /// Sampled axis; `default_step` applies when no step was given.
    pub fn axis(&self, default_step: f64) -> Result<Axis> {
        if self.is_single() {
            return Ok(Axis::fixed(self.start));
        }
        Axis::with_step(self.start, self.stop, self.step.unwrap_or(default_step))
    }
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("not a finite number: {t:?}"))
        };
        let r = match parts.as_slice() {
            [x] => RangeArg::single(num(x)?),
            [a, b] => RangeArg { start: num(a)?, stop: num(b)?, step: None },
            [a, b, h] => RangeArg { start: num(a)?, stop: num(b)?, step: Some(num(h)?) },
            _ => return Err(format!("expected start:stop[:step] or a value, got {s:?}")),
        };
        if r.start > r.stop {
            return Err(format!("range start exceeds stop in {s:?}"));
        }
        if matches!(r.step, Some(h) if h <= 0.0) {
            return Err(format!("range step must be positive in {s:?}"));
        }
        Ok(r)
    }
}

impl fmt::Display for RangeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.is_single(), self.step) {
            (true, _) => write!(f, "{}", self.start),
            (false, None) => write!(f, "{}:{}", self.start, self.stop),
            (false, Some(h)) => write!(f, "{}:{}:{}", self.start, self.stop, h),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Digits {
    Auto,
    #[serde(untagged)]
    Fixed(u32),
}

impl FromStr for Digits {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Digits::Auto);
        }
        s.parse::<u32>().map(Digits::Fixed).map_err(|_| format!("digits must be an integer or 'auto', got {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Dnls,
    Al,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> ModelKind {
        match m {
            ModelArg::Dnls => ModelKind::Dnls,
            ModelArg::Al => ModelKind::AblowitzLadik,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BranchArg {
    Modulus,
    Holomorphic,
}

impl From<BranchArg> for Nonlinearity {
    fn from(b: BranchArg) -> Nonlinearity {
        match b {
            BranchArg::Modulus => Nonlinearity::Modulus,
            BranchArg::Holomorphic => Nonlinearity::Holomorphic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Fractal,
    Solve,
    Band,
    Gap,
    Residual,
    Exceptional,
    Stability,
    Count,
    Dispersion,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Fractal => "fractal",
            CommandKind::Solve => "solve",
            CommandKind::Band => "band",
            CommandKind::Gap => "gap",
            CommandKind::Residual => "residual",
            CommandKind::Exceptional => "exceptional",
            CommandKind::Stability => "stability",
            CommandKind::Count => "count",
            CommandKind::Dispersion => "dispersion",
        }
    }

    /// CSV columns in output order.
    pub fn columns(self) -> &'static [&'static str] {
        const RECORD: &[&str] =
            &["psi0", "omega_re", "omega_im", "residual", "support", "band_tag", "stability_tag"];
        const INTERVAL: &[&str] = &["lo", "hi", "lo_open", "hi_open", "empty", "source", "reliable"];
        match self {
            CommandKind::Fractal => &["psi0", "psi0_sq", "omega_re", "omega_im", "residual", "support", "band_tag"],
            CommandKind::Solve | CommandKind::Exceptional => RECORD,
            CommandKind::Band | CommandKind::Gap => INTERVAL,
            CommandKind::Residual => &["omega_re", "omega_im", "residual_abs", "residual_normalized", "exponent"],
            CommandKind::Stability => &[
                "formula",
                "omega_re",
                "omega_im",
                "support",
                "site",
                "delta",
                "growth",
                "classification",
                "diverged",
            ],
            CommandKind::Count => &["support", "omega_re", "omega_im", "multiplicity"],
            CommandKind::Dispersion => &["k", "omega_re", "omega_im"],
        }
    }

    fn default_format(self, config: &RunConfig) -> OutputFormat {
        match self {
            CommandKind::Band | CommandKind::Gap | CommandKind::Count | CommandKind::Stability => OutputFormat::Json,
            CommandKind::Residual if config.omega.is_single() && config.omega_im.is_none_or(|r| r.is_single()) => {
                OutputFormat::Json
            }
            _ => OutputFormat::Csv,
        }
    }
}

/// Fully resolved run description, echoed into every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ModelParams,
    /// Highest site index `N`; the chain has `N + 1` sites.
    pub n: Option<usize>,
    pub digits: Digits,
    pub psi0: RangeArg,
    pub omega: RangeArg,
    pub omega_im: Option<RangeArg>,
    pub branch: Nonlinearity,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<OutputFormat>,
    pub threads: Option<usize>,
    pub psin: Option<f64>,
    pub site: Option<usize>,
    pub steps: usize,
    pub delta: Option<f64>,
    pub k: RangeArg,
}

impl RunConfig {
    /// Defaults for `command` with the DNLS model at `g = 1`, `γ = 0`.
    pub fn new(command: CommandKind) -> Self {
        let (psi0, omega, n) = match command {
            CommandKind::Fractal => (RangeArg { start: 0.1, stop: 3.5, step: Some(0.02) }, (0.0, 7.0), Some(6)),
            CommandKind::Solve => (RangeArg::single(1.0), (-1.0, 6.0), Some(5)),
            CommandKind::Gap => (RangeArg::single(1.0), (0.0, 1.8), None),
            CommandKind::Exceptional => (RangeArg::single(1.0), (-2.0, 2.0), Some(10)),
            CommandKind::Count => (RangeArg::single(1.0), (0.0, 0.0), Some(2)),
            _ => (RangeArg::single(1.0), (0.0, 0.0), None),
        };
        let omega = RangeArg { start: omega.0, stop: omega.1, step: None };
        RunConfig {
            command,
            model: ModelParams::dnls(1.0, 0.0).expect("default parameters are valid"),
            n,
            digits: Digits::Auto,
            psi0,
            omega,
            omega_im: None,
            branch: Nonlinearity::Modulus,
            output_path: None,
            output_format: None,
            threads: None,
            psin: None,
            site: None,
            steps: 20,
            delta: None,
            k: RangeArg { start: 0.0, stop: std::f64::consts::TAU, step: Some(std::f64::consts::TAU / 64.0) },
        }
    }

    /// Working digits; `auto` resolves to `max(30, 2N + 20)`.
    pub fn resolved_digits(&self) -> u32 {
        match self.digits {
            Digits::Fixed(d) => d,
            Digits::Auto => required_digits_estimate(self.n.unwrap_or(1).max(1), 20),
        }
    }

    pub fn format(&self) -> OutputFormat {
        self.output_format.unwrap_or_else(|| self.command.default_format(self))
    }

    fn need_n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => Err(Error::config(format!("N must be at least 1, got {n}"))),
            None => Err(Error::MissingInput(format!("{} needs --N or --sites", self.command.name()))),
        }
    }

    fn single_psi0(&self) -> Result<f64> {
        if !self.psi0.is_single() {
            return Err(Error::config(format!("{} takes a single --psi0 value", self.command.name())));
        }
        Ok(self.psi0.start)
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.model.kind, self.model.g, self.model.gamma)?;
        if let Digits::Fixed(d) = self.digits {
            Precision::new(d)?;
        }
        if self.threads == Some(0) {
            return Err(Error::config("--threads must be positive"));
        }
        if self.psi0.start < 0.0 {
            return Err(Error::config("psi0 must be non-negative"));
        }
        Ok(())
    }
}

/// One cell of a result table.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64, String),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn real(x: f64) -> Cell {
        Cell::Real(x, format!("{x:.16e}"))
    }

    /// Formatted at 17 significant digits straight from the multiprecision value.
    pub fn float(x: &Float) -> Cell {
        if x.is_zero() || !x.is_finite() {
            return Cell::real(x.to_f64());
        }
        Cell::Real(x.to_f64(), format!("{x:.17e}"))
    }

    fn csv(&self) -> String {
        match self {
            Cell::Real(_, s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x, _) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(t) => json!(t),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub rows: Vec<Vec<Cell>>,
}

/// Result of one subcommand before rendering.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub table: Table,
    /// JSON `results`; `None` renders the table rows as objects.
    pub results: Option<Value>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn table(rows: Vec<Vec<Cell>>) -> Self {
        Outcome { table: Table { rows }, results: None, warnings: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tool: String,
    pub version: String,
    pub digits: u32,
    pub rows: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub config: RunConfig,
    pub results: Value,
    pub diagnostics: Diagnostics,
}

fn tag_name<T: Serialize>(t: &T) -> String {
    serde_json::to_value(t).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn support_cell(s: Option<usize>) -> Cell {
    s.map_or(Cell::Empty, |s| Cell::Int(s as i64))
}

fn record_row(r: &SolutionRecord) -> Vec<Cell> {
    vec![
        Cell::real(r.psi0_mag),
        Cell::float(r.omega.re()),
        Cell::float(r.omega.im()),
        Cell::float(&r.residual),
        support_cell(r.support),
        Cell::Text(tag_name(&r.band_tag)),
        Cell::Text(tag_name(&r.stability_tag)),
    ]
}

fn interval_row(b: &BandInterval) -> Vec<Cell> {
    vec![
        Cell::real(b.lo),
        Cell::real(b.hi),
        Cell::Bool(b.lo_open),
        Cell::Bool(b.hi_open),
        Cell::Bool(b.empty),
        Cell::Text(tag_name(&b.source)),
        Cell::Bool(b.reliable),
    ]
}

fn grid_of(config: &RunConfig) -> Result<ScanGrid> {
    let omega_re = config.omega.axis(1.0 / solver::DEFAULT_DENSITY)?;
    let mut grid = match config.omega_im {
        Some(im) => ScanGrid::complex(omega_re, im.axis(0.1)?),
        None => ScanGrid::real(omega_re),
    };
    grid.branch = config.branch;
    Ok(grid)
}

/// Runs one subcommand and returns its rows.
pub fn execute(config: &RunConfig, ctx: &Precision) -> Result<Outcome> {
    let model = config.model;
    match config.command {
        CommandKind::Fractal => {
            let n = config.need_n()?;
            let grid = grid_of(config)?.with_psi0(config.psi0.axis(0.02)?);
            let records = solver::fractal_scan(&model, n, &grid, ctx)?;
            let rows = records
                .iter()
                .map(|r| {
                    let mut row = record_row(r);
                    row.pop();
                    row.insert(1, Cell::real(r.psi0_mag * r.psi0_mag));
                    row
                })
                .collect();
            Ok(Outcome::table(rows))
        }
        CommandKind::Solve => {
            let n = config.need_n()?;
            let grid = grid_of(config)?;
            let records = solver::find_stationary_obc(&model, config.single_psi0()?, n, &grid, ctx)?;
            Ok(Outcome::table(records.iter().map(record_row).collect()))
        }
        CommandKind::Exceptional => {
            if model.kind != ModelKind::AblowitzLadik || model.gamma != 0.0 {
                return Err(Error::config("exceptional runs the AL model at gamma = 0 (use --model al)"));
            }
            let n = config.need_n()?;
            let records =
                bands::al_exceptional_check(n, model.g, config.single_psi0()?, (config.omega.start, config.omega.stop), ctx)?;
            Ok(Outcome::table(records.iter().map(record_row).collect()))
        }
        CommandKind::Band => {
            let psi0 = config.single_psi0()?;
            let band = match model.kind {
                ModelKind::AblowitzLadik => bands::al_semi_infinite_band(model.gamma),
                ModelKind::Dnls if model.gamma > 0.0 && config.psin.is_none() => {
                    bands::dnls_real_band_numeric(&model, psi0, ctx)?
                }
                ModelKind::Dnls => bands::dnls_real_band(model.g, psi0, model.gamma, config.psin)?,
            };
            let mut out = Outcome::table(vec![interval_row(&band)]);
            if !band.reliable {
                out.warnings.push(format!("gamma = {} is outside the small-gamma regime of the formula", model.gamma));
            }
            out.results = Some(serde_json::to_value(band)?);
            Ok(out)
        }
        CommandKind::Gap => {
            if model.kind != ModelKind::Dnls {
                return Err(Error::config("gap scans the dnls model"));
            }
            let resolution = config.omega.step.unwrap_or(0.002);
            let report =
                bands::find_gap(model.g, config.single_psi0()?, model.gamma, (config.omega.start, config.omega.stop), resolution, ctx)?;
            let mut out = Outcome::table(report.gaps.iter().map(interval_row).collect());
            if !report.edge_indeterminate.is_empty() {
                out.warnings.push(format!("{} indeterminate run(s) at the window edges", report.edge_indeterminate.len()));
            }
            out.results = Some(serde_json::to_value(report)?);
            Ok(out)
        }
        CommandKind::Residual => {
            let n = config.need_n()?;
            let psi0 = config.single_psi0()?;
            let re = config.omega.axis(0.01)?;
            let im = config.omega_im.map_or(Ok(Axis::fixed(0.0)), |r| r.axis(0.01))?;
            let mut rows = Vec::new();
            for x in re.values() {
                for y in im.values() {
                    let w = ComplexAmp::from_f64(x, y, ctx);
                    let (abs, normalized) = match model.kind {
                        ModelKind::AblowitzLadik => {
                            let abs = bands::quasi_stationary_residual(model.g, model.gamma, psi0, &w, n, ctx)?;
                            let norm = solver::residual_at(&model, psi0, &w, n, ctx)?;
                            (abs, norm)
                        }
                        ModelKind::Dnls => {
                            let shot = solver::shoot(&model, &ComplexAmp::real(ctx.float(psi0)), &w, n, ctx)?;
                            let abs = if shot.diverged { ctx.diverge_threshold().clone() } else { shot.amps[n + 1].abs() };
                            (abs, shot.residual)
                        }
                    };
                    let exponent = leading_exponent(&abs).map_or(Cell::Empty, Cell::Int);
                    rows.push(vec![Cell::real(x), Cell::real(y), Cell::float(&abs), Cell::float(&normalized), exponent]);
                }
            }
            Ok(Outcome::table(rows))
        }
        CommandKind::Stability => {
            if model.kind != ModelKind::Dnls || model.gamma != 0.0 {
                return Err(Error::config("stability runs on the dnls closed forms at gamma = 0"));
            }
            let psi0 = config.single_psi0()?;
            let mut rows = Vec::new();
            let mut traces = Vec::new();
            for sol in models::closed_form_solutions(psi0, &model, ctx)? {
                let rec = SolutionRecord {
                    omega: sol.omega.clone(),
                    psi0_mag: psi0,
                    support: Some(sol.support),
                    residual: ctx.zero(),
                    band_tag: BandTag::Discrete,
                    stability_tag: StabilityTag::Untested,
                };
                let site = config.site.unwrap_or(sol.support - 1);
                let t = perturb_growth(&model, &rec, &sol.amps, site, config.delta, config.steps, ctx)?;
                let formula = tag_name(&sol.formula);
                rows.push(vec![
                    Cell::Text(formula.clone()),
                    Cell::float(sol.omega.re()),
                    Cell::float(sol.omega.im()),
                    Cell::Int(sol.support as i64),
                    Cell::Int(site as i64),
                    Cell::float(&t.delta_mag),
                    Cell::real(t.growth),
                    Cell::Text(tag_name(&t.classification)),
                    Cell::Bool(t.diverged),
                ]);
                traces.push(json!({
                    "formula": formula,
                    "omega_re": sol.omega.re().to_f64(),
                    "omega_im": sol.omega.im().to_f64(),
                    "support": sol.support,
                    "site": site,
                    "delta_mag": t.delta_mag.to_f64(),
                    "ratios": t.ratios,
                    "growth": t.growth,
                    "classification": t.classification,
                    "diverged": t.diverged,
                }));
            }
            let mut out = Outcome::table(rows);
            out.results = Some(Value::Array(traces));
            Ok(out)
        }
        CommandKind::Count => {
            let sites = config.need_n()? + 1;
            let count = solver::count_solutions_small(sites, model.g, config.single_psi0()?)?;
            let rows = count
                .roots
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.support as i64),
                        Cell::real(r.omega_re),
                        Cell::real(r.omega_im),
                        Cell::Int(r.multiplicity as i64),
                    ]
                })
                .collect();
            let mut out = Outcome::table(rows);
            out.results = Some(serde_json::to_value(count)?);
            Ok(out)
        }
        CommandKind::Dispersion => {
            let psi0 = config.single_psi0()?;
            let axis = config.k.axis(std::f64::consts::TAU / 64.0)?;
            let mut rows = Vec::new();
            for k in axis.values() {
                let kf = ctx.float(k);
                let w = match model.kind {
                    ModelKind::Dnls => models::dnls_pbc_dispersion(&kf, psi0, &model, ctx)?,
                    ModelKind::AblowitzLadik => models::al_pbc_dispersion(&kf, psi0, &model, ctx)?,
                };
                rows.push(vec![Cell::real(k), Cell::float(w.re()), Cell::float(w.im())]);
            }
            Ok(Outcome::table(rows))
        }
    }
}

fn rows_as_objects(command: CommandKind, table: &Table) -> Value {
    let cols = command.columns();
    Value::Array(
        table
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, cell) in cols.iter().zip(row) {
                    obj.insert((*c).to_owned(), cell.json());
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

/// Renders an outcome in the configured format.
pub fn render(config: &RunConfig, digits: u32, outcome: &Outcome) -> Result<String> {
    match config.format() {
        OutputFormat::Json => {
            let report = JsonReport {
                config: config.clone(),
                results: outcome.results.clone().unwrap_or_else(|| rows_as_objects(config.command, &outcome.table)),
                diagnostics: Diagnostics {
                    tool: "nhse".into(),
                    version: VERSION.into(),
                    digits,
                    rows: outcome.table.rows.len(),
                    warnings: outcome.warnings.clone(),
                },
            };
            let mut s = serde_json::to_string_pretty(&report)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            writeln!(buf, "# nhse {VERSION}")?;
            writeln!(buf, "# command: {}", config.command.name())?;
            writeln!(buf, "# digits: {digits}")?;
            writeln!(buf, "# config: {}", serde_json::to_string(config)?)?;
            for w in &outcome.warnings {
                writeln!(buf, "# warning: {w}")?;
            }
            {
                let mut wtr = csv::Writer::from_writer(&mut buf);
                wtr.write_record(config.command.columns())?;
                for row in &outcome.table.rows {
                    wtr.write_record(row.iter().map(Cell::csv))?;
                }
                wtr.flush()?;
            }
            String::from_utf8(buf).map_err(|e| Error::config(format!("non-UTF-8 output: {e}")))
        }
    }
}

/// Validates, computes and renders one run.
pub fn run_to_string(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let digits = config.resolved_digits();
    let ctx = Precision::new(digits)?;
    let work = || execute(config, &ctx).and_then(|o| render(config, digits, &o));
    match config.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::MissingInput(_) | Error::UnsupportedSize(_) | Error::DegenerateInput(_) => EXIT_USAGE,
        Error::NumericFault { .. } | Error::Indeterminate(_) => EXIT_NUMERIC,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_FAILURE,
    }
}

/// Runs `config`, writes the output file (or stdout) and returns the process exit code.
pub fn run_command(config: &RunConfig) -> i32 {
    let result = run_to_string(config).and_then(|text| match &config.output_path {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(Error::from),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("nhse {}: {e}", config.command.name());
            exit_code(&e)
        }
    }
}

/// Parsed CSV output.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvOutput {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvOutput {
    pub fn comment(&self, key: &str) -> Option<&str> {
        let prefix = format!("{key}: ");
        self.comments.iter().find_map(|c| c.strip_prefix(&prefix))
    }

    pub fn config(&self) -> Result<RunConfig> {
        let text = self.comment("config").ok_or_else(|| Error::MissingInput("csv lacks a config line".into()))?;
        Ok(serde_json::from_str(text)?)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<CsvOutput> {
    let mut comments = Vec::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix("# ") {
            Some(c) => comments.push(c.to_owned()),
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_owned).collect());
    }
    Ok(CsvOutput { comments, header, rows })
}

fn numeric_column(name: &str) -> bool {
    !matches!(
        name,
        "band_tag" | "stability_tag" | "source" | "formula" | "classification" | "lo_open" | "hi_open" | "empty"
            | "reliable" | "diverged"
    )
}

/// Re-parses an emitted file and checks it against the schema of its subcommand.
pub fn validate_output(text: &str) -> Result<RunConfig> {
    if text.trim_start().starts_with('{') {
        let report: JsonReport = serde_json::from_str(text)?;
        let cfg = &report.config;
        match cfg.command {
            CommandKind::Band => {
                serde_json::from_value::<BandInterval>(report.results.clone())?;
            }
            CommandKind::Gap => {
                serde_json::from_value::<GapReport>(report.results.clone())?;
            }
            CommandKind::Count => {
                serde_json::from_value::<SolutionCount>(report.results.clone())?;
            }
            CommandKind::Stability => {
                let arr = report.results.as_array().ok_or_else(|| Error::config("stability results must be a list"))?;
                if arr.len() != report.diagnostics.rows {
                    return Err(Error::config("row count mismatch"));
                }
            }
            cmd => {
                let arr = report.results.as_array().ok_or_else(|| Error::config("results must be a list"))?;
                for obj in arr {
                    let obj = obj.as_object().ok_or_else(|| Error::config("result rows must be objects"))?;
                    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
                    let mut want: Vec<&str> = cmd.columns().to_vec();
                    want.sort_unstable();
                    let mut have = keys.clone();
                    have.sort_unstable();
                    if have != want {
                        return Err(Error::config(format!("unexpected result fields {keys:?}")));
                    }
                }
            }
        }
        return Ok(report.config);
    }
    let parsed = parse_csv(text)?;
    let cfg = parsed.config()?;
    if parsed.header != cfg.command.columns() {
        return Err(Error::config(format!("header {:?} does not match {}", parsed.header, cfg.command.name())));
    }
    for row in &parsed.rows {
        if row.len() != parsed.header.len() {
            return Err(Error::config("ragged csv row"));
        }
        for (h, v) in parsed.header.iter().zip(row) {
            if numeric_column(h) && !v.is_empty() && v.parse::<f64>().is_err() {
                return Err(Error::config(format!("column {h} holds non-numeric {v:?}")));
            }
        }
    }
    Ok(cfg)
}

#[derive(Parser, Debug)]
#[command(name = "nhse", version, about = "Stationary spectra of nonlinear non-Hermitian lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Lattice model.
    #[arg(long, global = true, value_enum, default_value = "dnls")]
    pub model: ModelArg,
    /// Nonlinear coupling g.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub g: f64,
    /// Non-Hermitian degree, left hopping weight in [0, 1).
    #[arg(long, global = true, default_value_t = 0.0)]
    pub gamma: f64,
    /// Edge amplitude |psi0|, a value or start:stop[:step].
    #[arg(long, global = true)]
    pub psi0: Option<RangeArg>,
    /// Real part of the frequency, a value or start:stop[:step].
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega: Option<RangeArg>,
    /// Imaginary part of the frequency; switches solvers to complex mode.
    #[arg(long = "omega-im", global = true, allow_hyphen_values = true)]
    pub omega_im: Option<RangeArg>,
    /// Number of lattice sites (N + 1).
    #[arg(long, global = true, conflicts_with = "n")]
    pub sites: Option<usize>,
    /// Highest site index N.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Decimal working precision, or `auto`.
    #[arg(long, global = true, default_value = "auto")]
    pub digits: Digits,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid scans.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// How the intensity enters complex-frequency solves.
    #[arg(long, global = true, value_enum, default_value = "modulus")]
    pub branch: BranchArg,
    /// Run the built-in smoke checks and exit.
    #[arg(long)]
    pub seed_check: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Stationary solutions over a (psi0, omega) grid.
    Fractal,
    /// Stationary solutions at one psi0.
    Solve,
    /// Continuum band of the semi-infinite chain.
    Band {
        /// Peak amplitude |psi_n| for gamma > 0; measured when omitted.
        #[arg(long)]
        psin: Option<f64>,
    },
    /// Forbidden sub-bands on a real omega window (step is the resolution).
    Gap,
    /// Right-edge residual |psi_{N+1}|.
    Residual,
    /// Exact roots of the finite AL chain at gamma = 0.
    Exceptional,
    /// Perturbation growth of the closed-form solutions.
    Stability {
        #[arg(long)]
        site: Option<usize>,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Exhaustive solution count for 2 to 5 sites.
    Count,
    /// Periodic-chain dispersion omega(k).
    Dispersion {
        /// Wavenumber range start:stop[:step].
        #[arg(long, allow_hyphen_values = true)]
        k: Option<RangeArg>,
    },
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        let command = self.command.ok_or_else(|| Error::MissingInput("no subcommand given".into()))?;
        let kind = match &command {
            Command::Fractal => CommandKind::Fractal,
            Command::Solve => CommandKind::Solve,
            Command::Band { .. } => CommandKind::Band,
            Command::Gap => CommandKind::Gap,
            Command::Residual => CommandKind::Residual,
            Command::Exceptional => CommandKind::Exceptional,
            Command::Stability { .. } => CommandKind::Stability,
            Command::Count => CommandKind::Count,
            Command::Dispersion { .. } => CommandKind::Dispersion,
        };
        let mut c = RunConfig::new(kind);
        c.model = ModelParams::new(self.model.into(), self.g, self.gamma)?;
        if let Some(p) = self.psi0 {
            c.psi0 = p;
        }
        if let Some(w) = self.omega {
            c.omega = w;
        } else if kind == CommandKind::Residual {
            return Err(Error::MissingInput("residual needs --omega".into()));
        }
        c.omega_im = self.omega_im;
        if let Some(s) = self.sites {
            if s < 2 {
                return Err(Error::config("--sites must be at least 2"));
            }
            c.n = Some(s - 1);
        }
        if self.n.is_some() {
            c.n = self.n;
        }
        c.digits = self.digits;
        c.output_format = self.format;
        c.output_path = self.out;
        c.threads = self.threads;
        c.branch = self.branch.into();
        match command {
            Command::Band { psin } => c.psin = psin,
            Command::Stability { site, steps, delta } => {
                c.site = site;
                c.steps = steps;
                c.delta = delta;
            }
            Command::Dispersion { k: Some(k) } => c.k = k,
            _ => {}
        }
        Ok(c)
    }
}

/// Outcome of one built-in smoke check.
#[derive(Clone, Debug)]
pub struct SeedCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// A fast subset of the acceptance checks.
pub fn seed_check() -> Vec<SeedCheck> {
    fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> SeedCheck {
        match f() {
            Ok((passed, detail)) => SeedCheck { name, passed, detail },
            Err(e) => SeedCheck { name, passed: false, detail: e.to_string() },
        }
    }
    vec![
        check("closed-form recovery", || {
            let ctx = Precision::new(32)?;
            let m = ModelParams::dnls(1.0, 0.0)?;
            let roots = solver::find_stationary_obc(&m, 1.0, 3, &ScanGrid::real_window(0.0, 3.0)?, &ctx)?;
            let want = models::closed_form_solutions(1.0, &m, &ctx)?;
            let hit = want.iter().all(|s| {
                let w = s.omega.re().to_f64();
                roots.iter().any(|r| (r.omega_f64().0 - w).abs() < 1e-10 * w.max(1.0))
            });
            Ok((hit, format!("{} roots in [0, 3]", roots.len())))
        }),
        check("band formula", || {
            let b = bands::dnls_real_band(1.0, 1.0, 0.0, None)?;
            Ok((b.lo == 0.0 && b.hi == 1.0 && b.lo_open && !b.hi_open, format!("({}, {}]", b.lo, b.hi)))
        }),
        check("AL residual exponent", || {
            let ctx = Precision::new(required_digits_estimate(100, 20))?;
            let r = bands::quasi_stationary_residual(1.0, 0.0, 1.0, &ComplexAmp::real_f64(0.5, &ctx), 100, &ctx)?;
            let e = leading_exponent(&r).unwrap_or(0);
            Ok(((e + 31).abs() <= 1, format!("exponent {e}")))
        }),
        check("solution count", || {
            let c = solver::count_solutions_small(3, 1.0, 1.0)?;
            Ok((c.total == 9, format!("total {}", c.total)))
        }),
        check("omega+ unstable", || {
            let ctx = Precision::new(30)?;
            let m = ModelParams::dnls(1.0, 0.0)?;
            let sol = models::closed_form_solutions(1.0, &m, &ctx)?.remove(2);
            let rec = SolutionRecord {
                omega: sol.omega.clone(),
                psi0_mag: 1.0,
                support: Some(sol.support),
                residual: ctx.zero(),
                band_tag: BandTag::Discrete,
                stability_tag: StabilityTag::Untested,
            };
            let t = perturb_growth(&m, &rec, &sol.amps, 1, None, 20, &ctx)?;
            Ok((t.classification == Stability::Unstable, format!("growth {:.6}", t.growth)))
        }),
    ]
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if cli.seed_check {
        let checks = seed_check();
        for c in &checks {
            println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        return if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILURE };
    }
    match cli.into_config() {
        Ok(config) => run_command(&config),
        Err(e) => {
            eprintln!("nhse: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let mut full = vec!["nhse"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().into_config().unwrap()
    }

    #[test]
    fn range_syntax() {
        assert_eq!("0.5".parse::<RangeArg>().unwrap(), RangeArg::single(0.5));
        let r: RangeArg = "0:7".parse().unwrap();
        assert_eq!((r.start, r.stop, r.step), (0.0, 7.0, None));
        let r: RangeArg = "-1:1:0.5".parse().unwrap();
        assert_eq!(r.axis(1.0).unwrap().values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!("1:0".parse::<RangeArg>().is_err());
        assert!("0:1:0".parse::<RangeArg>().is_err());
        assert!("a:b".parse::<RangeArg>().is_err());
        assert_eq!(r.to_string(), "-1:1:0.5");
    }

    #[test]
    fn digits_syntax() {
        assert_eq!("auto".parse::<Digits>().unwrap(), Digits::Auto);
        assert_eq!("40".parse::<Digits>().unwrap(), Digits::Fixed(40));
        assert!("x".parse::<Digits>().is_err());
    }

    #[test]
    fn auto_digits_follow_lattice_length() {
        let c = parse(&["residual", "--model", "al", "--N", "100", "--omega", "0.5"]);
        assert_eq!(c.resolved_digits(), 220);
        assert_eq!(c.format(), OutputFormat::Json);
        let c = parse(&["fractal", "--sites", "7"]);
        assert_eq!(c.n, Some(6));
        assert_eq!(c.format(), OutputFormat::Csv);
    }

    #[test]
    fn usage_errors() {
        assert!(Cli::try_parse_from(["nhse", "band", "--gamma", "x"]).is_err());
        let e = Cli::try_parse_from(["nhse", "residual", "--N", "10"]).unwrap().into_config().unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
        let e = Cli::try_parse_from(["nhse", "band", "--gamma", "1.5"]).unwrap().into_config().unwrap_err();
        assert_eq!(exit_code(&e), EXIT_USAGE);
        let mut c = parse(&["band"]);
        c.digits = Digits::Fixed(8);
        assert_eq!(exit_code(&run_to_string(&c).unwrap_err()), EXIT_USAGE);
    }

    #[test]
    fn band_json_output() {
        let c = parse(&["band", "--psi0", "1"]);
        let text = run_to_string(&c).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["results"]["lo"], json!(0.0));
        assert_eq!(v["results"]["hi"], json!(1.0));
        assert_eq!(v["results"]["lo_open"], json!(true));
        assert_eq!(v["results"]["hi_open"], json!(false));
        assert_eq!(validate_output(&text).unwrap(), c);
    }

    #[test]
    fn csv_round_trip() {
        let c = parse(&["dispersion", "--format", "csv", "--gamma", "0.3", "--k", "0:3.14:0.5"]);
        let text = run_to_string(&c).unwrap();
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.header, ["k", "omega_re", "omega_im"]);
        assert_eq!(parsed.rows.len(), 8);
        assert_eq!(parsed.comment("digits"), Some("30"));
        assert_eq!(validate_output(&text).unwrap(), c);
        let first = parsed.column("omega_re").unwrap()[0];
        assert_eq!(first.parse::<f64>().unwrap(), 2.3);
        assert!(first.trim_start_matches('-').split('e').next().unwrap().len() >= 18);
    }

    #[test]
    fn identical_configs_give_identical_bytes() {
        let c = parse(&["solve", "--psi0", "1", "--N", "2", "--omega", "0:3:0.01"]);
        assert_eq!(run_to_string(&c).unwrap(), run_to_string(&c).unwrap());
    }

    #[test]
    fn validation_rejects_tampering() {
        let c = parse(&["dispersion"]);
        let text = run_to_string(&c).unwrap().replace("omega_im", "omega_i");
        assert!(validate_output(&text).is_err());
    }
}
