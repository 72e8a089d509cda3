//! The `skewkit` command line: argument definitions, the five commands and
//! their report types. Every report serializes to JSON and reads back
//! unchanged, so scripts can consume the output with any JSON library.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use skewkit::simulation::{CoverageReport, SimConfig, SimulationError, Threads};
use skewkit::skewness::{self, midpoints, Direction, SkewMeasure};
use skewkit::{BandwidthRule, DistributionSpec, SortedSample};

pub mod input;
mod render;

pub use input::{read_column, Column, ColumnData};
use render::{sig6, Table};

/// A command failure. Each kind has its own exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, values or configuration.
    #[error("{0}")]
    Usage(String),
    /// Unreadable input or data the estimators cannot handle.
    #[error("{0}")]
    Data(String),
    /// A simulation in which too many trials failed.
    #[error("{0}")]
    Breach(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Breach(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<skewkit::Error> for CliError {
    fn from(e: skewkit::Error) -> Self {
        use skewkit::Error as E;
        let data = match &e {
            E::InSample { source, .. } => {
                return match CliError::from((**source).clone()) {
                    CliError::Data(_) => CliError::Data(e.to_string()),
                    _ => CliError::Usage(e.to_string()),
                }
            }
            E::TooFewObservations { .. }
            | E::NonFinite { .. }
            | E::NonPositiveDensity { .. }
            | E::DegenerateScale { .. }
            | E::ZeroDispersion
            | E::NegativeVariance { .. }
            | E::NoConvergence(_) => true,
            _ => false,
        };
        if data {
            CliError::Data(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "skewkit", version, about = "Quantile-based skewness: values, intervals and coverage studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population values of skewness measures for a named distribution.
    Population(PopulationArgs),
    /// Estimates and confidence intervals for one numeric CSV column.
    Estimate(EstimateArgs),
    /// Estimates for two independent samples and the interval for their difference.
    Compare(CompareArgs),
    /// Run a seeded coverage study described by a JSON config file.
    Simulate(SimulateArgs),
    /// Population γ_p or λ_p over a midpoint grid of p in (0, ½), for plotting.
    Curve(CurveArgs),
}

/// Options shared by every command that takes a measure list.
#[derive(Debug, Clone, Args)]
pub struct MeasureArgs {
    /// Comma-separated measures, e.g. `gamma@0.25,lambda@0.05,auc_gamma,b3`, or `all`.
    #[arg(long, short, default_value = "all")]
    pub measures: String,
    /// Override the tail used by every λ measure.
    #[arg(long)]
    pub direction: Option<Direction>,
    /// Override the grid size J of every AUC measure.
    #[arg(long = "j")]
    pub grid: Option<usize>,
}

impl MeasureArgs {
    pub fn resolve(&self) -> CliResult<Vec<SkewMeasure>> {
        let mut measures = SkewMeasure::parse_list(&self.measures)?;
        for m in &mut measures {
            if let Some(d) = self.direction {
                *m = m.with_direction(d);
            }
            if let Some(j) = self.grid {
                *m = m.with_grid(j);
            }
            m.validate()?;
        }
        Ok(measures)
    }
}

#[derive(Debug, Clone, Args)]
pub struct IntervalArgs {
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Quantile-density bandwidth: `default` or a fixed value in (0, 0.5).
    #[arg(long, default_value = "default", value_parser = parse_bandwidth)]
    pub bandwidth: BandwidthRule,
}

fn parse_bandwidth(s: &str) -> Result<BandwidthRule, String> {
    if s.trim().eq_ignore_ascii_case("default") {
        return Ok(BandwidthRule::Default);
    }
    let b: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("expected `default` or a number, got `{s}`"))?;
    BandwidthRule::fixed(b).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct PopulationArgs {
    /// Distribution, e.g. `lognormal(0,1)`, `exp(1)`, `beta(5,10)`.
    #[arg(long)]
    pub dist: DistributionSpec,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// CSV file.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Header name or 1-based position of the column to analyse.
    #[arg(long, short, default_value = "1")]
    pub column: Column,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[command(flatten)]
    pub interval: IntervalArgs,
    /// Report AUC rows on the mean-skew scale (all values halved).
    #[arg(long)]
    pub mean_skew: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input_a: PathBuf,
    #[arg(long)]
    pub input_b: PathBuf,
    /// Column in both files, unless overridden per file.
    #[arg(long, short, default_value = "1")]
    pub column: Column,
    #[arg(long)]
    pub column_a: Option<Column>,
    #[arg(long)]
    pub column_b: Option<Column>,
    #[command(flatten)]
    pub measures: MeasureArgs,
    #[command(flatten)]
    pub interval: IntervalArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON study description.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub level: Option<f64>,
    /// Worker threads: `auto` or a count. Results do not depend on it.
    #[arg(long, env = "SKEWKIT_THREADS")]
    pub threads: Option<Threads>,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CurveFamily {
    Gamma,
    Lambda,
    GammaStar,
    LambdaStar,
}

impl CurveFamily {
    fn at(self, p: f64, direction: Direction) -> SkewMeasure {
        match self {
            CurveFamily::Gamma => SkewMeasure::Gamma { p },
            CurveFamily::Lambda => SkewMeasure::Lambda { p, direction },
            CurveFamily::GammaStar => SkewMeasure::GammaStar { p },
            CurveFamily::LambdaStar => SkewMeasure::LambdaStar { p, direction },
        }
    }

    fn has_direction(self) -> bool {
        matches!(self, CurveFamily::Lambda | CurveFamily::LambdaStar)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub dist: DistributionSpec,
    #[arg(long, value_enum, default_value = "gamma")]
    pub family: CurveFamily,
    #[arg(long, default_value_t = Direction::Right)]
    pub direction: Direction,
    /// Number of midpoints in (0, ½); at least 2.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: OutputFormat,
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRow {
    pub measure: SkewMeasure,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationReport {
    pub dist: DistributionSpec,
    pub rows: Vec<PopulationRow>,
}

/// One measure on one sample. `se`, `lower` and `upper` are absent for b₃.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub measure: SkewMeasure,
    pub estimate: f64,
    pub se: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// AUC row halved to the mean-skew scale.
    pub mean_skew: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub input: PathBuf,
    pub column: String,
    pub n: usize,
    pub dropped: usize,
    pub level: f64,
    pub rows: Vec<EstimateRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub measure: SkewMeasure,
    pub estimate_a: f64,
    pub lower_a: Option<f64>,
    pub upper_a: Option<f64>,
    pub estimate_b: f64,
    pub lower_b: Option<f64>,
    pub upper_b: Option<f64>,
    pub difference: f64,
    pub se: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleInfo {
    pub input: PathBuf,
    pub column: String,
    pub n: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub a: SampleInfo,
    pub b: SampleInfo,
    pub level: f64,
    pub rows: Vec<CompareRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub dist: DistributionSpec,
    pub family: CurveFamily,
    /// Present for the λ families only.
    pub direction: Option<Direction>,
    pub points: Vec<CurvePoint>,
}

// ---------------------------------------------------------------------------
// Commands

/// Runs a parsed command, writing the report to `out` and diagnostics to
/// standard error.
pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Population(a) => {
            let report = population(&a)?;
            emit(out, a.format, &report, render_population)
        }
        Command::Estimate(a) => {
            let report = estimate(&a)?;
            emit(out, a.format, &report, render_estimate)
        }
        Command::Compare(a) => {
            let report = compare(&a)?;
            emit(out, a.format, &report, render_compare)
        }
        Command::Simulate(a) => simulate(&a, out),
        Command::Curve(a) => {
            let report = curve(&a)?;
            emit(out, a.format, &report, render_curve)
        }
    }
}

fn emit<T: Serialize>(
    out: &mut dyn Write,
    format: OutputFormat,
    report: &T,
    render: fn(&T, OutputFormat) -> String,
) -> CliResult<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        _ => out.write_all(render(report, format).as_bytes())?,
    }
    Ok(())
}

pub fn population(args: &PopulationArgs) -> CliResult<PopulationReport> {
    let rows = args
        .measures
        .resolve()?
        .into_iter()
        .map(|measure| {
            let value = args.dist.population_measure(&measure)?;
            Ok(PopulationRow { measure, value })
        })
        .collect::<CliResult<_>>()?;
    Ok(PopulationReport {
        dist: args.dist,
        rows,
    })
}

fn load(path: &Path, column: &Column) -> CliResult<(ColumnData, SortedSample)> {
    let data = read_column(path, column)?;
    if data.dropped > 0 {
        eprintln!(
            "{}: dropped {} row(s) with missing or non-finite `{}`",
            path.display(),
            data.dropped,
            data.label
        );
    }
    let sample = SortedSample::from_slice(&data.values)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok((data, sample))
}

fn check_level(level: f64) -> CliResult<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--level must lie in (0, 1), got {level}")))
    }
}

fn estimate_row(sample: &SortedSample, measure: SkewMeasure, args: &IntervalArgs, mean_skew: bool) -> CliResult<EstimateRow> {
    if measure == SkewMeasure::B3 {
        return Ok(EstimateRow {
            measure,
            estimate: skewness::estimate_b3(sample)?,
            se: None,
            lower: None,
            upper: None,
            mean_skew: false,
        });
    }
    let mut i = skewkit::interval(sample, &measure, args.level, args.bandwidth)?;
    if mean_skew && measure.is_auc() {
        i = i.mean_skew()?;
    }
    Ok(EstimateRow {
        measure,
        estimate: i.estimate,
        se: Some(i.se),
        lower: Some(i.lower),
        upper: Some(i.upper),
        mean_skew: i.mean_skew,
    })
}

pub fn estimate(args: &EstimateArgs) -> CliResult<EstimateReport> {
    check_level(args.interval.level)?;
    let measures = args.measures.resolve()?;
    let (data, sample) = load(&args.input, &args.column)?;
    let rows = measures
        .into_iter()
        .map(|m| {
            estimate_row(&sample, m, &args.interval, args.mean_skew)
                .map_err(|e| prefix_data(e, &args.input))
        })
        .collect::<CliResult<_>>()?;
    Ok(EstimateReport {
        input: args.input.clone(),
        column: data.label,
        n: sample.len(),
        dropped: data.dropped,
        level: args.interval.level,
        rows,
    })
}

fn prefix_data(e: CliError, path: &Path) -> CliError {
    match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn compare(args: &CompareArgs) -> CliResult<CompareReport> {
    check_level(args.interval.level)?;
    let measures = args.measures.resolve()?;
    let column_a = args.column_a.as_ref().unwrap_or(&args.column);
    let column_b = args.column_b.as_ref().unwrap_or(&args.column);
    let (data_a, a) = load(&args.input_a, column_a)?;
    let (data_b, b) = load(&args.input_b, column_b)?;
    let (level, rule) = (args.interval.level, args.interval.bandwidth);

    let mut rows = Vec::with_capacity(measures.len());
    for measure in measures {
        let ra = estimate_row(&a, measure, &args.interval, false).map_err(|e| prefix_data(e, &args.input_a))?;
        let rb = estimate_row(&b, measure, &args.interval, false).map_err(|e| prefix_data(e, &args.input_b))?;
        let (se, lower, upper) = if measure == SkewMeasure::B3 {
            (None, None, None)
        } else {
            let d = skewkit::difference_interval(&a, &b, &measure, level, rule)?;
            (Some(d.se), Some(d.lower), Some(d.upper))
        };
        rows.push(CompareRow {
            measure,
            estimate_a: ra.estimate,
            lower_a: ra.lower,
            upper_a: ra.upper,
            estimate_b: rb.estimate,
            lower_b: rb.lower,
            upper_b: rb.upper,
            difference: ra.estimate - rb.estimate,
            se,
            lower,
            upper,
        });
    }
    let info = |input: &Path, data: ColumnData, n| SampleInfo {
        input: input.to_owned(),
        column: data.label,
        n,
        dropped: data.dropped,
    };
    Ok(CompareReport {
        a: info(&args.input_a, data_a, a.len()),
        b: info(&args.input_b, data_b, b.len()),
        level,
        rows,
    })
}

/// Reads the config file and applies command-line overrides.
pub fn simulation_config(args: &SimulateArgs) -> CliResult<SimConfig> {
    let shown = args.config.display();
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("{shown}: {e}")))?;
    let mut cfg: SimConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{shown}: {e}")))?;
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(l) = args.level {
        cfg.level = l;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("{shown}: {e}")))?;
    Ok(cfg)
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = simulation_config(args)?;
    let (report, breach) = match skewkit::run_coverage(&cfg) {
        Ok(r) => (r, None),
        Err(SimulationError::FailureRate { summary, report }) => (*report, Some(summary)),
        Err(SimulationError::Invalid(e)) => return Err(e.into()),
    };
    eprintln!(
        "{} trials in {:.2?} on {} thread(s)",
        report.config.trials, report.elapsed, report.threads
    );
    emit(out, args.format, &report, render_coverage)?;
    match breach {
        Some(summary) => Err(CliError::Breach(format!("too many failed trials: {summary}"))),
        None => Ok(()),
    }
}

pub fn curve(args: &CurveArgs) -> CliResult<CurveReport> {
    if args.points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {}", args.points)));
    }
    let points = midpoints(args.points)
        .into_iter()
        .map(|p| {
            let value = args.dist.population_measure(&args.family.at(p, args.direction))?;
            Ok(CurvePoint { p, value })
        })
        .collect::<CliResult<_>>()?;
    Ok(CurveReport {
        dist: args.dist,
        family: args.family,
        direction: args.family.has_direction().then_some(args.direction),
        points,
    })
}

// ---------------------------------------------------------------------------
// Text and CSV rendering

/// Four decimals for reading, six significant digits for CSV.
fn num(x: f64, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => sig6(x),
        _ if format!("{x:.4}").trim_start_matches('-') == "0.0000" => "0.0000".into(),
        _ => format!("{x:.4}"),
    }
}

fn opt(x: Option<f64>, format: OutputFormat) -> String {
    x.map(|v| num(v, format)).unwrap_or_default()
}

fn ci(lower: Option<f64>, upper: Option<f64>) -> String {
    match (lower, upper) {
        (Some(l), Some(u)) => format!("({}, {})", num(l, OutputFormat::Text), num(u, OutputFormat::Text)),
        _ => "-".into(),
    }
}

fn render_population(r: &PopulationReport, format: OutputFormat) -> String {
    let mut t = Table::new(["dist", "measure", "value"]);
    for row in &r.rows {
        t.row([r.dist.to_string(), row.measure.to_string(), num(row.value, format)]);
    }
    t.render(format)
}

fn render_estimate(r: &EstimateReport, format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Text {
        let _ = writeln!(
            out,
            "{} [{}]: n = {}, {:.0}% intervals",
            r.input.display(),
            r.column,
            r.n,
            100.0 * r.level
        );
    }
    let mut t = Table::new(["measure", "estimate", "se", "lower", "upper"]);
    for row in &r.rows {
        let name = if row.mean_skew {
            format!("{} (mean skew)", row.measure)
        } else {
            row.measure.to_string()
        };
        t.row([name, num(row.estimate, format), opt(row.se, format), opt(row.lower, format), opt(row.upper, format)]);
    }
    out.push_str(&t.render(format));
    out
}

fn render_compare(r: &CompareReport, format: OutputFormat) -> String {
    if format == OutputFormat::Csv {
        let mut t = Table::new([
            "measure", "estimate_a", "lower_a", "upper_a", "estimate_b", "lower_b", "upper_b",
            "difference", "lower", "upper",
        ]);
        for row in &r.rows {
            t.row([
                row.measure.to_string(),
                num(row.estimate_a, format),
                opt(row.lower_a, format),
                opt(row.upper_a, format),
                num(row.estimate_b, format),
                opt(row.lower_b, format),
                opt(row.upper_b, format),
                num(row.difference, format),
                opt(row.lower, format),
                opt(row.upper, format),
            ]);
        }
        return t.render(format);
    }
    let mut out = format!(
        "A = {} [{}], n = {}; B = {} [{}], n = {}; {:.0}% intervals\n",
        r.a.input.display(),
        r.a.column,
        r.a.n,
        r.b.input.display(),
        r.b.column,
        r.b.n,
        100.0 * r.level
    );
    let mut t = Table::new(["measure", "A", "CI A", "B", "CI B", "A - B", "CI A - B"]);
    for row in &r.rows {
        t.row([
            row.measure.to_string(),
            num(row.estimate_a, format),
            ci(row.lower_a, row.upper_a),
            num(row.estimate_b, format),
            ci(row.lower_b, row.upper_b),
            num(row.difference, format),
            ci(row.lower, row.upper),
        ]);
    }
    out.push_str(&t.render(format));
    out
}

fn render_coverage(r: &CoverageReport, format: OutputFormat) -> String {
    if format == OutputFormat::Text {
        return r.to_string();
    }
    let mut t = Table::new([
        "dist", "n", "trials", "level", "measure", "truth", "coverage", "mean_width", "covered",
        "completed", "failures",
    ]);
    for m in &r.measures {
        t.row([
            r.config.dist.to_string(),
            r.config.n.to_string(),
            r.config.trials.to_string(),
            r.config.level.to_string(),
            m.measure.to_string(),
            sig6(m.truth),
            sig6(m.coverage),
            sig6(m.mean_width),
            m.covered.to_string(),
            m.completed.to_string(),
            m.failures.to_string(),
        ]);
    }
    t.render(format)
}

fn render_curve(r: &CurveReport, format: OutputFormat) -> String {
    let mut t = Table::new(["p", "value"]);
    for pt in &r.points {
        t.row([sig6(pt.p), sig6(pt.value)]);
    }
    t.render(format)
}
