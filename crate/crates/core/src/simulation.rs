//! Seeded Monte Carlo coverage studies.
//!
//! Trial `t` draws its sample from `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `t`, so every trial owns an independent, reproducible substream
//! and the outcome does not depend on how trials are spread over threads.
//! Per-trial results are collected in trial order and reduced sequentially.

use std::collections::BTreeMap;
use std::fmt;
use std::num::NonZeroUsize;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::XiKernel;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::inference::interval_on_grid;
use crate::quantiles::{BandwidthRule, SortedSample};
use crate::skewness::{QuantileGrid, SkewMeasure};

/// Largest tolerated share of failed trials per measure.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Worker count: `"auto"` or a positive integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThreadsRepr", into = "ThreadsRepr")]
pub enum Threads {
    #[default]
    Auto,
    Fixed(NonZeroUsize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThreadsRepr {
    Count(usize),
    Name(String),
}

impl TryFrom<ThreadsRepr> for Threads {
    type Error = Error;

    fn try_from(r: ThreadsRepr) -> Result<Self> {
        match r {
            ThreadsRepr::Count(n) => NonZeroUsize::new(n)
                .map(Threads::Fixed)
                .ok_or_else(|| Error::Config("threads must be positive".into())),
            ThreadsRepr::Name(s) if s.eq_ignore_ascii_case("auto") => Ok(Threads::Auto),
            ThreadsRepr::Name(s) => s.parse::<usize>().map_err(|_| {
                Error::Config(format!("threads must be \"auto\" or a positive integer, got `{s}`"))
            })
            .and_then(|n| Threads::try_from(ThreadsRepr::Count(n))),
        }
    }
}

impl From<Threads> for ThreadsRepr {
    fn from(t: Threads) -> Self {
        match t {
            Threads::Auto => ThreadsRepr::Name("auto".into()),
            Threads::Fixed(n) => ThreadsRepr::Count(n.get()),
        }
    }
}

impl std::str::FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Threads::try_from(ThreadsRepr::Name(s.trim().to_owned()))
    }
}

fn default_level() -> f64 {
    0.95
}

/// A coverage study. Deserializes from e.g.
///
/// ```json
/// {"dist": "lognormal(0,1)", "n": 200, "trials": 10000, "level": 0.95,
///  "measures": ["auc_gamma", "lambda@0.05"], "seed": 42, "threads": "auto"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dist: DistributionSpec,
    pub n: usize,
    pub trials: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    pub measures: Vec<SkewMeasure>,
    pub seed: u64,
    /// Not echoed in reports, which are identical for every thread count.
    #[serde(default, skip_serializing)]
    pub threads: Threads,
    #[serde(default)]
    pub bandwidth: BandwidthRule,
}

impl SimConfig {
    pub fn new(dist: DistributionSpec, n: usize, trials: usize, measures: Vec<SkewMeasure>, seed: u64) -> Self {
        Self {
            dist,
            n,
            trials,
            level: default_level(),
            measures,
            seed,
            threads: Threads::Auto,
            bandwidth: BandwidthRule::Default,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n < 10 {
            return bad(format!("n must be at least 10, got {}", self.n));
        }
        if self.measures.is_empty() {
            return bad("at least one measure is required".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must lie in (0, 1), got {}", self.level));
        }
        if self.measures.contains(&SkewMeasure::B3) {
            return bad("b3 has no interval estimator and cannot be simulated".into());
        }
        for m in &self.measures {
            m.validate()?;
        }
        self.bandwidth.validate()?;
        self.dist.validate()
    }
}

/// Coverage of one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCoverage {
    pub measure: SkewMeasure,
    /// Population value, with the same grid as the estimator.
    pub truth: f64,
    /// `covered / completed`; 0 when no trial completed.
    pub coverage: f64,
    pub mean_width: f64,
    pub covered: usize,
    pub completed: usize,
    pub failures: usize,
    /// Failure counts keyed by error kind.
    pub failure_reasons: BTreeMap<String, usize>,
}

impl MeasureCoverage {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / (self.completed + self.failures) as f64
    }

    /// Table cell such as `0.961(1.98)`.
    pub fn cell(&self) -> String {
        format!("{:.3}({:.2})", self.coverage, self.mean_width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: SimConfig,
    pub measures: Vec<MeasureCoverage>,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub threads: usize,
}

impl fmt::Display for CoverageReport {
    /// Aligned text table, one row per measure.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dist = self.config.dist.to_string();
        let rows: Vec<[String; 7]> = self
            .measures
            .iter()
            .map(|m| {
                [
                    dist.clone(),
                    self.config.n.to_string(),
                    self.config.trials.to_string(),
                    m.measure.to_string(),
                    format!("{:.4}", m.truth),
                    m.cell(),
                    m.failures.to_string(),
                ]
            })
            .collect();
        let header = ["dist", "n", "trials", "measure", "truth", "cp(w)", "failures"];
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: &[&str]| -> fmt::Result {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            writeln!(f, "{}", padded.join("  ").trim_end())
        };
        line(f, &header)?;
        for row in &rows {
            line(f, &row.iter().map(String::as_str).collect::<Vec<_>>())?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimulationError {
    #[error(transparent)]
    Invalid(#[from] Error),
    /// More than [`MAX_FAILURE_RATE`] of the trials failed for some measure.
    /// The full report is kept for inspection.
    #[error("too many failed trials: {summary}")]
    FailureRate {
        summary: String,
        report: Box<CoverageReport>,
    },
}

/// `sqrt(p0(1 − p0)/trials)`.
pub fn coverage_standard_error(trials: usize, p0: f64) -> f64 {
    (p0 * (1.0 - p0) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Done { covered: bool, width: f64 },
    Failed(&'static str),
}

/// Measures that share a quantile grid within a trial: all AUC measures with
/// the same `J`, or a single pointwise measure.
struct Group {
    j: usize,
    extras: Vec<f64>,
    members: Vec<usize>,
}

fn plan(measures: &[SkewMeasure]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for (i, m) in measures.iter().enumerate() {
        match m.grid() {
            Some(j) => match groups.iter_mut().find(|g| g.extras.is_empty() && g.j == j) {
                Some(g) => g.members.push(i),
                None => groups.push(Group {
                    j,
                    extras: Vec::new(),
                    members: vec![i],
                }),
            },
            None => groups.push(Group {
                j: 0,
                extras: m.pointwise_p(),
                members: vec![i],
            }),
        }
    }
    groups
}

fn trial(cfg: &SimConfig, groups: &[Group], truths: &[f64], index: usize) -> Vec<Outcome> {
    let mut out = vec![Outcome::Failed("unreached"); cfg.measures.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let sample = match cfg
        .dist
        .sample(cfg.n, &mut rng)
        .and_then(SortedSample::new)
    {
        Ok(s) => s,
        Err(e) => return vec![Outcome::Failed(e.kind()); cfg.measures.len()],
    };
    for g in groups {
        let built = QuantileGrid::build(&sample, g.j, &g.extras, cfg.bandwidth)
            .and_then(|grid| XiKernel::from_grid(&grid).map(|k| (grid, k)));
        for &i in &g.members {
            out[i] = match &built {
                Err(e) => Outcome::Failed(e.kind()),
                Ok((grid, kernel)) => match interval_on_grid(grid, kernel, &cfg.measures[i], cfg.level) {
                    Ok(ci) => Outcome::Done {
                        covered: ci.contains(truths[i]),
                        width: ci.width(),
                    },
                    Err(e) => Outcome::Failed(e.kind()),
                },
            };
        }
    }
    out
}

fn worker_count(threads: Threads) -> usize {
    match threads {
        Threads::Fixed(n) => n.get(),
        Threads::Auto => std::thread::available_parallelism().map_or(1, NonZeroUsize::get),
    }
}

/// Runs the study; fails if any measure loses more than 1% of its trials.
pub fn run_coverage(cfg: &SimConfig) -> Result<CoverageReport, SimulationError> {
    cfg.validate()?;
    let start = Instant::now();
    let truths = cfg
        .measures
        .iter()
        .map(|m| cfg.dist.population_measure(m))
        .collect::<Result<Vec<_>>>()?;
    let groups = plan(&cfg.measures);
    let threads = worker_count(cfg.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Vec<Outcome>> = pool.install(|| {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| trial(cfg, &groups, &truths, t))
            .collect()
    });

    let measures: Vec<MeasureCoverage> = cfg
        .measures
        .iter()
        .enumerate()
        .map(|(i, &measure)| {
            let mut covered = 0;
            let mut completed = 0;
            let mut width_sum = 0.0;
            let mut failure_reasons = BTreeMap::new();
            for row in &outcomes {
                match row[i] {
                    Outcome::Done { covered: c, width } => {
                        completed += 1;
                        covered += usize::from(c);
                        width_sum += width;
                    }
                    Outcome::Failed(kind) => *failure_reasons.entry(kind.to_owned()).or_insert(0) += 1,
                }
            }
            let failures = cfg.trials - completed;
            let (coverage, mean_width) = if completed > 0 {
                (covered as f64 / completed as f64, width_sum / completed as f64)
            } else {
                (0.0, 0.0)
            };
            MeasureCoverage {
                measure,
                truth: truths[i],
                coverage,
                mean_width,
                covered,
                completed,
                failures,
                failure_reasons,
            }
        })
        .collect();

    let report = CoverageReport {
        config: cfg.clone(),
        measures,
        elapsed: start.elapsed(),
        threads,
    };
    let breaches: Vec<String> = report
        .measures
        .iter()
        .filter(|m| m.failure_rate() > MAX_FAILURE_RATE)
        .map(|m| {
            let reasons: Vec<String> = m
                .failure_reasons
                .iter()
                .map(|(k, v)| format!("{k}: {v}"))
                .collect();
            format!(
                "{} failed in {} of {} trials ({})",
                m.measure,
                m.failures,
                cfg.trials,
                reasons.join(", ")
            )
        })
        .collect();
    if breaches.is_empty() {
        Ok(report)
    } else {
        Err(SimulationError::FailureRate {
            summary: breaches.join("; "),
            report: Box::new(report),
        })
    }
}
