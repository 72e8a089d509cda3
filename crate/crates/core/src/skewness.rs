//! Quantile-based skewness measures and their point estimators.
//!
//! Every grid-based measure is a ratio `S_p / R_p` of quantile contrasts,
//!
//! ```text
//! S_p  = x_{1−p} + x_p − 2·x_{0.5}
//! R1_p = x_{1−p} − x_p                       (γ family)
//! R2_p = x_{0.5} − x_p    (right-directed)    (λ family)
//!      = x_{1−p} − x_{0.5} (left-directed)
//! ```
//!
//! evaluated at a single `p` or averaged over the midpoint grid
//! `p_j = 0.5·(j − ½)/J`, `j = 1..J`. The AUC kinds report the integral
//! `∫₀^½ ratio(p) dp ≈ (0.5/J)·Σ ratio(p_j)`; halve it for the mean skew over
//! `(0, ½)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::quantiles::{BandwidthRule, SortedSample};

/// Grid size used when a measure string does not override it.
pub const DEFAULT_GRID_SIZE: usize = 100;

/// Probabilities used when expanding `all`.
pub const STANDARD_PROBABILITIES: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];

/// Which tail the λ denominator measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Denominator `x_{0.5} − x_p`; sensitive to right skew.
    #[default]
    Right,
    /// Denominator `x_{1−p} − x_{0.5}`; sensitive to left skew.
    Left,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "right" | "r" => Ok(Direction::Right),
            "left" | "l" => Ok(Direction::Left),
            other => Err(Error::Parse(format!(
                "direction must be `left` or `right`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Right => "right",
            Direction::Left => "left",
        })
    }
}

/// Denominator family of a ratio measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gamma,
    Lambda(Direction),
}

/// A skewness measure.
///
/// String form: `gamma@P`, `lambda@P`, `gamma_star@P`, `lambda_star@P`,
/// `auc_gamma`, `auc_lambda`, `auc_gamma_star`, `auc_lambda_star`, `b3`.
/// λ kinds take an optional `:left` / `:right` suffix and AUC kinds an
/// optional `:j=N` suffix, e.g. `auc_lambda:left:j=200`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SkewMeasure {
    Gamma { p: f64 },
    Lambda { p: f64, direction: Direction },
    GammaStar { p: f64 },
    LambdaStar { p: f64, direction: Direction },
    AucGamma { j: usize },
    AucLambda { j: usize, direction: Direction },
    AucGammaStar { j: usize },
    AucLambdaStar { j: usize, direction: Direction },
    /// `(mean − median) / E|X − median|`.
    B3,
}

impl SkewMeasure {
    pub fn gamma(p: f64) -> Result<Self> {
        Self::Gamma { p }.validated()
    }

    pub fn lambda(p: f64, direction: Direction) -> Result<Self> {
        Self::Lambda { p, direction }.validated()
    }

    pub fn auc_gamma(j: usize) -> Result<Self> {
        Self::AucGamma { j }.validated()
    }

    pub fn auc_lambda(j: usize, direction: Direction) -> Result<Self> {
        Self::AucLambda { j, direction }.validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.probability() {
            if !(p > 0.0 && p < 0.5) {
                return Err(Error::Domain {
                    what: "p",
                    value: p,
                    domain: "(0, 0.5)",
                });
            }
        }
        if let Some(j) = self.grid() {
            if j < 2 {
                return Err(Error::InvalidParameter(format!(
                    "grid size J must be at least 2, got {j}"
                )));
            }
        }
        Ok(())
    }

    /// The single probability of a pointwise measure.
    pub fn probability(&self) -> Option<f64> {
        match *self {
            Self::Gamma { p }
            | Self::Lambda { p, .. }
            | Self::GammaStar { p }
            | Self::LambdaStar { p, .. } => Some(p),
            _ => None,
        }
    }

    /// `J` for AUC measures.
    pub fn grid(&self) -> Option<usize> {
        match *self {
            Self::AucGamma { j }
            | Self::AucLambda { j, .. }
            | Self::AucGammaStar { j }
            | Self::AucLambdaStar { j, .. } => Some(j),
            _ => None,
        }
    }

    /// Midpoints needed on a [`QuantileGrid`]: `J` for AUC measures, else 0.
    pub fn grid_size(&self) -> usize {
        self.grid().unwrap_or(0)
    }

    /// Extra probabilities needed on a [`QuantileGrid`].
    pub fn pointwise_p(&self) -> Vec<f64> {
        self.probability().into_iter().collect()
    }

    pub fn family(&self) -> Option<Family> {
        match *self {
            Self::Gamma { .. } | Self::GammaStar { .. } | Self::AucGamma { .. } | Self::AucGammaStar { .. } => {
                Some(Family::Gamma)
            }
            Self::Lambda { direction, .. }
            | Self::LambdaStar { direction, .. }
            | Self::AucLambda { direction, .. }
            | Self::AucLambdaStar { direction, .. } => Some(Family::Lambda(direction)),
            Self::B3 => None,
        }
    }

    /// Starred kinds weight each ratio by its `p`.
    pub fn is_weighted(&self) -> bool {
        matches!(
            self,
            Self::GammaStar { .. }
                | Self::LambdaStar { .. }
                | Self::AucGammaStar { .. }
                | Self::AucLambdaStar { .. }
        )
    }

    pub fn is_auc(&self) -> bool {
        self.grid().is_some()
    }

    /// Same measure with `J` replaced (no-op for non-AUC kinds).
    pub fn with_grid(self, j: usize) -> Self {
        match self {
            Self::AucGamma { .. } => Self::AucGamma { j },
            Self::AucLambda { direction, .. } => Self::AucLambda { j, direction },
            Self::AucGammaStar { .. } => Self::AucGammaStar { j },
            Self::AucLambdaStar { direction, .. } => Self::AucLambdaStar { j, direction },
            other => other,
        }
    }

    /// Same measure with the λ direction replaced (no-op for other kinds).
    pub fn with_direction(self, direction: Direction) -> Self {
        match self {
            Self::Lambda { p, .. } => Self::Lambda { p, direction },
            Self::LambdaStar { p, .. } => Self::LambdaStar { p, direction },
            Self::AucLambda { j, .. } => Self::AucLambda { j, direction },
            Self::AucLambdaStar { j, .. } => Self::AucLambdaStar { j, direction },
            other => other,
        }
    }

    /// γ and λ at [`STANDARD_PROBABILITIES`], the four AUC kinds and b₃.
    pub fn all() -> Vec<Self> {
        let mut out: Vec<Self> = STANDARD_PROBABILITIES
            .iter()
            .map(|&p| Self::Gamma { p })
            .collect();
        out.extend(STANDARD_PROBABILITIES.iter().map(|&p| Self::Lambda {
            p,
            direction: Direction::Right,
        }));
        let j = DEFAULT_GRID_SIZE;
        let direction = Direction::Right;
        out.extend([
            Self::AucGamma { j },
            Self::AucLambda { j, direction },
            Self::AucGammaStar { j },
            Self::AucLambdaStar { j, direction },
            Self::B3,
        ]);
        out
    }

    /// Comma-separated measure list; `all` expands in place.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if item.eq_ignore_ascii_case("all") {
                out.extend(Self::all());
            } else {
                out.push(item.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::Parse("empty measure list".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for SkewMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, direction) = match *self {
            Self::Gamma { p } => return write!(f, "gamma@{p}"),
            Self::GammaStar { p } => return write!(f, "gamma_star@{p}"),
            Self::Lambda { p, direction } => (format!("lambda@{p}"), direction),
            Self::LambdaStar { p, direction } => (format!("lambda_star@{p}"), direction),
            Self::AucGamma { .. } => ("auc_gamma".to_owned(), Direction::Right),
            Self::AucGammaStar { .. } => ("auc_gamma_star".to_owned(), Direction::Right),
            Self::AucLambda { direction, .. } => ("auc_lambda".to_owned(), direction),
            Self::AucLambdaStar { direction, .. } => ("auc_lambda_star".to_owned(), direction),
            Self::B3 => return f.write_str("b3"),
        };
        f.write_str(&name)?;
        if direction == Direction::Left {
            f.write_str(":left")?;
        }
        match self.grid() {
            Some(j) if j != DEFAULT_GRID_SIZE => write!(f, ":j={j}"),
            _ => Ok(()),
        }
    }
}

impl FromStr for SkewMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let cleaned = cleaned.to_ascii_lowercase();
        let mut parts = cleaned.split(':');
        let head = parts.next().unwrap_or_default();
        let bad = || Error::Parse(format!("unrecognised measure `{s}`"));

        let measure = if let Some((name, p)) = head.split_once('@') {
            let p: f64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad probability in measure `{s}`")))?;
            let direction = Direction::Right;
            match name {
                "gamma" => Self::Gamma { p },
                "lambda" => Self::Lambda { p, direction },
                "gamma_star" => Self::GammaStar { p },
                "lambda_star" => Self::LambdaStar { p, direction },
                _ => return Err(bad()),
            }
        } else {
            let j = DEFAULT_GRID_SIZE;
            let direction = Direction::Right;
            match head {
                "auc_gamma" => Self::AucGamma { j },
                "auc_lambda" => Self::AucLambda { j, direction },
                "auc_gamma_star" => Self::AucGammaStar { j },
                "auc_lambda_star" => Self::AucLambdaStar { j, direction },
                "b3" => Self::B3,
                _ => return Err(bad()),
            }
        };

        let mut measure = measure;
        for modifier in parts {
            if let Some(j) = modifier.strip_prefix("j=") {
                if !measure.is_auc() {
                    return Err(Error::Parse(format!("`:j=` only applies to AUC measures (`{s}`)")));
                }
                let j = j
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad grid size in measure `{s}`")))?;
                measure = measure.with_grid(j);
            } else {
                if !matches!(measure.family(), Some(Family::Lambda(_))) {
                    return Err(Error::Parse(format!("direction only applies to λ measures (`{s}`)")));
                }
                measure = measure.with_direction(modifier.parse()?);
            }
        }
        measure.validate()?;
        Ok(measure)
    }
}

impl TryFrom<String> for SkewMeasure {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SkewMeasure> for String {
    fn from(m: SkewMeasure) -> String {
        m.to_string()
    }
}

/// Midpoint grid `p_j = 0.5·(j − ½)/J` for `j = 1..J`.
pub fn midpoints(j: usize) -> Vec<f64> {
    let jf = j as f64;
    (0..j).map(|i| 0.5 * (i as f64 + 0.5) / jf).collect()
}

/// Quantiles (and optionally quantile densities) at `p`, `1 − p` and `0.5`
/// for a set of levels `p < 0.5`.
///
/// The first `J` levels are the AUC midpoints; any extra pointwise levels
/// follow. Quantiles are stored relative to `origin` (a central order
/// statistic for samples), which keeps `S_p` and the scales free of the
/// rounding a large location would otherwise introduce.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    j: usize,
    levels: Vec<f64>,
    origin: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    median: f64,
    densities: Option<Densities>,
    sample_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Densities {
    pub(crate) lower: Vec<f64>,
    pub(crate) upper: Vec<f64>,
    pub(crate) median: f64,
}

fn grid_levels(j: usize, extras: &[f64]) -> Result<Vec<f64>> {
    if j == 0 && extras.is_empty() {
        return Err(Error::InvalidParameter("quantile grid has no levels".into()));
    }
    let mut levels = midpoints(j);
    for &p in extras {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::Domain {
                what: "p",
                value: p,
                domain: "(0, 0.5)",
            });
        }
        if !levels.contains(&p) {
            levels.push(p);
        }
    }
    Ok(levels)
}

impl QuantileGrid {
    /// Type-8 quantiles and kernel quantile densities of a sample.
    ///
    /// Fails with the first level whose density estimate is not positive.
    pub fn build(
        sample: &SortedSample,
        j: usize,
        extras: &[f64],
        rule: BandwidthRule,
    ) -> Result<Self> {
        let mut grid = Self::quantiles(sample, j, extras)?;
        let density = |p: f64| sample.quantile_density_estimate(p, rule);
        let lower = grid.levels.iter().map(|&p| density(p)).collect::<Result<Vec<_>>>()?;
        let upper = grid
            .levels
            .iter()
            .map(|&p| density(1.0 - p))
            .collect::<Result<Vec<_>>>()?;
        let median = density(0.5)?;
        grid.densities = Some(Densities {
            lower,
            upper,
            median,
        });
        Ok(grid)
    }

    /// Type-8 quantiles only; enough for point estimates.
    pub fn quantiles(sample: &SortedSample, j: usize, extras: &[f64]) -> Result<Self> {
        let levels = grid_levels(j, extras)?;
        let origin = sample.pivot();
        let q = |p: f64| sample.type8_offset(p, origin);
        let lower = levels.iter().map(|&p| q(p)).collect::<Result<Vec<_>>>()?;
        let upper = levels.iter().map(|&p| q(1.0 - p)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            j,
            origin,
            median: q(0.5)?,
            levels,
            lower,
            upper,
            densities: None,
            sample_size: Some(sample.len()),
        })
    }

    /// Exact quantiles and quantile densities of a distribution.
    pub fn population(dist: &DistributionSpec, j: usize, extras: &[f64]) -> Result<Self> {
        let levels = grid_levels(j, extras)?;
        let q = |p: f64| dist.quantile(p);
        let g = |p: f64| dist.quantile_density(p);
        let lower = levels.iter().map(|&p| q(p)).collect::<Result<Vec<_>>>()?;
        let upper = levels.iter().map(|&p| q(1.0 - p)).collect::<Result<Vec<_>>>()?;
        let densities = Densities {
            lower: levels.iter().map(|&p| g(p)).collect::<Result<Vec<_>>>()?,
            upper: levels.iter().map(|&p| g(1.0 - p)).collect::<Result<Vec<_>>>()?,
            median: g(0.5)?,
        };
        Ok(Self {
            j,
            origin: 0.0,
            median: q(0.5)?,
            levels,
            lower,
            upper,
            densities: Some(densities),
            sample_size: None,
        })
    }

    /// Number of AUC midpoints.
    pub fn grid_size(&self) -> usize {
        self.j
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn sample_size(&self) -> Option<usize> {
        self.sample_size
    }

    pub fn median(&self) -> f64 {
        self.origin + self.median
    }

    pub fn has_densities(&self) -> bool {
        self.densities.is_some()
    }

    pub(crate) fn densities(&self) -> Option<&Densities> {
        self.densities.as_ref()
    }

    pub fn level_index(&self, p: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|&l| l == p)
            .ok_or(Error::MissingProbability { p })
    }

    /// Quantile at `p`, `1 − p` or `0.5` for a stored level `p`.
    pub fn quantile_at(&self, p: f64) -> Option<f64> {
        if p == 0.5 {
            return Some(self.median());
        }
        self.find(p, &self.lower, &self.upper).map(|x| self.origin + x)
    }

    /// Quantile density at `p`, `1 − p` or `0.5` for a stored level `p`.
    pub fn density_at(&self, p: f64) -> Option<f64> {
        let d = self.densities.as_ref()?;
        if p == 0.5 {
            return Some(d.median);
        }
        self.find(p, &d.lower, &d.upper)
    }

    fn find(&self, p: f64, lower: &[f64], upper: &[f64]) -> Option<f64> {
        if let Some(i) = self.levels.iter().position(|&l| l == p) {
            return Some(lower[i]);
        }
        self.levels
            .iter()
            .position(|&l| 1.0 - l == p)
            .map(|i| upper[i])
    }

    pub(crate) fn s_at(&self, i: usize) -> f64 {
        self.upper[i] + self.lower[i] - 2.0 * self.median
    }

    pub(crate) fn scale_at(&self, i: usize, family: Family) -> f64 {
        match family {
            Family::Gamma => self.upper[i] - self.lower[i],
            Family::Lambda(Direction::Right) => self.median - self.lower[i],
            Family::Lambda(Direction::Left) => self.upper[i] - self.median,
        }
    }
}

/// `S_p = x_{1−p} + x_p − 2·x_{0.5}`.
pub fn s_p(grid: &QuantileGrid, p: f64) -> Result<f64> {
    Ok(grid.s_at(grid.level_index(p)?))
}

/// `R1_p = x_{1−p} − x_p`.
pub fn r1_p(grid: &QuantileGrid, p: f64) -> Result<f64> {
    Ok(grid.scale_at(grid.level_index(p)?, Family::Gamma))
}

/// `R2_p` in the given direction.
pub fn r2_p(grid: &QuantileGrid, p: f64, direction: Direction) -> Result<f64> {
    Ok(grid.scale_at(grid.level_index(p)?, Family::Lambda(direction)))
}

fn ratio_at(grid: &QuantileGrid, i: usize, family: Family) -> Option<f64> {
    let r = grid.scale_at(i, family);
    (r > 0.0).then(|| grid.s_at(i) / r)
}

/// Point estimate of a pointwise measure.
pub fn estimate_pointwise(grid: &QuantileGrid, measure: &SkewMeasure) -> Result<f64> {
    let (p, family) = match (measure.probability(), measure.family()) {
        (Some(p), Some(f)) => (p, f),
        _ => {
            return Err(Error::Unsupported(format!(
                "{measure} is not a pointwise measure"
            )))
        }
    };
    let i = grid.level_index(p)?;
    let ratio = ratio_at(grid, i, family).ok_or_else(|| Error::DegenerateScale {
        probabilities: vec![p],
    })?;
    Ok(if measure.is_weighted() { p * ratio } else { ratio })
}

/// Point estimate of an AUC measure on the integral scale.
///
/// Every midpoint with a zero denominator is reported in the error.
pub fn estimate_auc(grid: &QuantileGrid, measure: &SkewMeasure) -> Result<f64> {
    let (j, family) = match (measure.grid(), measure.family()) {
        (Some(j), Some(f)) => (j, f),
        _ => return Err(Error::Unsupported(format!("{measure} is not an AUC measure"))),
    };
    if grid.grid_size() != j {
        return Err(Error::InvalidParameter(format!(
            "{measure} needs a grid with J = {j}, got J = {}",
            grid.grid_size()
        )));
    }
    let mut sum = 0.0;
    let mut degenerate = Vec::new();
    for i in 0..j {
        match ratio_at(grid, i, family) {
            Some(r) if measure.is_weighted() => sum += grid.levels[i] * r,
            Some(r) => sum += r,
            None => degenerate.push(grid.levels[i]),
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::DegenerateScale {
            probabilities: degenerate,
        });
    }
    Ok(sum * 0.5 / j as f64)
}

/// Point estimate of any grid-based measure.
pub fn estimate(grid: &QuantileGrid, measure: &SkewMeasure) -> Result<f64> {
    match measure {
        SkewMeasure::B3 => Err(Error::Unsupported(
            "b3 is computed from the raw sample, not a quantile grid".into(),
        )),
        m if m.is_auc() => estimate_auc(grid, m),
        m => estimate_pointwise(grid, m),
    }
}

/// Average of the ratio over `(0, ½)`: the AUC divided by ½.
pub fn mean_skew(auc: f64) -> f64 {
    auc / 2.0
}

/// `b₃ = (mean − median) / mean|X − median|` with the type-8 median.
pub fn estimate_b3(sample: &SortedSample) -> Result<f64> {
    // Everything relative to a central order statistic, as in the grids.
    let origin = sample.pivot();
    let median = sample.type8_offset(0.5, origin)?;
    let n = sample.len() as f64;
    let centred = || sample.values().iter().map(|x| x - origin);
    let spread = centred().map(|x| (x - median).abs()).sum::<f64>() / n;
    if spread == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    let mean = centred().sum::<f64>() / n;
    Ok((mean - median) / spread)
}

/// Point estimate straight from a sample, building only what the measure needs.
pub fn estimate_sample(sample: &SortedSample, measure: &SkewMeasure) -> Result<f64> {
    measure.validate()?;
    match measure {
        SkewMeasure::B3 => estimate_b3(sample),
        m => {
            let grid = QuantileGrid::quantiles(sample, m.grid_size(), &m.pointwise_p())?;
            estimate(&grid, m)
        }
    }
}
