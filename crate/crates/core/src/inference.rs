//! Wald intervals for one sample and for the difference between two
//! independent samples.

use serde::{Deserialize, Serialize};

use crate::asymptotics::XiKernel;
use crate::error::{Error, Result, SampleLabel};
use crate::quantiles::{BandwidthRule, SortedSample};
use crate::skewness::{self, QuantileGrid, SkewMeasure};
use crate::special;

/// Standard normal quantile `Φ⁻¹(alpha)`.
pub fn z_quantile(alpha: f64) -> Result<f64> {
    special::normal_quantile(alpha)
}

fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain {
            what: "level",
            value: level,
            domain: "(0, 1)",
        });
    }
    z_quantile(1.0 - (1.0 - level) / 2.0)
}

/// A point estimate with its standard error and Wald bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub measure: SkewMeasure,
    pub estimate: f64,
    pub se: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub n: usize,
    /// True when every value has been halved to the mean-skew scale.
    pub mean_skew: bool,
}

impl IntervalEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// The same interval for the mean skew over `(0, ½)`: AUC estimate,
    /// standard error and both bounds halved.
    pub fn mean_skew(&self) -> Result<Self> {
        if !self.measure.is_auc() {
            return Err(Error::Unsupported(format!(
                "mean skew is only defined for AUC measures, not {}",
                self.measure
            )));
        }
        if self.mean_skew {
            return Ok(self.clone());
        }
        Ok(Self {
            estimate: skewness::mean_skew(self.estimate),
            se: self.se / 2.0,
            lower: self.lower / 2.0,
            upper: self.upper / 2.0,
            mean_skew: true,
            ..self.clone()
        })
    }
}

/// Interval from a grid that already carries quantile densities.
pub fn interval_on_grid(
    grid: &QuantileGrid,
    kernel: &XiKernel,
    measure: &SkewMeasure,
    level: f64,
) -> Result<IntervalEstimate> {
    let z = critical_value(level)?;
    let estimate = skewness::estimate(grid, measure)?;
    let variance = kernel.asymptotic_variance(grid, measure)? / kernel.sample_size() as f64;
    let se = variance.sqrt();
    Ok(IntervalEstimate {
        measure: *measure,
        estimate,
        se,
        level,
        lower: estimate - z * se,
        upper: estimate + z * se,
        n: kernel.sample_size(),
        mean_skew: false,
    })
}

fn reject_b3(measure: &SkewMeasure) -> Result<()> {
    if *measure == SkewMeasure::B3 {
        Err(Error::Unsupported(
            "b3 has no standard error; only its point estimate is available".into(),
        ))
    } else {
        Ok(())
    }
}

/// Wald interval `estimate ± z_{1−α/2}·se` for one sample.
pub fn interval(
    sample: &SortedSample,
    measure: &SkewMeasure,
    level: f64,
    rule: BandwidthRule,
) -> Result<IntervalEstimate> {
    reject_b3(measure)?;
    measure.validate()?;
    critical_value(level)?;
    let grid = QuantileGrid::build(sample, measure.grid_size(), &measure.pointwise_p(), rule)?;
    let kernel = XiKernel::from_grid(&grid)?;
    interval_on_grid(&grid, &kernel, measure, level)
}

/// Wald interval for `θ_a − θ_b` from two independent samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceEstimate {
    pub measure: SkewMeasure,
    pub estimate_a: f64,
    pub estimate_b: f64,
    pub difference: f64,
    pub variance_a: f64,
    pub variance_b: f64,
    pub se: f64,
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl DifferenceEstimate {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

pub fn difference_interval(
    a: &SortedSample,
    b: &SortedSample,
    measure: &SkewMeasure,
    level: f64,
    rule: BandwidthRule,
) -> Result<DifferenceEstimate> {
    reject_b3(measure)?;
    let z = critical_value(level)?;
    let ia = interval(a, measure, level, rule).map_err(|e| e.in_sample(SampleLabel::A))?;
    let ib = interval(b, measure, level, rule).map_err(|e| e.in_sample(SampleLabel::B))?;
    let (variance_a, variance_b) = (ia.se * ia.se, ib.se * ib.se);
    let se = (variance_a + variance_b).sqrt();
    let difference = ia.estimate - ib.estimate;
    Ok(DifferenceEstimate {
        measure: *measure,
        estimate_a: ia.estimate,
        estimate_b: ib.estimate,
        difference,
        variance_a,
        variance_b,
        se,
        level,
        lower: difference - z * se,
        upper: difference + z * se,
        n_a: a.len(),
        n_b: b.len(),
    })
}
