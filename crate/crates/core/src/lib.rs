//! Quantile-based skewness measures with asymptotic confidence intervals.
//!
//! The pipeline is: a [`SortedSample`] → a [`QuantileGrid`] of type-8
//! quantiles and kernel quantile densities → point estimates
//! ([`skewness`]) → plug-in asymptotic variances ([`asymptotics`]) → Wald
//! intervals ([`inference`]). [`simulation`] measures how often those
//! intervals cover the population value.

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod inference;
pub mod quantiles;
pub mod simulation;
pub mod skewness;
pub mod special;

pub use distributions::DistributionSpec;
pub use error::{Error, Result, SampleLabel};
pub use quantiles::{BandwidthRule, SortedSample};
pub use skewness::{Direction, QuantileGrid, SkewMeasure};
pub use asymptotics::XiKernel;
pub use inference::{difference_interval, interval, DifferenceEstimate, IntervalEstimate};
pub use simulation::{run_coverage, CoverageReport, SimConfig, SimulationError, Threads};
