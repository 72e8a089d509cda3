use std::fmt;

/// Which of two samples an error came from in a two-sample comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleLabel {
    A,
    B,
}

impl fmt::Display for SampleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleLabel::A => f.write_str("sample A"),
            SampleLabel::B => f.write_str("sample B"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("sample must contain at least {min} observations, got {n}")]
    TooFewObservations { n: usize, min: usize },

    #[error("sample contains a non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("quantile density estimate is not positive at p = {p} (bandwidth {bandwidth}); too many ties")]
    NonPositiveDensity { p: f64, bandwidth: f64 },

    #[error("degenerate scale (zero denominator) at p = {}; the data has too many ties for quantile-based skewness", fmt_list(.probabilities))]
    DegenerateScale { probabilities: Vec<f64> },

    #[error("zero mean absolute deviation about the median (constant sample)")]
    ZeroDispersion,

    #[error("probability {p} was not precomputed in the quantile-density kernel")]
    MissingProbability { p: f64 },

    #[error("asymptotic variance for {measure} is negative ({value:e})")]
    NegativeVariance { measure: String, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("distribution {0} has no finite mean")]
    InfiniteMean(String),

    #[error("numerical routine failed to converge: {0}")]
    NoConvergence(&'static str),

    #[error("{label}: {source}")]
    InSample {
        label: SampleLabel,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn probability(what: &'static str, value: f64) -> Self {
        Error::Domain {
            what,
            value,
            domain: "(0, 1)",
        }
    }

    pub(crate) fn in_sample(self, label: SampleLabel) -> Self {
        Error::InSample {
            label,
            source: Box::new(self),
        }
    }

    /// Short machine-friendly tag, used to tally per-trial failures.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse(_) => "parse",
            Error::TooFewObservations { .. } => "too_few_observations",
            Error::NonFinite { .. } => "non_finite",
            Error::NonPositiveDensity { .. } => "non_positive_density",
            Error::DegenerateScale { .. } => "degenerate_scale",
            Error::ZeroDispersion => "zero_dispersion",
            Error::MissingProbability { .. } => "missing_probability",
            Error::NegativeVariance { .. } => "negative_variance",
            Error::Unsupported(_) => "unsupported",
            Error::InfiniteMean(_) => "infinite_mean",
            Error::NoConvergence(_) => "no_convergence",
            Error::InSample { source, .. } => source.kind(),
            Error::Config(_) => "config",
        }
    }
}

fn fmt_list(ps: &[f64]) -> String {
    ps.iter()
        .map(|p| format!("{p}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
