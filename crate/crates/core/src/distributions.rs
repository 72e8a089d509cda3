//! Analytic distribution zoo.
//!
//! Every family exposes its CDF, density, quantile function and quantile
//! density `g(p) = 1/f(x_p)`. Families without a closed-form quantile
//! (chi-square, gamma, beta, Fisher F) are inverted numerically with a
//! bracketed, safeguarded Newton iteration on the analytic CDF. Sampling is by
//! inversion only, so draws depend on nothing but the uniform stream.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skewness::{self, QuantileGrid, SkewMeasure};
use crate::special::{self, ln_beta, ln_gamma};

/// A parametric family with fixed parameters.
///
/// Single-parameter Weibull and gamma members have unit scale; the skewness
/// measures are scale-free, so the scale carries no information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    ChiSquare { df: f64 },
    /// `F(x) = 1 − (1 + x/scale)^(−shape)` for `x ≥ 0`.
    ParetoII { scale: f64, shape: f64 },
    Weibull { shape: f64 },
    Gamma { shape: f64 },
    Beta { a: f64, b: f64 },
    FisherF { d1: f64, d2: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

impl DistributionSpec {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self::Normal {
            mu: finite("mu", mu)?,
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Self::LogNormal {
            mu: finite("mu", mu)?,
            sigma: positive("sigma", sigma)?,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(Self::Exponential {
            rate: positive("rate", rate)?,
        })
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        Ok(Self::ChiSquare {
            df: positive("df", df)?,
        })
    }

    pub fn pareto2(scale: f64, shape: f64) -> Result<Self> {
        Ok(Self::ParetoII {
            scale: positive("scale", scale)?,
            shape: positive("shape", shape)?,
        })
    }

    pub fn weibull(shape: f64) -> Result<Self> {
        Ok(Self::Weibull {
            shape: positive("shape", shape)?,
        })
    }

    pub fn gamma(shape: f64) -> Result<Self> {
        Ok(Self::Gamma {
            shape: positive("shape", shape)?,
        })
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Ok(Self::Beta {
            a: positive("a", a)?,
            b: positive("b", b)?,
        })
    }

    pub fn fisher_f(d1: f64, d2: f64) -> Result<Self> {
        Ok(Self::FisherF {
            d1: positive("d1", d1)?,
            d2: positive("d2", d2)?,
        })
    }

    /// Re-runs the constructor checks; used after deserialization paths that
    /// bypass the constructors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { mu, sigma } => Self::normal(mu, sigma),
            Self::LogNormal { mu, sigma } => Self::lognormal(mu, sigma),
            Self::Exponential { rate } => Self::exponential(rate),
            Self::ChiSquare { df } => Self::chi_square(df),
            Self::ParetoII { scale, shape } => Self::pareto2(scale, shape),
            Self::Weibull { shape } => Self::weibull(shape),
            Self::Gamma { shape } => Self::gamma(shape),
            Self::Beta { a, b } => Self::beta(a, b),
            Self::FisherF { d1, d2 } => Self::fisher_f(d1, d2),
        }
        .map(|_| ())
    }

    /// Support as a closed interval (infinite ends allowed).
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Normal { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Beta { .. } => (0.0, 1.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    /// Distribution function `F(x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain {
                what: "x",
                value: x,
                domain: "real numbers",
            });
        }
        let (lo, hi) = self.support();
        if x <= lo {
            return Ok(0.0);
        }
        if x >= hi {
            return Ok(1.0);
        }
        match *self {
            Self::Normal { mu, sigma } => Ok(special::normal_cdf((x - mu) / sigma)),
            Self::LogNormal { mu, sigma } => Ok(special::normal_cdf((x.ln() - mu) / sigma)),
            Self::Exponential { rate } => Ok(-(-rate * x).exp_m1()),
            Self::ChiSquare { df } => special::gamma_p(0.5 * df, 0.5 * x),
            Self::ParetoII { scale, shape } => Ok(-(-shape * (x / scale).ln_1p()).exp_m1()),
            Self::Weibull { shape } => Ok(-(-x.powf(shape)).exp_m1()),
            Self::Gamma { shape } => special::gamma_p(shape, x),
            Self::Beta { a, b } => special::beta_inc(a, b, x),
            Self::FisherF { d1, d2 } => {
                special::beta_inc(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
            }
        }
    }

    /// Density `f(x)`; zero outside the support.
    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x.is_nan() || x < lo || x > hi {
            return 0.0;
        }
        match *self {
            Self::Normal { mu, sigma } => special::normal_pdf((x - mu) / sigma) / sigma,
            Self::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    special::normal_pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
            Self::Exponential { rate } => rate * (-rate * x).exp(),
            Self::ChiSquare { df } => 0.5 * gamma_density(0.5 * df, 0.5 * x),
            Self::ParetoII { scale, shape } => {
                shape / scale * (-(shape + 1.0) * (x / scale).ln_1p()).exp()
            }
            Self::Weibull { shape } => {
                if x == 0.0 {
                    return match shape {
                        s if s < 1.0 => f64::INFINITY,
                        s if s == 1.0 => 1.0,
                        _ => 0.0,
                    };
                }
                shape * x.powf(shape - 1.0) * (-x.powf(shape)).exp()
            }
            Self::Gamma { shape } => gamma_density(shape, x),
            Self::Beta { a, b } => {
                if x == 0.0 || x == 1.0 {
                    let edge = if x == 0.0 { a } else { b };
                    return match edge {
                        e if e < 1.0 => f64::INFINITY,
                        e if e == 1.0 => (-ln_beta(a, b)).exp(),
                        _ => 0.0,
                    };
                }
                ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
            }
            Self::FisherF { d1, d2 } => {
                if x == 0.0 {
                    return match d1 {
                        d if d < 2.0 => f64::INFINITY,
                        d if d == 2.0 => 1.0,
                        _ => 0.0,
                    };
                }
                let ln = 0.5 * (d1 * (d1 * x).ln() + d2 * d2.ln() - (d1 + d2) * (d1 * x + d2).ln())
                    - x.ln()
                    - ln_beta(0.5 * d1, 0.5 * d2);
                ln.exp()
            }
        }
    }

    /// Quantile function `x_p = F⁻¹(p)` for `0 < p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::probability("p", p));
        }
        match *self {
            Self::Normal { mu, sigma } => Ok(mu + sigma * special::normal_quantile(p)?),
            Self::LogNormal { mu, sigma } => Ok((mu + sigma * special::normal_quantile(p)?).exp()),
            Self::Exponential { rate } => Ok(-(-p).ln_1p() / rate),
            Self::ParetoII { scale, shape } => Ok(scale * ((-(-p).ln_1p() / shape).exp_m1())),
            Self::Weibull { shape } => Ok((-(-p).ln_1p()).powf(1.0 / shape)),
            Self::Gamma { shape } => gamma_quantile(shape, p),
            Self::ChiSquare { df } => Ok(2.0 * gamma_quantile(0.5 * df, p)?),
            Self::Beta { a, b } => beta_quantile(a, b, p),
            Self::FisherF { d1, d2 } => {
                let y = beta_quantile(0.5 * d1, 0.5 * d2, p)?;
                Ok(d2 * y / (d1 * (1.0 - y)))
            }
        }
    }

    /// Quantile density `g(p) = 1/f(x_p)`.
    pub fn quantile_density(&self, p: f64) -> Result<f64> {
        let x = self.quantile(p)?;
        let f = self.density(x);
        if f > 0.0 && f.is_finite() {
            Ok(1.0 / f)
        } else {
            Err(Error::NonPositiveDensity { p, bandwidth: 0.0 })
        }
    }

    /// Population mean, or an error for members without one.
    pub fn mean(&self) -> Result<f64> {
        let m = match *self {
            Self::Normal { mu, .. } => mu,
            Self::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Self::Exponential { rate } => 1.0 / rate,
            Self::ChiSquare { df } => df,
            Self::ParetoII { scale, shape } if shape > 1.0 => scale / (shape - 1.0),
            Self::Weibull { shape } => ln_gamma(1.0 + 1.0 / shape).exp(),
            Self::Gamma { shape } => shape,
            Self::Beta { a, b } => a / (a + b),
            Self::FisherF { d2, .. } if d2 > 2.0 => d2 / (d2 - 2.0),
            _ => return Err(Error::InfiniteMean(self.to_string())),
        };
        Ok(m)
    }

    /// `n` i.i.d. draws by inversion of uniforms taken from `stream`.
    pub fn sample<R: RngCore + ?Sized>(&self, n: usize, stream: &mut R) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be at least 1".into()));
        }
        (0..n).map(|_| self.quantile(open_uniform(stream))).collect()
    }

    /// Population value of a skewness measure, evaluated with exact quantiles.
    /// AUC kinds use the same midpoint grid as the sample estimators.
    pub fn population_measure(&self, measure: &SkewMeasure) -> Result<f64> {
        match measure {
            SkewMeasure::B3 => self.population_b3(),
            _ => {
                let grid = QuantileGrid::population(self, measure.grid_size(), &measure.pointwise_p())?;
                skewness::estimate(&grid, measure)
            }
        }
    }

    /// `(μ − x_0.5) / E|X − x_0.5|`.
    ///
    /// With `B = ∫_0^0.5 (x_0.5 − x_u) du`, `E|X − x_0.5| = μ − x_0.5 + 2B`.
    fn population_b3(&self) -> Result<f64> {
        let mean = self.mean()?;
        let median = self.quantile(0.5)?;
        // u = t²/2 removes the endpoint singularity of x_u at u = 0.
        let integrand = |t: f64| -> f64 {
            if t <= 0.0 {
                return 0.0;
            }
            let u = 0.5 * t * t;
            match self.quantile(u) {
                Ok(x) => (median - x) * t,
                Err(_) => 0.0,
            }
        };
        let lower = adaptive_simpson(&integrand, 0.0, 1.0, 1e-13, 50);
        Ok((mean - median) / (mean - median + 2.0 * lower))
    }
}

/// Uniform on the open interval (0, 1) with 53 random bits.
pub fn open_uniform<R: RngCore + ?Sized>(stream: &mut R) -> f64 {
    ((stream.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn gamma_density(shape: f64, x: f64) -> f64 {
    if x == 0.0 {
        return match shape {
            s if s < 1.0 => f64::INFINITY,
            s if s == 1.0 => 1.0,
            _ => 0.0,
        };
    }
    ((shape - 1.0) * x.ln() - x - ln_gamma(shape)).exp()
}

fn gamma_quantile(shape: f64, p: f64) -> Result<f64> {
    let z = special::normal_quantile(p)?;
    // Wilson–Hilferty starting point
    let c = 1.0 / (9.0 * shape);
    let wh = shape * (1.0 - c + z * c.sqrt()).powi(3);
    let x0 = if wh > 0.0 {
        wh
    } else {
        (p * ln_gamma(shape + 1.0).exp()).powf(1.0 / shape)
    };
    let mut hi = (shape + 10.0 * shape.sqrt()).max(2.0 * x0).max(1.0);
    while special::gamma_p(shape, hi)? < p {
        hi *= 2.0;
    }
    invert_cdf(
        p,
        |x| special::gamma_p(shape, x),
        |x| gamma_density(shape, x),
        0.0,
        hi,
        x0,
    )
}

fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    let x0 = a / (a + b);
    let dist = DistributionSpec::Beta { a, b };
    invert_cdf(
        p,
        |x| special::beta_inc(a, b, x),
        |x| dist.density(x),
        0.0,
        1.0,
        x0,
    )
}

/// Safeguarded Newton iteration for `cdf(x) = p` on the bracket `[lo, hi]`.
fn invert_cdf(
    p: f64,
    cdf: impl Fn(f64) -> Result<f64>,
    pdf: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
) -> Result<f64> {
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    for _ in 0..400 {
        let err = cdf(x)? - p;
        if err.abs() <= 1e-15 * p.min(1.0 - p).max(1e-300) {
            return Ok(x);
        }
        if err < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        let d = pdf(x);
        let newton = x - err / d;
        x = if d > 0.0 && d.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    // The bracket is tight enough by now for any practical purpose.
    Ok(x)
}

/// Adaptive Simpson quadrature on `[a, b]`.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn rec(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Self::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Self::Exponential { rate } => write!(f, "exp({rate})"),
            Self::ChiSquare { df } => write!(f, "chisq({df})"),
            Self::ParetoII { scale, shape } => write!(f, "pareto2({scale},{shape})"),
            Self::Weibull { shape } => write!(f, "weibull({shape})"),
            Self::Gamma { shape } => write!(f, "gamma({shape})"),
            Self::Beta { a, b } => write!(f, "beta({a},{b})"),
            Self::FisherF { d1, d2 } => write!(f, "f({d1},{d2})"),
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses `"lognormal(0,1)"`, `"exp(1)"`, `"chisq(5)"`, `"pareto2(1,7)"`,
    /// `"weibull(2)"`, `"gamma(5)"`, `"beta(2,5)"`, `"f(2,8)"`,
    /// `"normal(2,1)"`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let bad = || Error::Parse(format!("cannot parse distribution {s:?}"));
        let open = lower.find('(').ok_or_else(bad)?;
        if !lower.ends_with(')') {
            return Err(bad());
        }
        let name = &lower[..open];
        let args = &lower[open + 1..lower.len() - 1];
        let params: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        let arity = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "{name} takes {k} parameter(s), got {} in {s:?}",
                    params.len()
                )))
            }
        };
        match name {
            "normal" | "norm" | "n" => {
                arity(2)?;
                Self::normal(params[0], params[1])
            }
            "lognormal" | "lnorm" | "ln" => {
                arity(2)?;
                Self::lognormal(params[0], params[1])
            }
            "exp" | "exponential" => {
                arity(1)?;
                Self::exponential(params[0])
            }
            "chisq" | "chi2" | "chisquare" => {
                arity(1)?;
                Self::chi_square(params[0])
            }
            "pareto2" | "par" | "lomax" => {
                arity(2)?;
                Self::pareto2(params[0], params[1])
            }
            "weibull" | "wei" => {
                arity(1)?;
                Self::weibull(params[0])
            }
            "gamma" => {
                arity(1)?;
                Self::gamma(params[0])
            }
            "beta" => {
                arity(2)?;
                Self::beta(params[0], params[1])
            }
            "f" | "fisherf" => {
                arity(2)?;
                Self::fisher_f(params[0], params[1])
            }
            _ => Err(Error::Parse(format!("unknown distribution family {name:?}"))),
        }
    }
}

impl TryFrom<String> for DistributionSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistributionSpec> for String {
    fn from(d: DistributionSpec) -> String {
        d.to_string()
    }
}
