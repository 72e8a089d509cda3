//! Sample quantiles (Hyndman–Fan type 8) and kernel estimation of the
//! quantile density `g(p) = 1/f(x_p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Minimum sample size accepted by [`SortedSample`].
pub const MIN_SAMPLE_SIZE: usize = 4;

/// Finite observations sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Sorts `data`, rejecting non-finite entries and samples smaller than
    /// [`MIN_SAMPLE_SIZE`].
    pub fn new(mut data: Vec<f64>) -> Result<Self> {
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if data.len() < MIN_SAMPLE_SIZE {
            return Err(Error::TooFewObservations {
                n: data.len(),
                min: MIN_SAMPLE_SIZE,
            });
        }
        data.sort_unstable_by(f64::total_cmp);
        Ok(Self { values: data })
    }

    pub fn from_slice(data: &[f64]) -> Result<Self> {
        Self::new(data.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `c·x + d` for every observation; order is reversed when `c < 0`.
    pub fn affine(&self, c: f64, d: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|x| c * x + d).collect())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Type-8 quantile estimate.
    ///
    /// With `h = (n + 1/3)p + 1/3` clamped to `[1, n]`, returns
    /// `X(⌊h⌋) + (h − ⌊h⌋)(X(⌊h⌋+1) − X(⌊h⌋))`.
    pub fn quantile_type8(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::probability("p", p));
        }
        let n = self.values.len();
        let nf = n as f64;
        let h = ((nf + 1.0 / 3.0) * p + 1.0 / 3.0).clamp(1.0, nf);
        let lo = h.floor();
        let i = lo as usize;
        if i >= n {
            return Ok(self.values[n - 1]);
        }
        let below = self.values[i - 1];
        let above = self.values[i];
        Ok(below + (h - lo) * (above - below))
    }

    /// The order statistic just below the type-8 median; a
    /// location pivot for [`Self::type8_offset`].
    pub(crate) fn pivot(&self) -> f64 {
        let nf = self.len() as f64;
        let h = ((nf + 1.0 / 3.0) * 0.5 + 1.0 / 3.0).clamp(1.0, nf);
        self.values[h.floor() as usize - 1]
    }

    /// `quantile_type8(p) − origin`, computed from differences of order
    /// statistics so that a large common location does not swamp the
    /// result: the offsets of `c·X + d` equal `c` times those of `X` up to
    /// rounding relative to the offsets themselves.
    pub(crate) fn type8_offset(&self, p: f64, origin: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::probability("p", p));
        }
        let n = self.values.len();
        let nf = n as f64;
        let h = ((nf + 1.0 / 3.0) * p + 1.0 / 3.0).clamp(1.0, nf);
        let lo = h.floor();
        let i = lo as usize;
        if i >= n {
            return Ok(self.values[n - 1] - origin);
        }
        let below = self.values[i - 1];
        let above = self.values[i];
        Ok((below - origin) + (h - lo) * (above - below))
    }

    /// Kernel estimate of the quantile density at `p`.
    ///
    /// A kernel-weighted average of scaled spacings:
    ///
    /// ```text
    /// ĝ(p) = n · Σⱼ k_b(j/n − p) (X(j+1) − X(j)) / Σⱼ k_b(j/n − p),   j = 1..n−1
    /// ```
    ///
    /// with the Epanechnikov kernel `k(t) = ¾(1 − t²)` on `|t| < 1`. Away from
    /// the ends of (0, 1) the normalizer is ≈ `n`, so this is the derivative of
    /// the kernel-smoothed empirical quantile function. Near the ends it only
    /// averages the spacings that exist, which keeps the estimate defined when
    /// the window reaches past 0 or 1.
    pub fn quantile_density_estimate(&self, p: f64, rule: BandwidthRule) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::probability("p", p));
        }
        let n = self.len();
        let bandwidth = rule.bandwidth(n, p);
        let nf = n as f64;
        let first = ((nf * (p - bandwidth)).floor().max(1.0)) as usize;
        let last = ((nf * (p + bandwidth)).ceil().min(nf - 1.0)) as usize;
        let mut weighted = 0.0;
        let mut mass = 0.0;
        for j in first..=last {
            let t = (j as f64 / nf - p) / bandwidth;
            if t.abs() >= 1.0 {
                continue;
            }
            let w = 0.75 * (1.0 - t * t);
            weighted += w * (self.values[j] - self.values[j - 1]);
            mass += w;
        }
        let g = nf * weighted / mass;
        if mass > 0.0 && g > 0.0 && g.is_finite() {
            Ok(g)
        } else {
            Err(Error::NonPositiveDensity { p, bandwidth })
        }
    }
}

/// How the kernel bandwidth (in probability units) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// [`default_bandwidth`].
    #[default]
    Default,
    /// A constant bandwidth `0 < b < 0.5`, used as given.
    Fixed(f64),
}

impl BandwidthRule {
    pub fn fixed(b: f64) -> Result<Self> {
        if b > 0.0 && b < 0.5 {
            Ok(Self::Fixed(b))
        } else {
            Err(Error::InvalidParameter(format!(
                "fixed bandwidth must lie in (0, 0.5), got {b}"
            )))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Default => Ok(()),
            Self::Fixed(b) => Self::fixed(b).map(|_| ()),
        }
    }

    pub fn bandwidth(&self, n: usize, p: f64) -> f64 {
        match *self {
            Self::Default => default_bandwidth(n, p),
            Self::Fixed(b) => b,
        }
    }
}

/// `z_0.975 · sqrt(p(1 − p)/n)`, capped at `min(p, 1 − p)` and then floored at
/// `1/n`.
///
/// The floor wins when the two bounds cross (tiny `p`, small `n`), so the
/// window always covers at least one interior spacing.
pub fn default_bandwidth(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let z = z_975();
    let b = z * (p * (1.0 - p) / nf).sqrt();
    b.min(p.min(1.0 - p)).max(1.0 / nf)
}

fn z_975() -> f64 {
    // Cannot fail for a constant in (0, 1).
    special::normal_quantile(0.975).unwrap_or(1.959_963_984_540_054)
}
