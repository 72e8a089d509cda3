//! Delta-method variances for the ratio measures.
//!
//! Sample quantiles are jointly asymptotically normal with
//!
//! ```text
//! Cov(x̂_p, x̂_q) ≈ ξ(p, q) = min(p, q)·(1 − max(p, q))·g(p)·g(q) / n,
//! ```
//!
//! where `g = 1/f(x_·)` is the quantile density. Every contrast `S_p`,
//! `R1_p`, `R2_p` is linear in the quantiles at `p`, `1 − p` and `½`, so each
//! covariance below is a short signed sum of ξ terms. For a ratio
//! `θ_p = S_p / R_p` the delta method gives
//!
//! ```text
//! σ(p, q) = n / (R_p R_q) · [Cov(S_p, S_q) − θ_q Cov(S_p, R_q)
//!                            − θ_p Cov(R_p, S_q) + θ_p θ_q Cov(R_p, R_q)],
//! ```
//!
//! the per-observation asymptotic covariance of `θ̂_p` and `θ̂_q`. Variances
//! of the AUC kinds sum `σ` over the midpoint grid.

use crate::error::{Error, Result};
use crate::skewness::{Direction, Family, QuantileGrid, SkewMeasure};

/// Node indices of `p`, `1 − p` and `½` in a [`XiKernel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Triple {
    lo: usize,
    hi: usize,
    mid: usize,
}

/// Quantile densities at a fixed set of probabilities, plus the sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct XiKernel {
    n: f64,
    probs: Vec<f64>,
    g: Vec<f64>,
    /// Triples for the levels of the grid the kernel was built from.
    levels: Vec<Triple>,
}

impl XiKernel {
    /// Kernel over arbitrary `(p, g(p))` nodes.
    pub fn new(n: usize, nodes: &[(f64, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample size must be positive".into()));
        }
        for &(p, g) in nodes {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::probability("p", p));
            }
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "quantile density at p = {p} must be positive and finite, got {g}"
                )));
            }
        }
        Ok(Self {
            n: n as f64,
            probs: nodes.iter().map(|&(p, _)| p).collect(),
            g: nodes.iter().map(|&(_, g)| g).collect(),
            levels: Vec::new(),
        })
    }

    /// Kernel over every node of a sample grid, with its own sample size.
    pub fn from_grid(grid: &QuantileGrid) -> Result<Self> {
        let n = grid.sample_size().ok_or_else(|| {
            Error::InvalidParameter("population grid has no sample size; use with_sample_size".into())
        })?;
        Self::with_sample_size(grid, n)
    }

    /// Kernel over every node of a grid, for a chosen `n` (e.g. exact
    /// population densities).
    pub fn with_sample_size(grid: &QuantileGrid, n: usize) -> Result<Self> {
        let d = grid.densities().ok_or_else(|| {
            Error::Unsupported("grid was built without quantile densities".into())
        })?;
        let levels = grid.levels();
        let count = levels.len();
        let mut nodes = Vec::with_capacity(2 * count + 1);
        nodes.extend(levels.iter().copied().zip(d.lower.iter().copied()));
        nodes.extend(levels.iter().map(|&p| 1.0 - p).zip(d.upper.iter().copied()));
        nodes.push((0.5, d.median));
        let mut kernel = Self::new(n, &nodes)?;
        kernel.levels = (0..count)
            .map(|i| Triple {
                lo: i,
                hi: count + i,
                mid: 2 * count,
            })
            .collect();
        Ok(kernel)
    }

    pub fn sample_size(&self) -> usize {
        self.n as usize
    }

    fn node(&self, p: f64) -> Result<usize> {
        self.probs
            .iter()
            .position(|&q| q == p)
            .ok_or(Error::MissingProbability { p })
    }

    fn triple(&self, p: f64) -> Result<Triple> {
        Ok(Triple {
            lo: self.node(p)?,
            hi: self.node(1.0 - p)?,
            mid: self.node(0.5)?,
        })
    }

    fn x(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.probs[i], self.probs[j]);
        a.min(b) * (1.0 - a.max(b)) * (self.g[i] * self.g[j]) / self.n
    }

    /// `ξ(p, q)`; both probabilities must be kernel nodes.
    pub fn xi(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.x(self.node(p)?, self.node(q)?))
    }

    pub fn cov_s_s(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.ss(self.triple(p)?, self.triple(q)?))
    }

    pub fn cov_s_r1(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.sr(self.triple(p)?, self.triple(q)?, Family::Gamma))
    }

    pub fn cov_r1_s(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.rs(self.triple(p)?, self.triple(q)?, Family::Gamma))
    }

    pub fn cov_r1_r1(&self, p: f64, q: f64) -> Result<f64> {
        Ok(self.rr(self.triple(p)?, self.triple(q)?, Family::Gamma))
    }

    pub fn cov_s_r2(&self, p: f64, q: f64, direction: Direction) -> Result<f64> {
        Ok(self.sr(self.triple(p)?, self.triple(q)?, Family::Lambda(direction)))
    }

    pub fn cov_r2_s(&self, p: f64, q: f64, direction: Direction) -> Result<f64> {
        Ok(self.rs(self.triple(p)?, self.triple(q)?, Family::Lambda(direction)))
    }

    pub fn cov_r2_r2(&self, p: f64, q: f64, direction: Direction) -> Result<f64> {
        Ok(self.rr(self.triple(p)?, self.triple(q)?, Family::Lambda(direction)))
    }

    // Cov(S_p, S_q)
    fn ss(&self, a: Triple, b: Triple) -> f64 {
        let m = a.mid;
        self.x(a.hi, b.hi) + self.x(a.hi, b.lo) + self.x(a.lo, b.hi) + self.x(a.lo, b.lo)
            - 2.0 * self.x(a.hi, m)
            - 2.0 * self.x(a.lo, m)
            - 2.0 * self.x(m, b.hi)
            - 2.0 * self.x(m, b.lo)
            + 4.0 * self.x(m, m)
    }

    // Cov(S_p, R_q)
    fn sr(&self, a: Triple, b: Triple, family: Family) -> f64 {
        let m = a.mid;
        match family {
            Family::Gamma => {
                self.x(a.hi, b.hi) - self.x(a.hi, b.lo) + self.x(a.lo, b.hi) - self.x(a.lo, b.lo)
                    - 2.0 * self.x(m, b.hi)
                    + 2.0 * self.x(m, b.lo)
            }
            Family::Lambda(Direction::Right) => {
                self.x(a.hi, m) - self.x(a.hi, b.lo) + self.x(a.lo, m) - self.x(a.lo, b.lo)
                    + 2.0 * self.x(m, b.lo)
                    - 2.0 * self.x(m, m)
            }
            Family::Lambda(Direction::Left) => {
                self.x(a.hi, b.hi) - self.x(a.hi, m) + self.x(a.lo, b.hi) - self.x(a.lo, m)
                    - 2.0 * self.x(m, b.hi)
                    + 2.0 * self.x(m, m)
            }
        }
    }

    // Cov(R_p, S_q)
    fn rs(&self, a: Triple, b: Triple, family: Family) -> f64 {
        let m = a.mid;
        match family {
            Family::Gamma => {
                self.x(a.hi, b.hi) + self.x(a.hi, b.lo) - 2.0 * self.x(a.hi, m)
                    - self.x(a.lo, b.hi)
                    - self.x(a.lo, b.lo)
                    + 2.0 * self.x(a.lo, m)
            }
            Family::Lambda(Direction::Right) => {
                self.x(m, b.hi) + self.x(m, b.lo) - self.x(a.lo, b.hi) - self.x(a.lo, b.lo)
                    + 2.0 * self.x(a.lo, m)
                    - 2.0 * self.x(m, m)
            }
            Family::Lambda(Direction::Left) => {
                self.x(a.hi, b.hi) + self.x(a.hi, b.lo) - 2.0 * self.x(a.hi, m)
                    - self.x(m, b.hi)
                    - self.x(m, b.lo)
                    + 2.0 * self.x(m, m)
            }
        }
    }

    // Cov(R_p, R_q)
    fn rr(&self, a: Triple, b: Triple, family: Family) -> f64 {
        let m = a.mid;
        match family {
            Family::Gamma => {
                self.x(a.hi, b.hi) - self.x(a.hi, b.lo) - self.x(a.lo, b.hi) + self.x(a.lo, b.lo)
            }
            Family::Lambda(Direction::Right) => {
                self.x(a.lo, b.lo) - self.x(m, b.lo) - self.x(a.lo, m) + self.x(m, m)
            }
            Family::Lambda(Direction::Left) => {
                self.x(a.hi, b.hi) - self.x(a.hi, m) - self.x(m, b.hi) + self.x(m, m)
            }
        }
    }

    fn sigma(&self, a: &Level, b: &Level, family: Family) -> f64 {
        let bracket = self.ss(a.t, b.t) - b.ratio * self.sr(a.t, b.t, family)
            - a.ratio * self.rs(a.t, b.t, family)
            + a.ratio * b.ratio * self.rr(a.t, b.t, family);
        self.n / (a.scale * b.scale) * bracket
    }

    fn level(&self, grid: &QuantileGrid, p: f64, family: Family) -> Result<Level> {
        let i = grid.level_index(p)?;
        let t = match self.levels.get(i) {
            Some(&t) if self.probs[t.lo] == p => t,
            _ => self.triple(p)?,
        };
        Level::new(grid, i, t, family).ok_or_else(|| Error::DegenerateScale {
            probabilities: vec![p],
        })
    }

    /// Asymptotic covariance `σ(p, q)` of the ratio estimators at `p` and `q`,
    /// with the ratios and denominators taken from `grid`.
    pub fn sigma_cross(&self, grid: &QuantileGrid, p: f64, q: f64, family: Family) -> Result<f64> {
        let a = self.level(grid, p, family)?;
        let b = self.level(grid, q, family)?;
        Ok(self.sigma(&a, &b, family))
    }

    /// `σ(p, p)` for the γ family.
    pub fn sigma1_sq(&self, grid: &QuantileGrid, p: f64) -> Result<f64> {
        self.sigma_cross(grid, p, p, Family::Gamma)
    }

    /// `σ(p, p)` for the λ family.
    pub fn sigma2_sq(&self, grid: &QuantileGrid, p: f64, direction: Direction) -> Result<f64> {
        self.sigma_cross(grid, p, p, Family::Lambda(direction))
    }

    /// Per-observation asymptotic variance of an AUC estimator (integral
    /// scale): `(0.5/J)² ΣⱼΣₖ wⱼ wₖ σ(pⱼ, pₖ)` with `w = p` for starred kinds
    /// and 1 otherwise.
    pub fn auc_variance(&self, grid: &QuantileGrid, measure: &SkewMeasure) -> Result<f64> {
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
        let ps = &grid.levels()[..j];
        let mut levels = Vec::with_capacity(j);
        let mut degenerate = Vec::new();
        for (i, &p) in ps.iter().enumerate() {
            let t = match self.levels.get(i) {
                Some(&t) if self.probs[t.lo] == p => t,
                _ => self.triple(p)?,
            };
            match Level::new(grid, i, t, family) {
                Some(l) => levels.push(l),
                None => degenerate.push(p),
            }
        }
        if !degenerate.is_empty() {
            return Err(Error::DegenerateScale {
                probabilities: degenerate,
            });
        }
        let weight = |i: usize| if measure.is_weighted() { ps[i] } else { 1.0 };
        let mut total = 0.0;
        for (a, la) in levels.iter().enumerate() {
            let mut row = 0.0;
            for (b, lb) in levels.iter().enumerate() {
                row += weight(b) * self.sigma(la, lb, family);
            }
            total += weight(a) * row;
        }
        let h = 0.5 / j as f64;
        let variance = h * h * total;
        check_sign(measure, variance)
    }

    /// Per-observation asymptotic variance of any grid-based measure.
    pub fn asymptotic_variance(&self, grid: &QuantileGrid, measure: &SkewMeasure) -> Result<f64> {
        measure.validate()?;
        if measure.is_auc() {
            return self.auc_variance(grid, measure);
        }
        match (measure.probability(), measure.family()) {
            (Some(p), Some(family)) => {
                let s = self.sigma_cross(grid, p, p, family)?;
                let v = if measure.is_weighted() { p * p * s } else { s };
                check_sign(measure, v)
            }
            _ => Err(Error::Unsupported(format!(
                "no asymptotic variance is available for {measure}"
            ))),
        }
    }
}

fn check_sign(measure: &SkewMeasure, value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::NegativeVariance {
            measure: measure.to_string(),
            value,
        })
    }
}

/// Plug-in values at one grid level.
struct Level {
    t: Triple,
    ratio: f64,
    scale: f64,
}

impl Level {
    fn new(grid: &QuantileGrid, i: usize, t: Triple, family: Family) -> Option<Self> {
        let scale = grid.scale_at(i, family);
        (scale > 0.0).then(|| Level {
            t,
            ratio: grid.s_at(i) / scale,
            scale,
        })
    }
}
