//! Running averages with confidence intervals, and the separation predicates.

use thiserror::Error;

use crate::geometry::Point;
use crate::oracle::{OracleError, QueryOracle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfintError {
    #[error("estimates are at different levels ({0} vs {1})")]
    LevelMismatch(f64, f64),
    #[error("estimate has no samples")]
    Empty,
}

/// How many samples buy a confidence half-width `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// `⌈4σ² ln T / γ²⌉`: the subgaussian tail `2exp(−nγ²/2σ²)` is at most `2/T²`.
    #[default]
    Calibrated,
    /// `⌈2σ² ln T / γ²⌉`.
    Variance,
    /// `⌈2σ ln T / γ²⌉`, the count written in the algorithm listing.
    PaperLiteral,
}

/// Multiplier on `2σ² ln T / γ²` in [`SamplingMode::Calibrated`].
pub const CALIBRATION: f64 = 2.0;

/// Sample count for half-width `gamma`, noise scale `sigma`, horizon `T`.
/// Never less than one.
pub fn required_samples(mode: SamplingMode, gamma: f64, sigma: f64, horizon: f64) -> u64 {
    let scale = match mode {
        SamplingMode::Calibrated => CALIBRATION * sigma * sigma,
        SamplingMode::Variance => sigma * sigma,
        SamplingMode::PaperLiteral => sigma,
    };
    let raw = 2.0 * scale * horizon.ln() / (gamma * gamma);
    // ln(e²) is 2 + 1 ulp in floating point; do not let that add a sample.
    let n = (raw * (1.0 - 1e-12)).ceil();
    if n >= u64::MAX as f64 {
        u64::MAX
    } else {
        (n as u64).max(1)
    }
}

/// Sampling rule shared by every estimate in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPolicy {
    pub mode: SamplingMode,
    pub sigma: f64,
    pub horizon: u64,
    /// Keep earlier samples when refining to a smaller level.
    pub reuse: bool,
}

impl SamplingPolicy {
    pub fn new(mode: SamplingMode, sigma: f64, horizon: u64) -> Self {
        Self { mode, sigma, horizon, reuse: mode != SamplingMode::PaperLiteral }
    }

    pub fn required(&self, gamma: f64) -> u64 {
        required_samples(self.mode, gamma, self.sigma, self.horizon as f64)
    }
}

/// Samples at one point together with the current half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub point: Point,
    pub sum: f64,
    pub n: u64,
    pub level: f64,
}

impl PointEstimate {
    pub fn new(point: Point) -> Self {
        Self { point, sum: 0.0, n: 0, level: f64::INFINITY }
    }

    /// An estimate with a prescribed mean, for predicate tests.
    pub fn with_mean(point: Point, mean: f64, level: f64) -> Self {
        Self { point, sum: mean, n: 1, level }
    }

    pub fn mean(&self) -> Result<f64, ConfintError> {
        if self.n == 0 {
            return Err(ConfintError::Empty);
        }
        Ok(self.sum / self.n as f64)
    }

    fn mean_or_nan(&self) -> f64 {
        self.mean().unwrap_or(f64::NAN)
    }

    pub fn lower(&self) -> f64 {
        self.mean_or_nan() - self.level
    }

    pub fn upper(&self) -> f64 {
        self.mean_or_nan() + self.level
    }

    /// Queries needed to reach `target`.
    pub fn cost(&self, policy: &SamplingPolicy, target: f64) -> u64 {
        let need = policy.required(target);
        if policy.reuse {
            need.saturating_sub(self.n)
        } else {
            need
        }
    }

    /// Samples until the estimate is valid at level `target`.
    ///
    /// With reuse, only the missing samples are drawn. Without it the old
    /// samples are discarded first. On a budget error the partial samples are
    /// kept and the level is left unchanged.
    pub fn refine<O: QueryOracle + ?Sized>(
        &mut self,
        oracle: &mut O,
        policy: &SamplingPolicy,
        target: f64,
    ) -> Result<(), OracleError> {
        let need = policy.required(target);
        if !policy.reuse {
            self.sum = 0.0;
            self.n = 0;
            self.level = f64::INFINITY;
        }
        while self.n < need {
            self.sum += oracle.query(&self.point)?;
            self.n += 1;
        }
        self.level = target;
        Ok(())
    }
}

/// `a ≥ b` up to a few ulps, so that sums like `0.3 + 0.1` compare equal to `0.4`.
pub fn ge(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    a >= b - 4.0 * f64::EPSILON * scale
}

/// True iff the two intervals are `gamma`-separated in either order.
pub fn separated(a: &PointEstimate, b: &PointEstimate, gamma: f64) -> Result<bool, ConfintError> {
    if a.level != b.level {
        return Err(ConfintError::LevelMismatch(a.level, b.level));
    }
    Ok(ge(a.lower(), b.upper() + gamma) || ge(b.lower(), a.upper() + gamma))
}
