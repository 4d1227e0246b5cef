//! One-dimensional optimizer: three probes per epoch, halving confidence
//! levels per round, and a center probe that certifies low regret when the
//! outer probes cannot be told apart.

use nalgebra::DVector;

use crate::confint::{ge, ConfintError, PointEstimate, SamplingPolicy};
use crate::oracle::{BudgetSlice, OracleError, QueryOracle};

/// Levels below this are not attempted; with zero noise rounds cost nothing
/// once every probe has one sample, so the round loop needs a floor.
pub const DEFAULT_GAMMA_FLOOR: f64 = 1.0 / (1u64 << 40) as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval1d {
    pub l: f64,
    pub r: f64,
}

impl Interval1d {
    pub fn new(l: f64, r: f64) -> Self {
        assert!(l < r, "empty interval [{l}, {r}]");
        Self { l, r }
    }

    pub fn width(&self) -> f64 {
        self.r - self.l
    }

    pub fn x_l(&self) -> f64 {
        self.l + self.width() / 4.0
    }

    pub fn x_c(&self) -> f64 {
        self.l + self.width() / 2.0
    }

    pub fn x_r(&self) -> f64 {
        self.l + 3.0 * self.width() / 4.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.l <= x && x <= self.r
    }

    /// The interval after discarding the quarter on the `side` of the outer probes.
    pub fn shrink(&self, side: Side) -> Self {
        match side {
            Side::Left => Self { l: self.x_l(), r: self.r },
            Side::Right => Self { l: self.l, r: self.x_r() },
        }
    }
}

/// Which end of the interval is discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Drop `[l, x_l]`.
    Left,
    /// Drop `[x_r, r]`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case1d {
    /// The outer probes are separated.
    Case1(Side),
    /// An outer probe is separated from the center.
    Case2(Side),
    Continue,
}

/// Case analysis on the three probes at a common level.
pub fn classify_1d(
    left: &PointEstimate,
    center: &PointEstimate,
    right: &PointEstimate,
    gamma: f64,
) -> Result<Case1d, ConfintError> {
    for e in [center, right] {
        if e.level != left.level {
            return Err(ConfintError::LevelMismatch(left.level, e.level));
        }
    }
    let side = if ge(left.lower(), right.lower()) { Side::Left } else { Side::Right };
    let max_lb = left.lower().max(right.lower());
    if ge(max_lb, left.upper().min(right.upper()) + gamma) {
        Ok(Case1d::Case1(side))
    } else if ge(max_lb, center.upper() + gamma) {
        Ok(Case1d::Case2(side))
    } else {
        Ok(Case1d::Continue)
    }
}

/// Why an epoch ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochEnd1d {
    Shrunk(Case1d),
    /// The next round would not fit in the remaining budget.
    BudgetStop,
    /// The next round's level is below the floor.
    ResolutionFloor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub gamma: f64,
    /// Queries made before and after the round.
    pub t_start: u64,
    pub t_end: u64,
    pub means: [f64; 3],
    pub case: Case1d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutcome1d {
    pub epoch: u32,
    pub interval: Interval1d,
    pub end: EpochEnd1d,
    /// Index of the last completed round, 0 if none completed.
    pub final_round: u32,
    pub t_start: u64,
    pub t_end: u64,
    pub rounds: Vec<RoundRecord>,
}

impl EpochOutcome1d {
    /// Level of the last completed round.
    pub fn final_gamma(&self) -> f64 {
        0.5f64.powi(self.final_round as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config1d {
    pub policy: SamplingPolicy,
    pub interval: Interval1d,
    pub gamma_floor: f64,
}

impl Config1d {
    pub fn new(policy: SamplingPolicy) -> Self {
        Self { policy, interval: Interval1d::new(0.0, 1.0), gamma_floor: DEFAULT_GAMMA_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run1dReport {
    pub epochs: Vec<EpochOutcome1d>,
    pub final_interval: Interval1d,
    /// Midpoint of the final interval.
    pub recommendation: f64,
    pub queries: u64,
}

impl Run1dReport {
    /// Epochs that ended by shrinking the interval.
    pub fn completed_epochs(&self) -> usize {
        self.epochs.iter().filter(|e| matches!(e.end, EpochEnd1d::Shrunk(_))).count()
    }
}

/// Runs epochs until the horizon `config.policy.horizon` (or the oracle's own
/// budget) cannot pay for another round.
pub fn run_1d<O: QueryOracle + ?Sized>(oracle: &mut O, config: &Config1d) -> Result<Run1dReport, OracleError> {
    if oracle.dim() != 1 {
        return Err(OracleError::DimensionMismatch { expected: 1, got: oracle.dim() });
    }
    let policy = config.policy;
    let mut oracle = BudgetSlice::new(oracle, policy.horizon);
    let mut interval = config.interval;
    let mut epochs = Vec::new();

    for epoch in 1u32.. {
        let t_start = oracle.queries_made();
        let probes = [interval.x_l(), interval.x_c(), interval.x_r()];
        let mut ests = probes.map(|x| PointEstimate::new(DVector::from_element(1, x)));
        let mut rounds = Vec::new();
        let mut end = None;

        for round in 1u32.. {
            let gamma = 0.5f64.powi(round as i32);
            if gamma < config.gamma_floor {
                end = Some(EpochEnd1d::ResolutionFloor);
                break;
            }
            let cost: u64 = ests.iter().map(|e| e.cost(&policy, gamma)).sum();
            if cost > oracle.remaining().unwrap_or(u64::MAX) {
                end = Some(EpochEnd1d::BudgetStop);
                break;
            }
            let round_start = oracle.queries_made();
            for e in ests.iter_mut() {
                match e.refine(&mut oracle, &policy, gamma) {
                    Ok(()) => {}
                    Err(OracleError::BudgetExhausted { .. }) => {
                        end = Some(EpochEnd1d::BudgetStop);
                        break;
                    }
                    Err(err) => return Err(err),
                }
            }
            if end.is_some() {
                break;
            }
            let [l, c, r] = &ests;
            let case = classify_1d(l, c, r, gamma).expect("probes refined to one level");
            rounds.push(RoundRecord {
                round,
                gamma,
                t_start: round_start,
                t_end: oracle.queries_made(),
                means: [l.sum / l.n as f64, c.sum / c.n as f64, r.sum / r.n as f64],
                case,
            });
            if case != Case1d::Continue {
                end = Some(EpochEnd1d::Shrunk(case));
                break;
            }
        }

        let end = end.expect("round loop exits with an outcome");
        epochs.push(EpochOutcome1d {
            epoch,
            interval,
            end,
            final_round: rounds.len() as u32,
            t_start,
            t_end: oracle.queries_made(),
            rounds,
        });
        match end {
            EpochEnd1d::Shrunk(Case1d::Case1(side) | Case1d::Case2(side)) => interval = interval.shrink(side),
            _ => break,
        }
    }

    Ok(Run1dReport {
        epochs,
        final_interval: interval,
        recommendation: interval.x_c(),
        queries: oracle.queries_made(),
    })
}

/// Epoch-count bound `½ log_{4/3}(T / (8σ ln T))`; `None` when the log argument is at most 1.
pub fn epoch_bound_1d(horizon: f64, sigma: f64) -> Option<f64> {
    let arg = horizon / (8.0 * sigma * horizon.ln());
    (arg > 1.0).then(|| 0.5 * arg.ln() / (4.0f64 / 3.0).ln())
}
