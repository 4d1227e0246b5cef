//! Experiment configuration, seeded batch runs, trace files, closed-form
//! bounds, and the Monte-Carlo containment oracle.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit1d::{self, Config1d, EpochEnd1d, Interval1d, Run1dReport};
use crate::banditnd::{self, BanditNdError, ConfigNd, EpochEndNd, RunNdReport, Thresholds};
use crate::confint::{SamplingMode, SamplingPolicy};
use crate::geometry::Point;
use crate::oracle::{
    simplex_normals, BudgetSlice, Domain, LogGranularity, NoiseFamily, NoiseModel, NoisyOracle,
    Objective, OracleError, QueryOracle, QueryRecord, TestFunction,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bound undefined: T/(8σ ln T) = {0} must exceed 1")]
    UndefinedBound(f64),
    #[error("{0}")]
    CheckFailed(String),
    #[error("sampler produced no point")]
    DegenerateSampler,
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Nd(#[from] BanditNdError),
}

impl HarnessError {
    /// CLI exit code: 1 for configuration problems, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::UndefinedBound(_) => 1,
            HarnessError::Nd(BanditNdError::InvalidConstants(_)) => 1,
            HarnessError::Oracle(OracleError::InvalidFunction(_) | OracleError::InvalidNoise(_)) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "nd")]
    Nd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `c1 = 64`, `c2 = 1/32`, calibrated sampling.
    Theory,
    /// `c1 = 2`, `c2 = 1/2`, calibrated sampling.
    #[default]
    Practical,
    /// Theory constants with the sample count from the algorithm listing and no reuse.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    PerQuery,
    PerRound,
    PerEpoch,
}

impl From<Granularity> for LogGranularity {
    fn from(g: Granularity) -> Self {
        match g {
            Granularity::PerQuery => LogGranularity::PerQuery,
            Granularity::PerRound => LogGranularity::PerRound,
            Granularity::PerEpoch => LogGranularity::PerEpoch,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionSpec {
    #[serde(rename = "linear-1d")]
    Linear1d {
        slope: f64,
    },
    #[serde(rename = "absolute-value-1d")]
    AbsoluteValue1d {
        minimizer: f64,
        #[serde(default = "one")]
        slope: f64,
    },
    #[serde(rename = "quadratic-1d")]
    Quadratic1d {
        minimizer: f64,
        #[serde(default = "one")]
        curvature: f64,
    },
    QuadraticNd {
        minimizer: Vec<f64>,
        #[serde(default = "one")]
        curvature: f64,
    },
    SkewedQuadraticNd {
        minimizer: Vec<f64>,
        weights: Vec<f64>,
    },
    /// Explicit normals, or regular-simplex normals of norm `slope` when omitted.
    PiecewiseLinearNd {
        minimizer: Vec<f64>,
        #[serde(default)]
        normals: Option<Vec<Vec<f64>>>,
        #[serde(default = "one")]
        slope: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Interval { lo: f64, hi: f64 },
    Ball {
        #[serde(default)]
        center: Option<Vec<f64>>,
        radius: f64,
    },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub function: FunctionSpec,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub sigma: f64,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub logging: Option<Granularity>,
    #[serde(default)]
    pub doubling: bool,
    /// First horizon guess in doubling mode.
    #[serde(default, rename = "T0")]
    pub initial_horizon: Option<u64>,
    /// Override for the d-dimensional level floor.
    #[serde(default)]
    pub gamma_floor: Option<f64>,
}

fn default_d() -> usize {
    1
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

/// Horizon above which per-query logging is off unless asked for.
pub const PER_QUERY_LOG_LIMIT: u64 = 1_000_000;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.horizon < 2 {
            return bad(format!("T must be at least 2, got {}", self.horizon));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be finite and ≥ 0, got {}", self.sigma));
        }
        if self.d == 0 {
            return bad("d must be at least 1".into());
        }
        match (self.algorithm, self.d) {
            (Algorithm::OneD, 1) => {}
            (Algorithm::Nd, d) if d >= 2 => {}
            (a, d) => return bad(format!("algorithm {a:?} is incompatible with d = {d}")),
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if let Some(t0) = self.initial_horizon {
            if t0 < 2 || t0 > self.horizon {
                return bad(format!("T0 must lie in [2, T], got {t0}"));
            }
        }
        self.test_function()?;
        if self.algorithm == Algorithm::Nd {
            self.thresholds()?;
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, HarnessError> {
        let d = self.d;
        let vec = |v: &[f64]| -> Result<Point, HarnessError> {
            if v.len() != d {
                return Err(HarnessError::Config(format!("expected {d} coordinates, got {}", v.len())));
            }
            Ok(DVector::from_row_slice(v))
        };
        Ok(match &self.domain {
            None if d == 1 => Domain::unit_interval(),
            None => Domain::unit_ball(d),
            Some(DomainSpec::Interval { lo, hi }) if d == 1 && lo < hi => Domain::Interval { lo: *lo, hi: *hi },
            Some(DomainSpec::Interval { .. }) => {
                return Err(HarnessError::Config("interval domain needs d = 1 and lo < hi".into()))
            }
            Some(DomainSpec::Ball { center, radius }) if *radius > 0.0 => Domain::Ball {
                center: center.as_deref().map(vec).transpose()?.unwrap_or_else(|| DVector::zeros(d)),
                radius: *radius,
            },
            Some(DomainSpec::Box { lo, hi }) => {
                let (lo, hi) = (vec(lo)?, vec(hi)?);
                if (0..d).any(|i| lo[i] >= hi[i]) {
                    return Err(HarnessError::Config("box needs lo < hi in every coordinate".into()));
                }
                Domain::Box { lo, hi }
            }
            Some(_) => return Err(HarnessError::Config("ball radius must be positive".into())),
        })
    }

    pub fn test_function(&self) -> Result<TestFunction, HarnessError> {
        let domain = self.domain()?;
        let v = |x: &[f64]| DVector::from_row_slice(x);
        let objective = match &self.function {
            FunctionSpec::Linear1d { slope } => Objective::Linear1d { slope: *slope },
            FunctionSpec::AbsoluteValue1d { minimizer, slope } => {
                Objective::AbsoluteValue1d { minimizer: *minimizer, slope: *slope }
            }
            FunctionSpec::Quadratic1d { minimizer, curvature } => {
                Objective::Quadratic1d { minimizer: *minimizer, curvature: *curvature }
            }
            FunctionSpec::QuadraticNd { minimizer, curvature } => {
                Objective::QuadraticNd { minimizer: v(minimizer), curvature: *curvature }
            }
            FunctionSpec::SkewedQuadraticNd { minimizer, weights } => {
                Objective::SkewedQuadraticNd { minimizer: v(minimizer), weights: v(weights) }
            }
            FunctionSpec::PiecewiseLinearNd { minimizer, normals, slope } => {
                let normals = match normals {
                    Some(ns) => ns.iter().map(|n| v(n)).collect(),
                    None if *slope > 0.0 => simplex_normals(minimizer.len().max(1), *slope),
                    None => return Err(HarnessError::Config("slope must be positive".into())),
                };
                Objective::PiecewiseLinearNd { minimizer: v(minimizer), normals }
            }
        };
        TestFunction::new(objective, domain).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        match self.mode {
            Mode::PaperLiteral => SamplingMode::PaperLiteral,
            _ => SamplingMode::Calibrated,
        }
    }

    pub fn thresholds(&self) -> Result<Thresholds, HarnessError> {
        let (c1, c2) = match self.mode {
            Mode::Practical => (2.0, 0.5),
            Mode::Theory | Mode::PaperLiteral => (64.0, 1.0 / 32.0),
        };
        let (c1, c2) = (self.c1.unwrap_or(c1), self.c2.unwrap_or(c2));
        if self.mode != Mode::Practical && (c1 < 64.0 || c2 > 1.0 / 32.0) {
            return Err(HarnessError::Config(format!(
                "{:?} mode needs c1 ≥ 64 and c2 ≤ 1/32, got c1 = {c1}, c2 = {c2}",
                self.mode
            )));
        }
        Thresholds::new(self.d, c1, c2).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn granularity(&self) -> Granularity {
        self.logging.unwrap_or(if self.horizon > PER_QUERY_LOG_LIMIT {
            Granularity::PerRound
        } else {
            Granularity::PerQuery
        })
    }
}

/// A structured event from a run: one per epoch, plus one per round when
/// logging at round granularity or finer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: String,
    /// Restart index in doubling mode, 0 otherwise.
    pub restart: u32,
    pub epoch: u32,
    pub round: Option<u32>,
    pub t_start: u64,
    pub t_end: u64,
    pub gamma: Option<f64>,
    pub outcome: String,
    pub regret_end: Option<f64>,
    pub volume_ratio: Option<f64>,
    pub alpha: Option<f64>,
    pub fallback: Option<String>,
    pub pyramids: Option<u32>,
}

/// Everything recorded for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub dim: usize,
    /// Per-query records; empty unless logging per query.
    pub records: Vec<QueryRecord>,
    pub events: Vec<TraceEvent>,
    pub queries: u64,
    pub regret: f64,
    pub epochs: usize,
    pub recommendation: Vec<f64>,
    /// `f(recommendation) − f(x*)`.
    pub recommendation_gap: f64,
    /// `f(mean query) − f(x*)`.
    pub mean_query_gap: f64,
    pub clamped_queries: u64,
}

fn end_1d(e: EpochEnd1d) -> String {
    match e {
        EpochEnd1d::Shrunk(c) => format!("{c:?}"),
        other => format!("{other:?}"),
    }
}

fn events_1d(report: &Run1dReport, restart: u32, per_round: bool) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    for e in &report.epochs {
        if per_round {
            for r in &e.rounds {
                out.push(TraceEvent {
                    kind: "round".into(),
                    restart,
                    epoch: e.epoch,
                    round: Some(r.round),
                    t_start: r.t_start,
                    t_end: r.t_end,
                    gamma: Some(r.gamma),
                    outcome: format!("{:?}", r.case),
                    regret_end: None,
                    volume_ratio: None,
                    alpha: None,
                    fallback: None,
                    pyramids: None,
                });
            }
        }
        out.push(TraceEvent {
            kind: "epoch".into(),
            restart,
            epoch: e.epoch,
            round: Some(e.final_round),
            t_start: e.t_start,
            t_end: e.t_end,
            gamma: Some(e.final_gamma()),
            outcome: end_1d(e.end),
            regret_end: None,
            volume_ratio: Some(0.75),
            alpha: None,
            fallback: None,
            pyramids: None,
        });
    }
    out
}

fn events_nd(report: &RunNdReport, restart: u32, per_round: bool) -> Vec<TraceEvent> {
    let mut out = Vec::new();
    for e in &report.epochs {
        if per_round {
            for r in &e.rounds {
                out.push(TraceEvent {
                    kind: "round".into(),
                    restart,
                    epoch: e.epoch,
                    round: Some(r.round),
                    t_start: r.t_start,
                    t_end: r.t_end,
                    gamma: Some(r.gamma),
                    outcome: String::new(),
                    regret_end: None,
                    volume_ratio: None,
                    alpha: None,
                    fallback: None,
                    pyramids: Some(r.pyramids),
                });
            }
        }
        let cut = e.cut.as_ref();
        out.push(TraceEvent {
            kind: "epoch".into(),
            restart,
            epoch: e.epoch,
            round: e.rounds.last().map(|r| r.round),
            t_start: e.t_start,
            t_end: e.t_end,
            gamma: cut.map(|c| c.gamma_hat),
            outcome: match (&e.end, cut) {
                (EpochEndNd::Cut, Some(c)) => format!("{:?}", c.case),
                (end, _) => format!("{end:?}"),
            },
            regret_end: None,
            volume_ratio: cut.map(|c| c.volume_ratio),
            alpha: cut.map(|c| c.alpha),
            fallback: cut.and_then(|c| c.fallback.as_ref().map(|f| f.to_string())),
            pyramids: e.rounds.iter().map(|r| r.pyramids).max(),
        });
    }
    out
}

/// Result of one algorithm invocation on a (possibly sliced) oracle.
struct Segment {
    events: Vec<TraceEvent>,
    epochs: usize,
    recommendation: Point,
    clamped: u64,
}

fn run_segment(
    config: &ExperimentConfig,
    oracle: &mut NoisyOracle,
    horizon: u64,
    limit: Option<u64>,
    restart: u32,
) -> Result<Segment, HarnessError> {
    let policy = SamplingPolicy::new(config.sampling_mode(), config.sigma, horizon);
    let per_round = config.granularity() != Granularity::PerEpoch;
    let start = oracle.queries_made();
    let shift = |mut events: Vec<TraceEvent>| {
        for e in events.iter_mut() {
            e.t_start += start;
            e.t_end += start;
        }
        events
    };
    match config.algorithm {
        Algorithm::OneD => {
            let mut cfg = Config1d::new(policy);
            if let Domain::Interval { lo, hi } = oracle.function().domain() {
                cfg.interval = Interval1d::new(*lo, *hi);
            }
            let report = {
                let mut slice = BudgetSlice::new(&mut *oracle, limit.unwrap_or(u64::MAX));
                bandit1d::run_1d(&mut slice, &cfg)?
            };
            let mut events = shift(events_1d(&report, restart, per_round));
            for e in events.iter_mut() {
                e.regret_end = oracle.ledger().regret_at(e.t_end);
            }
            Ok(Segment {
                events,
                epochs: report.completed_epochs(),
                recommendation: DVector::from_element(1, report.recommendation),
                clamped: 0,
            })
        }
        Algorithm::Nd => {
            let mut cfg = ConfigNd::new(config.thresholds()?, policy);
            if let Some(floor) = config.gamma_floor {
                cfg.gamma_floor = floor;
            }
            let domain = oracle.function().domain().clone();
            let report = {
                let mut slice = BudgetSlice::new(&mut *oracle, limit.unwrap_or(u64::MAX));
                banditnd::run_nd(&mut slice, &domain, &cfg)?
            };
            let mut events = shift(events_nd(&report, restart, per_round));
            for e in events.iter_mut() {
                e.regret_end = oracle.ledger().regret_at(e.t_end);
            }
            Ok(Segment {
                events,
                epochs: report.cuts().count(),
                recommendation: report.recommendation,
                clamped: report.clamped_queries,
            })
        }
    }
}

/// Runs one seed: a single run, or doubling restarts when `config.doubling`.
pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<RunTrace, HarnessError> {
    let function = config.test_function()?;
    let family = match config.noise {
        NoiseKind::Gaussian => NoiseFamily::Gaussian,
        NoiseKind::Uniform => NoiseFamily::Uniform,
    };
    let noise = NoiseModel::new(config.sigma, family, seed)?;
    let mut oracle = NoisyOracle::new(function, noise, Some(config.horizon), Some(config.granularity().into()));

    let mut events = Vec::new();
    let mut epochs = 0;
    let mut clamped = 0;
    let mut recommendation;
    if config.doubling {
        let mut guess = config.initial_horizon.unwrap_or(config.horizon).max(2);
        let mut restart = 0;
        loop {
            let before = oracle.queries_made();
            let left = config.horizon - before;
            let seg = run_segment(config, &mut oracle, guess, Some(left), restart)?;
            events.extend(seg.events);
            epochs += seg.epochs;
            clamped += seg.clamped;
            recommendation = seg.recommendation;
            let used = oracle.queries_made() - before;
            if oracle.queries_made() >= config.horizon || used == 0 || guess >= config.horizon {
                break;
            }
            guess = guess.saturating_mul(2);
            restart += 1;
        }
    } else {
        let seg = run_segment(config, &mut oracle, config.horizon, None, 0)?;
        events = seg.events;
        epochs = seg.epochs;
        clamped = seg.clamped;
        recommendation = seg.recommendation;
    }

    let function = oracle.function().clone();
    let ledger = oracle.into_ledger();
    let gap = |x: &Point| function.value_raw(x);
    let mean_query_gap = ledger.mean_query().map_or(0.0, |m| gap(&m));
    Ok(RunTrace {
        seed,
        dim: function.dim(),
        recommendation_gap: gap(&recommendation),
        recommendation: recommendation.iter().copied().collect(),
        mean_query_gap,
        queries: ledger.total_queries(),
        regret: ledger.cumulative_regret(),
        epochs,
        events,
        clamped_queries: clamped,
        records: ledger.into_log().unwrap_or_default(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub regret: f64,
    pub queries: u64,
    pub epochs: usize,
    pub recommendation: Vec<f64>,
    pub recommendation_gap: f64,
    pub mean_query_gap: f64,
    pub clamped_queries: u64,
    pub bound_ratio: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedSummary>,
    pub regret_bound: Option<f64>,
    pub epoch_bound: Option<f64>,
}

/// Unknown-horizon mode: restarts with `T0, 2T0, 4T0, …` on one shared
/// ledger until `T` queries are spent.
pub fn doubling_wrapper(config: &ExperimentConfig) -> Result<(Summary, Vec<RunTrace>), HarnessError> {
    let mut config = config.clone();
    config.doubling = true;
    run_experiment(&config)
}

/// Runs every seed in parallel, then writes traces and the summary in seed order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(Summary, Vec<RunTrace>), HarnessError> {
    config.validate()?;
    let results: Vec<Result<(RunTrace, f64), HarnessError>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let start = Instant::now();
            let trace = run_seed(config, seed)?;
            Ok((trace, start.elapsed().as_secs_f64()))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let t = config.horizon as f64;
    let (regret_bound, epoch_bound) = match config.algorithm {
        Algorithm::OneD => (
            theoretical_bound_1d(t, config.sigma).ok(),
            bandit1d::epoch_bound_1d(t, config.sigma),
        ),
        Algorithm::Nd => {
            let th = config.thresholds()?;
            (Some(theoretical_bound_nd(t, config.sigma, &th)), Some(banditnd::epoch_bound_nd(th.d, t)))
        }
    };
    let seeds = results
        .iter()
        .map(|(tr, wall)| SeedSummary {
            seed: tr.seed,
            regret: tr.regret,
            queries: tr.queries,
            epochs: tr.epochs,
            recommendation: tr.recommendation.clone(),
            recommendation_gap: tr.recommendation_gap,
            mean_query_gap: tr.mean_query_gap,
            clamped_queries: tr.clamped_queries,
            bound_ratio: regret_bound.map(|b| tr.regret / b),
            wall_seconds: *wall,
        })
        .collect();
    let summary = Summary { config: config.clone(), seeds, regret_bound, epoch_bound };
    let traces: Vec<RunTrace> = results.into_iter().map(|(t, _)| t).collect();

    if let Some(dir) = &config.out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for tr in &traces {
            if !tr.records.is_empty() {
                write_trace_csv(&dir.join(format!("trace_seed{}.csv", tr.seed)), tr.dim, &tr.records)?;
            }
            let path = dir.join(format!("events_seed{}.json", tr.seed));
            fs::write(&path, serde_json::to_string_pretty(&tr.events)?).map_err(io_err(&path))?;
        }
        let path = dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(io_err(&path))?;
    }
    Ok((summary, traces))
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `t,x_1..x_d,f,y,regret` with 17 significant digits.
pub fn write_trace_csv(path: &Path, dim: usize, records: &[QueryRecord]) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|i| format!("x_{i}")));
    header.extend(["f", "y", "regret"].map(String::from));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(dim + 4);
    for r in records {
        row.clear();
        row.push(r.t.to_string());
        row.extend(r.x.iter().map(|&v| fmt_float(v)));
        row.extend([fmt_float(r.f), fmt_float(r.y), fmt_float(r.regret)]);
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::Io { path: path.to_path_buf(), source: e.into_error() })?
        .flush()
        .map_err(io_err(path))?;
    Ok(())
}

/// Parses a file written by [`write_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<QueryRecord>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    let dim = r.headers()?.len().checked_sub(4).ok_or_else(|| HarnessError::Config("short header".into()))?;
    let parse = |s: &str| -> Result<f64, HarnessError> {
        s.parse().map_err(|_| HarnessError::Config(format!("bad number {s:?}")))
    };
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let t = rec[0].parse().map_err(|_| HarnessError::Config(format!("bad index {:?}", &rec[0])))?;
        let x = (1..=dim).map(|i| parse(&rec[i])).collect::<Result<Vec<_>, _>>()?;
        out.push(QueryRecord {
            t,
            x: DVector::from_vec(x),
            f: parse(&rec[dim + 1])?,
            y: parse(&rec[dim + 2])?,
            regret: parse(&rec[dim + 3])?,
        });
    }
    Ok(out)
}

/// `108 √(σ T ln T) · log_{4/3}(T / (8σ ln T))`.
pub fn theoretical_bound_1d(horizon: f64, sigma: f64) -> Result<f64, HarnessError> {
    let ln_t = horizon.ln();
    let arg = horizon / (8.0 * sigma * ln_t);
    if !(arg > 1.0) || !arg.is_finite() {
        return Err(HarnessError::UndefinedBound(arg));
    }
    Ok(108.0 * (sigma * horizon * ln_t).sqrt() * arg.ln() / (4.0f64 / 3.0).ln())
}

/// The d-dimensional regret bound as assembled from the per-epoch bound and
/// the epoch count.
pub fn theoretical_bound_nd(horizon: f64, sigma: f64, th: &Thresholds) -> f64 {
    let d = th.d as f64;
    let (c1, c2) = (th.c1, th.c2);
    let ln_t = horizon.ln();
    let ln_inv_rho = -banditnd::rho(th.d).ln();
    96.0 * d * d * sigma * horizon.sqrt() * ln_t * ln_t / ln_inv_rho
        * (2.0 * d * d * d.ln() / (c2 * c2) + 1.0)
        * (4.0 * d.powi(7) * c1 / c2.powi(3) + d * (d + 2.0) / c2)
        * (12.0 * c1 * d.powi(4) / (c2 * c2) + 11.0)
}

/// Draws `n` points from `sampler` and counts those rejected by `container`.
pub fn mc_containment<R, S, C>(rng: &mut R, mut sampler: S, container: C, n: u64) -> Result<u64, HarnessError>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Option<Point>,
    C: Fn(&Point) -> bool,
{
    let mut violations = 0;
    for _ in 0..n {
        let p = sampler(rng).ok_or(HarnessError::DegenerateSampler)?;
        if !container(&p) {
            violations += 1;
        }
    }
    Ok(violations)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryCheck {
    pub d: usize,
    pub trials: usize,
    pub cap_samples: u64,
    pub cap_violations: u64,
    pub max_offset_over_radius: f64,
    pub offset_limit: f64,
    pub cut_samples: u64,
    pub cut_violations: u64,
    pub max_volume_ratio: f64,
    pub volume_ratio_limit: f64,
}

impl GeometryCheck {
    pub fn passed(&self) -> bool {
        self.cap_violations == 0
            && self.cut_violations == 0
            && self.max_offset_over_radius <= self.offset_limit
            && self.max_volume_ratio <= self.volume_ratio_limit
    }
}

/// Random theory-constant pyramids: checks that each cap lies in its cone and
/// that the resulting cut removes enough volume while keeping the rest.
pub fn verify_geometry(d: usize, trials: usize, samples: u64, seed: u64) -> Result<GeometryCheck, HarnessError> {
    use crate::geometry::{build_pyramid, cap_halfspace_for_cone, cone_of, sampling, shallow_cut_update, Ellipsoid};
    use rand::SeedableRng;

    let th = Thresholds::theory(d)?;
    let r = th.inner_radius();
    let cos_phi = th.c2 / d as f64;
    let sin_phi = (1.0 - cos_phi * cos_phi).sqrt();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let ball = Ellipsoid::ball(DVector::zeros(d), 1.0).map_err(BanditNdError::from)?;
    let mut check = GeometryCheck {
        d,
        trials,
        cap_samples: 0,
        cap_violations: 0,
        max_offset_over_radius: f64::NEG_INFINITY,
        offset_limit: 1.0 / (4.0 * (d as f64 + 1.0)),
        cut_samples: 0,
        cut_violations: 0,
        max_volume_ratio: 0.0,
        volume_ratio_limit: banditnd::rho(d),
    };
    for trial in 0..trials {
        // The k-th pyramid of a chain has its apex at distance r sin^k φ.
        let dir = sampling::unit_sphere(&mut rng, d);
        let k = rng.random_range(0..=th.pyramid_bound().floor() as i32);
        let dist = r * sin_phi.powi(k);
        let mut p = build_pyramid(&(dir * dist), &DVector::zeros(d), th.c2).map_err(BanditNdError::from)?;
        if trial % 2 == 1 {
            p = banditnd::hat_raising(&p);
        }
        let cone = cone_of(&p).map_err(BanditNdError::from)?;
        let cap = cap_halfspace_for_cone(&cone, &ball).map_err(BanditNdError::from)?;
        check.max_offset_over_radius = check.max_offset_over_radius.max(cap.offset);
        let mut in_cap = |rng: &mut rand_chacha::ChaCha8Rng| sampling::in_cap(rng, &cap, 1_000_000);
        check.cap_violations += mc_containment(&mut rng, &mut in_cap, |x| cone.contains(x), samples)?;
        check.cap_samples += samples;

        let out = shallow_cut_update(&ball, &cap.normal, cap.alpha).map_err(BanditNdError::from)?;
        check.max_volume_ratio = check.max_volume_ratio.max(out.volume() / ball.volume());
        let kept = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let x = sampling::unit_ball(rng, d);
            if !cap.contains(&x) {
                return Some(x);
            }
        };
        check.cut_violations += mc_containment(&mut rng, kept, |x| out.gauge(x) <= 1.0 + 1e-10, samples / 10)?;
        check.cut_samples += samples / 10;
    }
    Ok(check)
}
