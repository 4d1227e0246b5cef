//! Test objectives, subgaussian noise, and the ground-truth regret ledger.
//!
//! Algorithms only ever see a [`QueryOracle`]: a handle that answers noisy
//! queries and reports how much budget is left. The minimizer and true values
//! stay inside [`NoisyOracle`] and its [`RegretLedger`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geometry::{self, nnls, Ellipsoid, GeometryError, Point};

/// Slack allowed when deciding whether a query point lies in the domain.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("query point lies outside the domain (excess {excess:e})")]
    DomainViolation { excess: f64 },
    #[error("query budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid test function: {0}")]
    InvalidFunction(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
}

/// Feasible region of a test function.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
}

impl Domain {
    pub fn unit_interval() -> Self {
        Domain::Interval { lo: 0.0, hi: 1.0 }
    }

    pub fn unit_ball(d: usize) -> Self {
        Domain::Ball { center: DVector::zeros(d), radius: 1.0 }
    }

    pub fn cube(d: usize, half_width: f64) -> Self {
        Domain::Box {
            lo: DVector::from_element(d, -half_width),
            hi: DVector::from_element(d, half_width),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Ball { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// How far `x` sits outside the domain (0 inside).
    pub fn excess(&self, x: &Point) -> f64 {
        match self {
            Domain::Interval { lo, hi } => (lo - x[0]).max(x[0] - hi).max(0.0),
            Domain::Ball { center, radius } => ((x - center).norm() - radius).max(0.0),
            Domain::Box { lo, hi } => (0..lo.len())
                .map(|i| (lo[i] - x[i]).max(x[i] - hi[i]).max(0.0))
                .fold(0.0, f64::max),
        }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.len() == self.dim() && self.excess(x) <= DOMAIN_TOLERANCE
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, x: &Point) -> Point {
        match self {
            Domain::Interval { lo, hi } => DVector::from_element(1, x[0].clamp(*lo, *hi)),
            Domain::Ball { center, radius } => {
                let diff = x - center;
                let n = diff.norm();
                if n <= *radius {
                    x.clone()
                } else {
                    center + diff * (radius / n)
                }
            }
            Domain::Box { lo, hi } => DVector::from_fn(lo.len(), |i, _| x[i].clamp(lo[i], hi[i])),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Ball { radius, .. } => 2.0 * radius,
            Domain::Box { lo, hi } => (hi - lo).norm(),
        }
    }

    /// Minimum-volume ellipsoid containing the domain.
    ///
    /// For a box this is the ellipsoid with semi-axes `√d · (hi − lo)/2`.
    pub fn enclosing_ellipsoid(&self) -> Result<Ellipsoid, GeometryError> {
        match self {
            Domain::Interval { lo, hi } => {
                let half = (hi - lo) / 2.0;
                Ellipsoid::ball(DVector::from_element(1, lo + half), half)
            }
            Domain::Ball { center, radius } => Ellipsoid::ball(center.clone(), *radius),
            Domain::Box { lo, hi } => {
                let d = lo.len() as f64;
                let half = (hi - lo) / 2.0;
                let diag = half.map(|h| h * h * d);
                Ellipsoid::new((lo + hi) / 2.0, DMatrix::from_diagonal(&diag))
            }
        }
    }
}

/// Shape of a test objective. Every variant satisfies `f(x*) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `slope · (x − x*)` with `x*` at the end of the interval the slope points away from.
    Linear1d { slope: f64 },
    /// `slope · |x − m|`.
    AbsoluteValue1d { minimizer: f64, slope: f64 },
    /// `curvature · (x − m)²`.
    Quadratic1d { minimizer: f64, curvature: f64 },
    /// `curvature/2 · ‖x − m‖²`.
    QuadraticNd { minimizer: Point, curvature: f64 },
    /// `½ Σ wᵢ (xᵢ − mᵢ)²`.
    SkewedQuadraticNd { minimizer: Point, weights: Point },
    /// `maxᵢ ⟨aᵢ, x − m⟩`; requires `0 ∈ conv{aᵢ}`.
    PiecewiseLinearNd { minimizer: Point, normals: Vec<Point> },
}

/// A convex objective on its domain, with known minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    objective: Objective,
    domain: Domain,
    minimizer: Point,
}

impl TestFunction {
    pub fn new(objective: Objective, domain: Domain) -> Result<Self, OracleError> {
        let d = domain.dim();
        let invalid = |msg: &str| Err(OracleError::InvalidFunction(msg.to_string()));
        let minimizer = match &objective {
            Objective::Linear1d { slope } => {
                if d != 1 {
                    return invalid("linear-1d needs a one-dimensional domain");
                }
                let Domain::Interval { lo, hi } = domain else { unreachable!() };
                DVector::from_element(1, if *slope >= 0.0 { lo } else { hi })
            }
            Objective::AbsoluteValue1d { minimizer, slope } => {
                if d != 1 || *slope < 0.0 {
                    return invalid("absolute-value-1d needs d = 1 and slope ≥ 0");
                }
                DVector::from_element(1, *minimizer)
            }
            Objective::Quadratic1d { minimizer, curvature } => {
                if d != 1 || *curvature < 0.0 {
                    return invalid("quadratic-1d needs d = 1 and curvature ≥ 0");
                }
                DVector::from_element(1, *minimizer)
            }
            Objective::QuadraticNd { minimizer, curvature } => {
                if *curvature < 0.0 {
                    return invalid("curvature must be non-negative");
                }
                minimizer.clone()
            }
            Objective::SkewedQuadraticNd { minimizer, weights } => {
                if weights.len() != minimizer.len() || weights.iter().any(|&w| w < 0.0) {
                    return invalid("weights must be non-negative, one per coordinate");
                }
                minimizer.clone()
            }
            Objective::PiecewiseLinearNd { minimizer, normals } => {
                if normals.is_empty() || normals.iter().any(|a| a.len() != minimizer.len()) {
                    return invalid("normals must be non-empty and match the dimension");
                }
                if !origin_in_hull(normals) {
                    return invalid("0 must lie in the convex hull of the normals");
                }
                minimizer.clone()
            }
        };
        if minimizer.len() != d {
            return Err(OracleError::DimensionMismatch { expected: d, got: minimizer.len() });
        }
        if !domain.contains(&minimizer) {
            return invalid("minimizer outside the domain");
        }
        Ok(Self { objective, domain, minimizer })
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn minimizer(&self) -> &Point {
        &self.minimizer
    }

    /// `f(x)` without any domain check. Every objective is defined on all of `R^d`.
    pub fn value_raw(&self, x: &Point) -> f64 {
        let m = &self.minimizer;
        match &self.objective {
            Objective::Linear1d { slope } => slope * (x[0] - m[0]),
            Objective::AbsoluteValue1d { slope, .. } => slope * (x[0] - m[0]).abs(),
            Objective::Quadratic1d { curvature, .. } => curvature * (x[0] - m[0]).powi(2),
            Objective::QuadraticNd { curvature, .. } => 0.5 * curvature * (x - m).norm_squared(),
            Objective::SkewedQuadraticNd { weights, .. } => {
                0.5 * (x - m).iter().zip(weights.iter()).map(|(v, w)| w * v * v).sum::<f64>()
            }
            Objective::PiecewiseLinearNd { normals, .. } => {
                let diff = x - m;
                normals.iter().map(|a| a.dot(&diff)).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Exact `f(x)` for `x` in the domain.
    pub fn true_value(&self, x: &Point) -> Result<f64, OracleError> {
        if x.len() != self.dim() {
            return Err(OracleError::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let excess = self.domain.excess(x);
        if excess > DOMAIN_TOLERANCE {
            return Err(OracleError::DomainViolation { excess });
        }
        Ok(self.value_raw(x))
    }

    /// Upper bound on the Lipschitz constant over the domain.
    pub fn lipschitz_bound(&self) -> f64 {
        let m = &self.minimizer;
        // Largest distance from the minimizer to a domain point.
        let reach = match &self.domain {
            Domain::Interval { lo, hi } => (m[0] - lo).max(hi - m[0]),
            Domain::Ball { center, radius } => (m - center).norm() + radius,
            Domain::Box { lo, hi } => DVector::from_fn(m.len(), |i, _| (m[i] - lo[i]).max(hi[i] - m[i])).norm(),
        };
        match &self.objective {
            Objective::Linear1d { slope } => slope.abs(),
            Objective::AbsoluteValue1d { slope, .. } => *slope,
            Objective::Quadratic1d { curvature, .. } => 2.0 * curvature * reach,
            Objective::QuadraticNd { curvature, .. } => curvature * reach,
            Objective::SkewedQuadraticNd { weights, .. } => weights.max() * reach,
            Objective::PiecewiseLinearNd { normals, .. } => {
                normals.iter().map(|a| a.norm()).fold(0.0, f64::max)
            }
        }
    }
}

fn origin_in_hull(normals: &[Point]) -> bool {
    let d = normals[0].len();
    let k = normals.len();
    let mut a = DMatrix::zeros(d + 1, k);
    for (j, n) in normals.iter().enumerate() {
        a.view_mut((0, j), (d, 1)).copy_from(n);
        a[(d, j)] = 1.0;
    }
    let mut b = DVector::zeros(d + 1);
    b[d] = 1.0;
    nnls(&a, &b).residual <= 1e-9
}

/// Normals of a piecewise-linear objective whose pieces point along the
/// vertices of a regular simplex, scaled to norm `slope`.
pub fn simplex_normals(d: usize, slope: f64) -> Vec<Point> {
    geometry::regular_simplex(&DVector::zeros(d), slope, d).expect("d ≥ 1 and slope > 0")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseFamily {
    #[default]
    Gaussian,
    /// Uniform on `[−σ√3, σ√3]`, which has standard deviation σ.
    Uniform,
}

/// Additive noise `ε` with standard deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub family: NoiseFamily,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, family: NoiseFamily, seed: u64) -> Result<Self, OracleError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(OracleError::InvalidNoise(format!("sigma must be finite and ≥ 0, got {sigma}")));
        }
        Ok(Self { sigma, family, seed })
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Self {
        Self { sigma, family: NoiseFamily::Gaussian, seed }
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, family: NoiseFamily::Gaussian, seed: 0 }
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn sampler(&self) -> NoiseSampler {
        NoiseSampler { model: *self, rng: ChaCha8Rng::seed_from_u64(self.seed) }
    }
}

/// Seeded stream of noise draws.
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    model: NoiseModel,
    rng: ChaCha8Rng,
}

impl NoiseSampler {
    pub fn draw(&mut self) -> f64 {
        let sigma = self.model.sigma;
        if sigma == 0.0 {
            return 0.0;
        }
        match self.model.family {
            NoiseFamily::Gaussian => {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                sigma * z
            }
            NoiseFamily::Uniform => {
                let half = sigma * 3f64.sqrt();
                self.rng.random_range(-half..=half)
            }
        }
    }
}

/// One logged oracle query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub t: u64,
    pub x: Point,
    pub f: f64,
    pub y: f64,
    pub regret: f64,
}

/// Whether individual queries are kept in the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogGranularity {
    #[default]
    PerQuery,
    PerRound,
    PerEpoch,
}

/// Ground-truth accounting of `Σ (f(x_t) − f(x*))`.
///
/// With per-query logging every query is kept. Coarser granularities keep
/// only the cumulative regret after each query, which is enough to annotate
/// round and epoch boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    total_queries: u64,
    cumulative_regret: f64,
    x_sum: Point,
    granularity: Option<LogGranularity>,
    log: Vec<QueryRecord>,
    curve: Vec<f64>,
}

impl RegretLedger {
    pub fn new(d: usize, granularity: Option<LogGranularity>) -> Self {
        Self {
            total_queries: 0,
            cumulative_regret: 0.0,
            x_sum: DVector::zeros(d),
            granularity,
            log: Vec::new(),
            curve: Vec::new(),
        }
    }

    /// Charges one query. Round-off can make `f` a hair negative near the
    /// minimizer; the increment is clamped at zero.
    pub fn charge(&mut self, x: &Point, f: f64, y: f64) {
        self.total_queries += 1;
        self.cumulative_regret += f.max(0.0);
        self.x_sum += x;
        match self.granularity {
            Some(LogGranularity::PerQuery) => self.log.push(QueryRecord {
                t: self.total_queries,
                x: x.clone(),
                f,
                y,
                regret: self.cumulative_regret,
            }),
            Some(_) => self.curve.push(self.cumulative_regret),
            None => {}
        }
    }

    pub fn total_queries(&self) -> u64 {
        self.total_queries
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    pub fn granularity(&self) -> Option<LogGranularity> {
        self.granularity
    }

    /// Per-query records, when logging per query.
    pub fn log(&self) -> Option<&[QueryRecord]> {
        (self.granularity == Some(LogGranularity::PerQuery)).then_some(self.log.as_slice())
    }

    pub fn into_log(self) -> Option<Vec<QueryRecord>> {
        (self.granularity == Some(LogGranularity::PerQuery)).then_some(self.log)
    }

    /// Cumulative regret after the first `t` queries, if logging was on.
    pub fn regret_at(&self, t: u64) -> Option<f64> {
        if t == 0 {
            return Some(0.0);
        }
        let i = usize::try_from(t - 1).ok()?;
        match self.granularity? {
            LogGranularity::PerQuery => self.log.get(i).map(|r| r.regret),
            _ => self.curve.get(i).copied(),
        }
    }

    /// Average of all queried points, `None` before the first query.
    pub fn mean_query(&self) -> Option<Point> {
        (self.total_queries > 0).then(|| &self.x_sum / self.total_queries as f64)
    }
}

/// Query-only access to a noisy objective.
pub trait QueryOracle {
    fn dim(&self) -> usize;

    /// Returns `f(x) + ε`.
    fn query(&mut self, x: &Point) -> Result<f64, OracleError>;

    fn queries_made(&self) -> u64;

    /// Queries left before the budget error, `None` if unbounded.
    fn remaining(&self) -> Option<u64>;
}

/// A test function, a noise stream, an optional budget, and the ledger.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    function: TestFunction,
    noise: NoiseSampler,
    budget: Option<u64>,
    ledger: RegretLedger,
}

impl NoisyOracle {
    pub fn new(
        function: TestFunction,
        noise: NoiseModel,
        budget: Option<u64>,
        logging: Option<LogGranularity>,
    ) -> Self {
        let ledger = RegretLedger::new(function.dim(), logging);
        Self { function, noise: noise.sampler(), budget, ledger }
    }

    /// Noisy evaluation; charges the ledger.
    pub fn evaluate(&mut self, x: &Point) -> Result<f64, OracleError> {
        if let Some(budget) = self.budget {
            if self.ledger.total_queries() >= budget {
                return Err(OracleError::BudgetExhausted { budget });
            }
        }
        let f = self.function.true_value(x)?;
        let y = f + self.noise.draw();
        self.ledger.charge(x, f, y);
        Ok(y)
    }

    pub fn ledger(&self) -> &RegretLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> RegretLedger {
        self.ledger
    }

    pub fn function(&self) -> &TestFunction {
        &self.function
    }
}

impl QueryOracle for NoisyOracle {
    fn dim(&self) -> usize {
        self.function.dim()
    }

    fn query(&mut self, x: &Point) -> Result<f64, OracleError> {
        self.evaluate(x)
    }

    fn queries_made(&self) -> u64 {
        self.ledger.total_queries()
    }

    fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.ledger.total_queries()))
    }
}

/// A window of at most `limit` queries on another oracle.
pub struct BudgetSlice<'a, O: QueryOracle + ?Sized> {
    inner: &'a mut O,
    limit: u64,
    used: u64,
}

impl<'a, O: QueryOracle + ?Sized> BudgetSlice<'a, O> {
    pub fn new(inner: &'a mut O, limit: u64) -> Self {
        Self { inner, limit, used: 0 }
    }
}

impl<O: QueryOracle + ?Sized> QueryOracle for BudgetSlice<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn query(&mut self, x: &Point) -> Result<f64, OracleError> {
        if self.used >= self.limit {
            return Err(OracleError::BudgetExhausted { budget: self.limit });
        }
        let y = self.inner.query(x)?;
        self.used += 1;
        Ok(y)
    }

    fn queries_made(&self) -> u64 {
        self.used
    }

    fn remaining(&self) -> Option<u64> {
        let own = self.limit - self.used;
        Some(self.inner.remaining().map_or(own, |r| r.min(own)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(xs: &[f64]) -> Point {
        DVector::from_row_slice(xs)
    }

    fn quad_03() -> TestFunction {
        TestFunction::new(
            Objective::Quadratic1d { minimizer: 0.3, curvature: 1.0 },
            Domain::unit_interval(),
        )
        .unwrap()
    }

    #[test]
    fn noiseless_evaluations() {
        let abs = TestFunction::new(
            Objective::AbsoluteValue1d { minimizer: 0.5, slope: 1.0 },
            Domain::unit_interval(),
        )
        .unwrap();
        let mut o = NoisyOracle::new(abs, NoiseModel::noiseless(), None, Some(LogGranularity::PerQuery));
        assert_eq!(o.evaluate(&p(&[0.5])).unwrap(), 0.0);

        let mut o = NoisyOracle::new(quad_03(), NoiseModel::noiseless(), None, Some(LogGranularity::PerQuery));
        assert!((o.evaluate(&p(&[0.8])).unwrap() - 0.25).abs() < 1e-15);
        assert!((o.ledger().cumulative_regret() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn true_values() {
        let abs = TestFunction::new(
            Objective::AbsoluteValue1d { minimizer: 0.25, slope: 1.0 },
            Domain::unit_interval(),
        )
        .unwrap();
        assert_eq!(abs.true_value(&p(&[0.75])).unwrap(), 0.5);
        let q = TestFunction::new(
            Objective::QuadraticNd { minimizer: p(&[0.0, 0.0]), curvature: 1.0 },
            Domain::unit_ball(2),
        )
        .unwrap();
        assert!((q.true_value(&p(&[0.6, 0.8])).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn piecewise_linear_is_max_of_pieces() {
        let normals = vec![p(&[1.0, 0.0]), p(&[-1.0, 0.5]), p(&[0.0, -1.0])];
        let m = p(&[0.1, 0.2]);
        let f = TestFunction::new(
            Objective::PiecewiseLinearNd { minimizer: m.clone(), normals: normals.clone() },
            Domain::unit_ball(2),
        )
        .unwrap();
        let x = p(&[-0.3, 0.4]);
        let expected = normals.iter().map(|a| a.dot(&(&x - &m))).fold(f64::MIN, f64::max);
        assert_eq!(f.true_value(&x).unwrap(), expected);
        assert_eq!(f.true_value(&m).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_linear_rejects_unpinned_minimizer() {
        let normals = vec![p(&[1.0, 0.0]), p(&[0.5, 1.0])];
        let err = TestFunction::new(
            Objective::PiecewiseLinearNd { minimizer: p(&[0.0, 0.0]), normals },
            Domain::unit_ball(2),
        );
        assert!(matches!(err, Err(OracleError::InvalidFunction(_))));
    }

    #[test]
    fn domain_violation_and_budget() {
        let mut o = NoisyOracle::new(quad_03(), NoiseModel::noiseless(), Some(2), None);
        assert!(matches!(o.evaluate(&p(&[1.5])), Err(OracleError::DomainViolation { .. })));
        o.evaluate(&p(&[0.1])).unwrap();
        o.evaluate(&p(&[0.2])).unwrap();
        assert_eq!(o.evaluate(&p(&[0.3])), Err(OracleError::BudgetExhausted { budget: 2 }));
        assert_eq!(o.ledger().total_queries(), 2);
    }

    #[test]
    fn ledger_log_length_matches_count() {
        let mut o = NoisyOracle::new(quad_03(), NoiseModel::gaussian(0.1, 3), None, Some(LogGranularity::PerQuery));
        let mut last = 0.0;
        for i in 0..50 {
            o.evaluate(&p(&[i as f64 / 50.0])).unwrap();
            let r = o.ledger().cumulative_regret();
            assert!(r >= last);
            last = r;
        }
        assert_eq!(o.ledger().log().unwrap().len() as u64, o.ledger().total_queries());
        assert_eq!(o.ledger().regret_at(50), Some(last));
    }

    #[test]
    fn coarse_logging_keeps_regret_curve() {
        let mut o = NoisyOracle::new(quad_03(), NoiseModel::noiseless(), None, Some(LogGranularity::PerRound));
        o.evaluate(&p(&[0.8])).unwrap();
        o.evaluate(&p(&[0.3])).unwrap();
        assert!(o.ledger().log().is_none());
        assert!((o.ledger().regret_at(2).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(o.ledger().regret_at(3), None);
    }

    #[test]
    fn noise_variance_is_calibrated() {
        for family in [NoiseFamily::Gaussian, NoiseFamily::Uniform] {
            let mut s = NoiseModel::new(0.1, family, 11).unwrap().sampler();
            let n = 1_000_000;
            let draws: Vec<f64> = (0..n).map(|_| s.draw()).collect();
            let mean = draws.iter().sum::<f64>() / n as f64;
            let var = draws.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(mean.abs() < 5e-4, "{family:?} mean {mean}");
            assert!((var / 0.01 - 1.0).abs() < 0.05, "{family:?} variance {var}");
        }
    }

    #[test]
    fn uniform_noise_is_bounded() {
        let mut s = NoiseModel::new(0.2, NoiseFamily::Uniform, 1).unwrap().sampler();
        let half = 0.2 * 3f64.sqrt();
        assert!((0..10_000).all(|_| s.draw().abs() <= half));
    }

    #[test]
    fn projection() {
        let ball = Domain::unit_ball(2);
        let q = ball.project(&p(&[3.0, 4.0]));
        assert!((q - p(&[0.6, 0.8])).norm() < 1e-15);
        let cube = Domain::cube(2, 1.0);
        assert_eq!(cube.project(&p(&[2.0, -0.5])), p(&[1.0, -0.5]));
    }

    #[test]
    fn box_enclosing_ellipsoid_contains_corners() {
        let cube = Domain::cube(3, 1.0);
        let e = cube.enclosing_ellipsoid().unwrap();
        assert!(e.contains(&p(&[1.0, 1.0, -1.0]), 1e-12));
        assert!((e.gauge(&p(&[1.0, 1.0, 1.0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_slice_caps_queries() {
        let mut o = NoisyOracle::new(quad_03(), NoiseModel::noiseless(), Some(10), None);
        {
            let mut s = BudgetSlice::new(&mut o, 3);
            assert_eq!(s.remaining(), Some(3));
            for _ in 0..3 {
                s.query(&p(&[0.5])).unwrap();
            }
            assert!(s.query(&p(&[0.5])).is_err());
        }
        assert_eq!(o.remaining(), Some(7));
    }

    #[test]
    fn lipschitz_of_shifted_square() {
        assert!((quad_03().lipschitz_bound() - 1.4).abs() < 1e-15);
    }
}
