//! d-dimensional optimizer: per-epoch isotropic rounding, simplex probing,
//! chains of narrow pyramids, and cone cuts applied to an enclosing ellipsoid.
//!
//! All pyramid geometry happens in isotropic coordinates, where the current
//! enclosing ellipsoid is the unit ball centered at the origin. Query points
//! are mapped back and projected onto the original domain before they reach
//! the oracle.

use nalgebra::DVector;
use thiserror::Error;

use crate::confint::{ge, ConfintError, PointEstimate, SamplingPolicy};
use crate::geometry::{
    self, build_pyramid, cap_halfspace_for_cone, cone_of, cut_volume_ratio, regular_simplex,
    round_to_isotropic, shallow_cut_update, CapCut, Ellipsoid, GeometryError, IsotropicMap, Point,
    Pyramid,
};
use crate::oracle::{BudgetSlice, Domain, OracleError, QueryOracle};

/// A level floor fine enough for noiseless runs under theory constants,
/// where `Δ(γ)` is about `6·10⁶ γ` and pyramids only separate at tiny levels.
pub const FINE_GAMMA_FLOOR: f64 = 1.0 / (1u64 << 50) as f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BanditNdError {
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `Δ(γ) = (6 c1 d⁴ / c2² + 3) γ`.
pub fn delta(gamma: f64, d: usize, c1: f64, c2: f64) -> f64 {
    (6.0 * c1 * (d as f64).powi(4) / (c2 * c2) + 3.0) * gamma
}

/// `Δ̄(γ) = (6 c1 d⁴ / c2² + 5) γ`.
pub fn delta_bar(gamma: f64, d: usize, c1: f64, c2: f64) -> f64 {
    (6.0 * c1 * (d as f64).powi(4) / (c2 * c2) + 5.0) * gamma
}

/// Constants `c1` (ball ratio) and `c2` (pyramid apex cosine is `c2/d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub d: usize,
    pub c1: f64,
    pub c2: f64,
}

impl Thresholds {
    pub fn new(d: usize, c1: f64, c2: f64) -> Result<Self, BanditNdError> {
        if d < 2 {
            return Err(BanditNdError::InvalidConstants(format!("d must be at least 2, got {d}")));
        }
        if !(c1 >= 1.0 && c1.is_finite()) {
            return Err(BanditNdError::InvalidConstants(format!("c1 must be ≥ 1, got {c1}")));
        }
        if !(c2 > 0.0 && c2 < 1.0) {
            return Err(BanditNdError::InvalidConstants(format!("c2 must lie in (0, 1), got {c2}")));
        }
        Ok(Self { d, c1, c2 })
    }

    /// `c1 = 64`, `c2 = 1/32`.
    pub fn theory(d: usize) -> Result<Self, BanditNdError> {
        Self::new(d, 64.0, 1.0 / 32.0)
    }

    /// `c1 = 2`, `c2 = 1/2`.
    pub fn practical(d: usize) -> Result<Self, BanditNdError> {
        Self::new(d, 2.0, 0.5)
    }

    pub fn is_theory(&self) -> bool {
        self.c1 >= 64.0 && self.c2 <= 1.0 / 32.0
    }

    pub fn delta(&self, gamma: f64) -> f64 {
        delta(gamma, self.d, self.c1, self.c2)
    }

    pub fn delta_bar(&self, gamma: f64) -> f64 {
        delta_bar(gamma, self.d, self.c1, self.c2)
    }

    /// Inner radius in isotropic coordinates, `1 / (c1 d)`.
    pub fn inner_radius(&self) -> f64 {
        1.0 / (self.c1 * self.d as f64)
    }

    /// Bound on the number of pyramids in one round, `2 d² ln d / c2²`.
    pub fn pyramid_bound(&self) -> f64 {
        let d = self.d as f64;
        2.0 * d * d * d.ln() / (self.c2 * self.c2)
    }
}

/// Volume shrink factor per epoch, `exp(−1/(4(d+1)))`.
pub fn rho(d: usize) -> f64 {
    (-1.0 / (4.0 * (d as f64 + 1.0))).exp()
}

/// Epoch-count bound `d ln T / ln(1/ρ)`.
pub fn epoch_bound_nd(d: usize, horizon: f64) -> f64 {
    d as f64 * horizon.ln() / -rho(d).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PyramidCase {
    /// Move the apex to TOP.
    Case1a,
    /// Cut the cone of this pyramid.
    Case1b,
    /// Halve γ̂.
    Case2a,
    /// Raise the apex, then cut.
    Case2b,
}

/// Case together with the vertex indices of TOP and BOTTOM
/// (0 is the apex, `1..=d` the base).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub case: PyramidCase,
    pub top: usize,
    pub bottom: usize,
}

/// The four-way case split on a pyramid's estimates at level `gamma_hat`.
pub fn classify_pyramid(
    apex: &PointEstimate,
    center: &PointEstimate,
    base: &[PointEstimate],
    gamma_hat: f64,
    thresholds: &Thresholds,
) -> Result<Classification, ConfintError> {
    let vertices: Vec<&PointEstimate> = std::iter::once(apex).chain(base.iter()).collect();
    for e in vertices.iter().skip(1).chain(std::iter::once(&center)) {
        if e.level != apex.level {
            return Err(ConfintError::LevelMismatch(apex.level, e.level));
        }
    }
    let mut top = 0;
    let mut bottom = 0;
    for (j, e) in vertices.iter().enumerate().skip(1) {
        if e.lower() > vertices[top].lower() {
            top = j;
        }
        if e.lower() < vertices[bottom].lower() {
            bottom = j;
        }
    }
    let lb_top = vertices[top].lower();
    let far_apart = ge(lb_top, vertices[bottom].upper() + thresholds.delta(gamma_hat));
    let case = if far_apart {
        if ge(lb_top, apex.upper() + gamma_hat) {
            PyramidCase::Case1a
        } else {
            PyramidCase::Case1b
        }
    } else if ge(center.upper(), vertices[bottom].lower() - thresholds.delta_bar(gamma_hat)) {
        PyramidCase::Case2a
    } else {
        PyramidCase::Case2b
    };
    Ok(Classification { case, top, bottom })
}

/// Same base, apex reflected through the pyramid center: `y' = y + (y − center)`.
pub fn hat_raising(p: &Pyramid) -> Pyramid {
    let y = p.apex();
    let raised = y * 2.0 - p.center();
    Pyramid::from_vertices(raised, p.base().to_vec()).expect("same dimension as the input")
}

/// A cut of the unit ball in isotropic coordinates.
#[derive(Debug, Clone)]
pub struct ConeCut {
    /// The cap that was removed (in isotropic coordinates).
    pub cap: CapCut,
    /// Unit ball with the cap removed, re-enclosed.
    pub ellipsoid: Ellipsoid,
    pub volume_ratio: f64,
    /// Set when no usable cap fits in the cone and a central cut along the
    /// cone axis was used instead.
    pub fallback: Option<GeometryError>,
}

/// Removes a cap inside the pyramid's reflected cone from the unit ball.
///
/// When the cap cannot be built, or is too shallow to shrink the ball
/// (`α ≤ −1/d`), the half of the ball on the cone's side is removed instead.
/// That fallback may discard points outside the cone and is reported.
pub fn cone_cutting(p: &Pyramid) -> Result<ConeCut, GeometryError> {
    let d = p.dim();
    let ball = Ellipsoid::ball(DVector::zeros(d), 1.0)?;
    let cone = cone_of(p)?;
    let (cap, fallback) = match cap_halfspace_for_cone(&cone, &ball) {
        Ok(cap) if cap.alpha > -1.0 / d as f64 => (cap, None),
        Ok(cap) => (
            central_cap(&cone.axis(), d),
            Some(GeometryError::InvalidCutDepth { alpha: cap.alpha, lo: -1.0 / d as f64, hi: 1.0 }),
        ),
        Err(err) => (central_cap(&cone.axis(), d), Some(err)),
    };
    let ellipsoid = shallow_cut_update(&ball, &cap.normal, cap.alpha)?;
    Ok(ConeCut { volume_ratio: cut_volume_ratio(d, cap.alpha), cap, ellipsoid, fallback })
}

fn central_cap(axis: &Point, d: usize) -> CapCut {
    CapCut { ball_center: DVector::zeros(d), radius: 1.0, normal: axis.clone(), offset: 0.0, alpha: 0.0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigNd {
    pub thresholds: Thresholds,
    pub policy: SamplingPolicy,
    /// Levels below this are never used. Defaults to `1/√T`, which keeps every
    /// discarded point at least that far above the optimum.
    pub gamma_floor: f64,
    /// Keep one [`PyramidStep`] per classified pyramid level.
    pub record_pyramids: bool,
}

impl ConfigNd {
    pub fn new(thresholds: Thresholds, policy: SamplingPolicy) -> Self {
        let gamma_floor = 1.0 / (policy.horizon.max(1) as f64).sqrt();
        Self { thresholds, policy, gamma_floor, record_pyramids: false }
    }
}

/// One classification of one pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidStep {
    pub epoch: u32,
    pub round: u32,
    /// Position of the pyramid in the round's chain, from 1.
    pub pyramid: u32,
    pub gamma_hat: f64,
    pub case: PyramidCase,
    /// `‖y − x0‖ / r` in isotropic coordinates.
    pub apex_distance_ratio: f64,
    /// Queried points in original coordinates: apex, center, base.
    pub points: Vec<Point>,
    pub t_start: u64,
    pub t_end: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecordNd {
    pub round: u32,
    pub gamma: f64,
    pub pyramids: u32,
    pub t_start: u64,
    pub t_end: u64,
}

/// The cut that closed an epoch, in original coordinates.
#[derive(Debug, Clone)]
pub struct CutEvent {
    pub case: PyramidCase,
    pub round: u32,
    pub gamma_hat: f64,
    /// Apex of the pyramid that was cut; after hat-raising for case 2(b).
    pub apex: Point,
    /// Apex before hat-raising (equal to `apex` for case 1(b)).
    pub original_apex: Point,
    /// Cone generators `y − zᵢ`.
    pub generators: Vec<Point>,
    /// BOTTOM vertex of the final pyramid.
    pub bottom: Point,
    pub alpha: f64,
    pub volume_ratio: f64,
    pub fallback: Option<GeometryError>,
    pub before: Ellipsoid,
    pub after: Ellipsoid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EpochEndNd {
    Cut,
    BudgetStop,
    ResolutionFloor,
    Geometry(GeometryError),
}

#[derive(Debug, Clone)]
pub struct EpochRecordNd {
    pub epoch: u32,
    pub ellipsoid: Ellipsoid,
    pub t_start: u64,
    pub t_end: u64,
    pub rounds: Vec<RoundRecordNd>,
    pub end: EpochEndNd,
    pub cut: Option<CutEvent>,
}

#[derive(Debug, Clone)]
pub struct RunNdReport {
    pub epochs: Vec<EpochRecordNd>,
    pub pyramid_steps: Vec<PyramidStep>,
    pub final_ellipsoid: Ellipsoid,
    /// Center of the final ellipsoid (the final simplex centroid), projected onto the domain.
    pub recommendation: Point,
    pub queries: u64,
    /// Queries whose mapped point fell outside the domain and was projected.
    pub clamped_queries: u64,
}

impl RunNdReport {
    pub fn cuts(&self) -> impl Iterator<Item = &CutEvent> {
        self.epochs.iter().filter_map(|e| e.cut.as_ref())
    }
}

struct Probe {
    iso: Point,
    est: PointEstimate,
}

struct Frame<'a> {
    map: IsotropicMap,
    domain: &'a Domain,
    clamped: &'a mut u64,
}

impl Frame<'_> {
    fn probe(&mut self, iso: Point) -> Probe {
        let raw = self.map.inverse(&iso);
        let x = self.domain.project(&raw);
        if (&x - &raw).norm() > 0.0 {
            *self.clamped += 1;
        }
        Probe { iso, est: PointEstimate::new(x) }
    }
}

enum Flow {
    Next,
    Stop(EpochEndNd),
}

fn refine_all<O: QueryOracle + ?Sized>(
    oracle: &mut O,
    policy: &SamplingPolicy,
    probes: &mut [&mut Probe],
    level: f64,
) -> Result<Flow, OracleError> {
    let cost: u64 = probes.iter().map(|p| p.est.cost(policy, level)).sum();
    if cost > oracle.remaining().unwrap_or(u64::MAX) {
        return Ok(Flow::Stop(EpochEndNd::BudgetStop));
    }
    for p in probes.iter_mut() {
        match p.est.refine(oracle, policy, level) {
            Ok(()) => {}
            Err(OracleError::BudgetExhausted { .. }) => return Ok(Flow::Stop(EpochEndNd::BudgetStop)),
            Err(err) => return Err(err),
        }
    }
    Ok(Flow::Next)
}

/// Runs epochs on `domain` until the horizon cannot pay for the next level,
/// the level floor is reached, or the enclosing ellipsoid degenerates.
pub fn run_nd<O: QueryOracle + ?Sized>(
    oracle: &mut O,
    domain: &Domain,
    config: &ConfigNd,
) -> Result<RunNdReport, BanditNdError> {
    let th = config.thresholds;
    let d = th.d;
    if oracle.dim() != d || domain.dim() != d {
        return Err(OracleError::DimensionMismatch { expected: d, got: oracle.dim().min(domain.dim()) }.into());
    }
    let policy = config.policy;
    let mut oracle = BudgetSlice::new(oracle, policy.horizon);
    let mut ellipsoid = domain.enclosing_ellipsoid()?;
    let mut epochs = Vec::new();
    let mut steps = Vec::new();
    let mut clamped = 0u64;
    let origin: Point = DVector::zeros(d);
    let r = th.inner_radius();

    'epochs: for epoch in 1u32.. {
        let t_start = oracle.queries_made();
        let mut record = EpochRecordNd {
            epoch,
            ellipsoid: ellipsoid.clone(),
            t_start,
            t_end: t_start,
            rounds: Vec::new(),
            end: EpochEndNd::BudgetStop,
            cut: None,
        };
        let map = match round_to_isotropic(&ellipsoid) {
            Ok(m) => m,
            Err(err) => {
                record.end = EpochEndNd::Geometry(err);
                epochs.push(record);
                break;
            }
        };
        let mut frame = Frame { map, domain, clamped: &mut clamped };
        let mut simplex: Vec<Probe> =
            regular_simplex(&origin, r, d)?.into_iter().map(|v| frame.probe(v)).collect();

        let end = 'rounds: loop {
            let round = record.rounds.len() as u32 + 1;
            let gamma = 0.5f64.powi(round as i32);
            if gamma < config.gamma_floor {
                break 'rounds EpochEndNd::ResolutionFloor;
            }
            let round_start = oracle.queries_made();
            let mut refs: Vec<&mut Probe> = simplex.iter_mut().collect();
            if let Flow::Stop(end) = refine_all(&mut oracle, &policy, &mut refs, gamma)? {
                break 'rounds end;
            }
            let mut best = 0;
            for (j, p) in simplex.iter().enumerate() {
                if p.est.lower() > simplex[best].est.lower() {
                    best = j;
                }
            }
            let mut apex = Probe { iso: simplex[best].iso.clone(), est: simplex[best].est.clone() };
            let mut pyramids = 0u32;

            // Pyramid chain.
            let outcome = 'chain: loop {
                pyramids += 1;
                let pyramid = build_pyramid(&apex.iso, &origin, th.c2)?;
                let mut center = frame.probe(pyramid.center());
                let mut base: Vec<Probe> = pyramid.base().iter().map(|z| frame.probe(z.clone())).collect();
                let mut gamma_hat = 0.5;
                loop {
                    let step_start = oracle.queries_made();
                    let mut refs: Vec<&mut Probe> = std::iter::once(&mut apex)
                        .chain(std::iter::once(&mut center))
                        .chain(base.iter_mut())
                        .collect();
                    if let Flow::Stop(end) = refine_all(&mut oracle, &policy, &mut refs, gamma_hat)? {
                        break 'chain Err(end);
                    }
                    let ests: Vec<PointEstimate> = base.iter().map(|p| p.est.clone()).collect();
                    let cls = classify_pyramid(&apex.est, &center.est, &ests, gamma_hat, &th)
                        .expect("pyramid refined to one level");
                    if config.record_pyramids {
                        steps.push(PyramidStep {
                            epoch,
                            round,
                            pyramid: pyramids,
                            gamma_hat,
                            case: cls.case,
                            apex_distance_ratio: apex.iso.norm() / r,
                            points: std::iter::once(&apex)
                                .chain(std::iter::once(&center))
                                .chain(base.iter())
                                .map(|p| p.est.point.clone())
                                .collect(),
                            t_start: step_start,
                            t_end: oracle.queries_made(),
                        });
                    }
                    match cls.case {
                        PyramidCase::Case1a => {
                            apex = base.swap_remove(cls.top - 1);
                            continue 'chain;
                        }
                        PyramidCase::Case1b | PyramidCase::Case2b => {
                            let bottom = if cls.bottom == 0 { &apex } else { &base[cls.bottom - 1] };
                            break 'chain Ok((pyramid, cls.case, gamma_hat, bottom.est.point.clone()));
                        }
                        PyramidCase::Case2a => {
                            gamma_hat /= 2.0;
                            if gamma_hat < gamma {
                                break 'chain Err(EpochEndNd::Cut);
                            }
                        }
                    }
                }
            };

            record.rounds.push(RoundRecordNd {
                round,
                gamma,
                pyramids,
                t_start: round_start,
                t_end: oracle.queries_made(),
            });
            match outcome {
                // Round exhausted its levels; start the next round.
                Err(EpochEndNd::Cut) => continue 'rounds,
                Err(end) => break 'rounds end,
                Ok((pyramid, case, gamma_hat, bottom)) => {
                    let cut_pyramid = if case == PyramidCase::Case2b { hat_raising(&pyramid) } else { pyramid.clone() };
                    let cut = cone_cutting(&cut_pyramid)?;
                    let after = match frame.map.pull_back(&cut.ellipsoid) {
                        Ok(e) => e,
                        Err(err) => break 'rounds EpochEndNd::Geometry(err),
                    };
                    let generators = cut_pyramid
                        .base()
                        .iter()
                        .map(|z| frame.map.push_direction(&(cut_pyramid.apex() - z)))
                        .collect();
                    record.cut = Some(CutEvent {
                        case,
                        round,
                        gamma_hat,
                        apex: frame.map.inverse(cut_pyramid.apex()),
                        original_apex: frame.map.inverse(pyramid.apex()),
                        generators,
                        bottom,
                        alpha: cut.cap.alpha,
                        volume_ratio: cut.volume_ratio,
                        fallback: cut.fallback,
                        before: ellipsoid.clone(),
                        after: after.clone(),
                    });
                    ellipsoid = after;
                    break 'rounds EpochEndNd::Cut;
                }
            }
        };

        record.t_end = oracle.queries_made();
        let stop = end != EpochEndNd::Cut;
        record.end = end;
        epochs.push(record);
        if stop {
            break 'epochs;
        }
    }

    let recommendation = domain.project(ellipsoid.center());
    Ok(RunNdReport {
        epochs,
        pyramid_steps: steps,
        final_ellipsoid: ellipsoid,
        recommendation,
        queries: oracle.queries_made(),
        clamped_queries: clamped,
    })
}

/// Distance of a point from the origin of the isotropic frame of `e`.
pub fn isotropic_norm(e: &Ellipsoid, x: &Point) -> f64 {
    e.gauge(x).sqrt()
}

#[doc(hidden)]
pub fn unit_ball(d: usize) -> Ellipsoid {
    geometry::Ellipsoid::ball(DVector::zeros(d), 1.0).expect("d ≥ 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confint::SamplingMode;
    use crate::oracle::{NoiseModel, NoisyOracle, Objective, TestFunction};

    fn v(xs: &[f64]) -> Point {
        DVector::from_row_slice(xs)
    }

    fn est(mean: f64, level: f64) -> PointEstimate {
        PointEstimate::with_mean(v(&[0.0, 0.0]), mean, level)
    }

    #[test]
    fn threshold_values() {
        assert_eq!(delta(1.0, 2, 64.0, 1.0 / 32.0), 6_291_459.0);
        assert!((delta(0.1, 2, 2.0, 0.5) - 77.1).abs() < 1e-12);
        let th = Thresholds::practical(3).unwrap();
        for g in [1.0, 0.37, 1e-6] {
            assert!((th.delta_bar(g) - th.delta(g) - 2.0 * g).abs() <= 1e-12 * th.delta(g));
        }
    }

    #[test]
    fn constants_validation() {
        assert!(Thresholds::new(1, 2.0, 0.5).is_err());
        assert!(Thresholds::new(2, 0.5, 0.5).is_err());
        assert!(Thresholds::new(2, 2.0, 1.5).is_err());
        assert!(Thresholds::theory(2).unwrap().is_theory());
        assert!(!Thresholds::practical(2).unwrap().is_theory());
    }

    #[test]
    fn structural_bound_values() {
        assert!((Thresholds::practical(2).unwrap().pyramid_bound() - 22.18).abs() < 0.01);
        assert!((epoch_bound_nd(2, 1e6) - 331.6).abs() < 0.1);
    }

    #[test]
    fn flat_configuration_is_case_2a() {
        let th = Thresholds::practical(2).unwrap();
        let base = vec![est(0.3, 0.1), est(0.3, 0.1)];
        let c = classify_pyramid(&est(0.3, 0.1), &est(0.3, 0.1), &base, 0.1, &th).unwrap();
        assert_eq!(c.case, PyramidCase::Case2a);
        assert_eq!((c.top, c.bottom), (0, 0));
    }

    #[test]
    fn synthetic_case_1a_and_2b() {
        let th = Thresholds::practical(2).unwrap();
        let (g, lvl) = (0.1, 0.1);
        let big = th.delta(g);
        // bottom mean 0; LB(top) − UB(bottom) = Δ + 1; LB(top) − UB(apex) = γ̂ + 1.
        let top_mean = big + 1.0 + 2.0 * lvl;
        let apex_mean = top_mean - (g + 1.0) - 2.0 * lvl;
        let base = vec![est(top_mean, lvl), est(0.0, lvl)];
        let c = classify_pyramid(&est(apex_mean, lvl), &est(0.0, lvl), &base, g, &th).unwrap();
        assert_eq!(c.case, PyramidCase::Case1a);
        assert_eq!((c.top, c.bottom), (1, 2));

        // LB(top) − UB(bottom) = Δ − 1 and LB(bottom) − UB(center) = Δ̄ + 1.
        let bottom_mean = 10.0;
        let top_mean = bottom_mean + big - 1.0 + 2.0 * lvl;
        let center_mean = bottom_mean - th.delta_bar(g) - 1.0 - 2.0 * lvl;
        let base = vec![est(bottom_mean, lvl), est(top_mean, lvl)];
        let c = classify_pyramid(&est(bottom_mean + 0.5, lvl), &est(center_mean, lvl), &base, g, &th).unwrap();
        assert_eq!(c.case, PyramidCase::Case2b);
    }

    #[test]
    fn hat_raising_reflects_apex() {
        let p = Pyramid::from_vertices(v(&[0.0, 1.0]), vec![v(&[-0.5, 0.0]), v(&[0.5, 0.0])]).unwrap();
        let raised = hat_raising(&p);
        assert!((raised.apex() - v(&[0.0, 5.0 / 3.0])).norm() < 1e-15);
        assert_eq!(raised.base(), p.base());
    }

    #[test]
    fn theory_cut_is_shallow_enough() {
        let th = Thresholds::theory(2).unwrap();
        let apex = v(&[th.inner_radius(), 0.0]);
        let p = build_pyramid(&apex, &v(&[0.0, 0.0]), th.c2).unwrap();
        let cut = cone_cutting(&p).unwrap();
        assert!(cut.fallback.is_none());
        assert!(cut.cap.offset <= 1.0 / 12.0);
        assert!(cut.volume_ratio <= (-1.0f64 / 12.0).exp());
    }

    fn quad(d: usize, m: &[f64]) -> TestFunction {
        TestFunction::new(Objective::QuadraticNd { minimizer: v(m), curvature: 1.0 }, Domain::unit_ball(d)).unwrap()
    }

    #[test]
    fn noiseless_practical_run_terminates_within_budget() {
        let f = quad(2, &[0.3, -0.2]);
        let mut o = NoisyOracle::new(f, NoiseModel::noiseless(), None, None);
        let th = Thresholds::practical(2).unwrap();
        let mut cfg = ConfigNd::new(th, SamplingPolicy::new(SamplingMode::Calibrated, 0.0, 20_000));
        cfg.gamma_floor = FINE_GAMMA_FLOOR;
        let report = run_nd(&mut o, &Domain::unit_ball(2), &cfg).unwrap();
        assert!(report.queries <= 20_000);
        assert_eq!(report.queries, o.ledger().total_queries());
        assert!(report.cuts().count() > 0);
    }

    #[test]
    fn default_floor_is_inverse_root_horizon() {
        let cfg = ConfigNd::new(
            Thresholds::practical(2).unwrap(),
            SamplingPolicy::new(SamplingMode::Calibrated, 0.1, 1_000_000),
        );
        assert!((cfg.gamma_floor - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn noiseless_theory_run_keeps_minimizer() {
        let m = [0.3, -0.2];
        let f = quad(2, &m);
        let mut o = NoisyOracle::new(f, NoiseModel::noiseless(), None, None);
        let th = Thresholds::theory(2).unwrap();
        let mut cfg = ConfigNd::new(th, SamplingPolicy::new(SamplingMode::Calibrated, 0.0, 50_000));
        cfg.gamma_floor = FINE_GAMMA_FLOOR;
        let report = run_nd(&mut o, &Domain::unit_ball(2), &cfg).unwrap();
        let x_star = v(&m);
        assert!(report.cuts().count() > 5);
        for cut in report.cuts() {
            assert!(cut.fallback.is_none());
            assert!(cut.after.contains(&x_star, 1e-9));
        }
    }

    #[test]
    fn noisy_run_is_reproducible() {
        let run = || {
            let f = quad(2, &[0.1, 0.1]);
            let mut o = NoisyOracle::new(f, NoiseModel::gaussian(0.1, 4), None, None);
            let cfg = ConfigNd::new(
                Thresholds::practical(2).unwrap(),
                SamplingPolicy::new(SamplingMode::Calibrated, 0.1, 200_000),
            );
            let r = run_nd(&mut o, &Domain::unit_ball(2), &cfg).unwrap();
            (r.queries, o.ledger().cumulative_regret().to_bits())
        };
        assert_eq!(run(), run());
    }
}
