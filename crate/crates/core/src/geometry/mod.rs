//! Euclidean constructions for the d-dimensional optimizer.
//!
//! Everything here is a pure function on immutable values: regular simplices,
//! pyramids with a prescribed apex angle, the reflected cone of a pyramid,
//! spherical caps that fit inside such a cone, the closed-form minimum-volume
//! ellipsoid after removing a cap, and the affine rounding that sends an
//! ellipsoid to the unit ball.

mod nnls;
pub mod sampling;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

pub use nnls::{nnls, NnlsSolution};

pub type Point = DVector<f64>;

/// Residual tolerance for cone membership.
pub const CONE_TOLERANCE: f64 = 1e-12;

/// Largest condition number accepted when rounding an ellipsoid.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { min: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("pyramid apex coincides with the ball center")]
    DegenerateApex,
    #[error("apex cosine {0} must lie strictly inside (0, 1)")]
    InvalidAngle(f64),
    #[error("vertices do not span a full-dimensional simplex")]
    DegenerateSimplex,
    #[error("cone generators are linearly dependent")]
    DegenerateCone,
    #[error("shape matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("shape matrix condition number {0:e} exceeds the limit")]
    IllConditioned(f64),
    #[error("expected a spherical ball")]
    NotABall,
    #[error("cone apex lies outside the ball")]
    ApexOutsideBall,
    #[error("no spherical cap of the ball fits inside the cone")]
    NoContainingCap,
    #[error("cut depth alpha = {alpha} outside the valid range ({lo}, {hi})")]
    InvalidCutDepth { alpha: f64, lo: f64, hi: f64 },
}

fn check_dim(expected: usize, got: usize) -> Result<(), GeometryError> {
    if expected != got {
        return Err(GeometryError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let mut even = 1.0;
    let mut odd = 2.0;
    if d == 0 {
        return even;
    }
    for k in 2..=d {
        if k % 2 == 0 {
            even *= 2.0 * std::f64::consts::PI / k as f64;
        } else {
            odd *= 2.0 * std::f64::consts::PI / k as f64;
        }
    }
    if d % 2 == 0 {
        even
    } else {
        odd
    }
}

/// Vertices of a regular simplex with `d + 1` vertices on the sphere of the
/// given radius around `center`. The centroid of the vertices is `center`.
///
/// Built from the Helmert basis of the hyperplane `Σ xᵢ = 0` in `R^{d+1}`,
/// so the orientation is fixed.
pub fn regular_simplex(center: &Point, radius: f64, d: usize) -> Result<Vec<Point>, GeometryError> {
    if d == 0 {
        return Err(GeometryError::InvalidDimension { min: 1, got: 0 });
    }
    check_dim(d, center.len())?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeometryError::InvalidRadius(radius));
    }
    let scale = radius / (d as f64 / (d as f64 + 1.0)).sqrt();
    let vertices = (0..=d)
        .map(|j| {
            let mut v = center.clone();
            for k in 1..=d {
                let norm = ((k * (k + 1)) as f64).sqrt();
                let coord = match j.cmp(&k) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(k as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                };
                v[k - 1] += scale * coord;
            }
            v
        })
        .collect();
    Ok(vertices)
}

/// Orthonormal basis of the complement of the unit vector `u`, taken from the
/// columns of the Householder reflection that maps `e₁` onto `±u`.
pub fn orthonormal_complement(u: &Point) -> Vec<Point> {
    let d = u.len();
    let sign = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = u.clone();
    v[0] += sign;
    let vv = v.dot(&v);
    (1..d)
        .map(|col| {
            let mut e = DVector::zeros(d);
            e[col] = 1.0;
            let coef = 2.0 * v[col] / vv;
            e - &v * coef
        })
        .collect()
}

/// Barycentric description of a full-dimensional simplex.
///
/// For vertices `v₀..v_d`, `λ(p)` are the barycentric coordinates; facet `j`
/// is `{λⱼ = 0}` and `λⱼ / ‖∇λⱼ‖` is the signed distance to it.
#[derive(Debug, Clone)]
pub struct SimplexFacets {
    origin: Point,
    inverse: DMatrix<f64>,
    gradients: Vec<Point>,
}

impl SimplexFacets {
    pub fn new(vertices: &[Point]) -> Result<Self, GeometryError> {
        let d = vertices[0].len();
        if vertices.len() != d + 1 {
            return Err(GeometryError::DimensionMismatch { expected: d + 1, got: vertices.len() });
        }
        let origin = vertices[0].clone();
        let edges = DMatrix::from_columns(
            &vertices[1..].iter().map(|v| v - &origin).collect::<Vec<_>>(),
        );
        let inverse = edges.try_inverse().ok_or(GeometryError::DegenerateSimplex)?;
        let mut gradients = Vec::with_capacity(d + 1);
        let rows: Vec<Point> = (0..d).map(|i| inverse.row(i).transpose()).collect();
        gradients.push(rows.iter().fold(DVector::zeros(d), |acc, r| acc - r));
        gradients.extend(rows);
        Ok(Self { origin, inverse, gradients })
    }

    pub fn barycentric(&self, p: &Point) -> DVector<f64> {
        let mu = &self.inverse * (p - &self.origin);
        let d = mu.len();
        let mut out = DVector::zeros(d + 1);
        out[0] = 1.0 - mu.sum();
        out.rows_mut(1, d).copy_from(&mu);
        out
    }

    /// Signed distance from `p` to facet `j` (the facet opposite vertex `j`);
    /// positive on the simplex side.
    pub fn facet_distance(&self, p: &Point, j: usize) -> f64 {
        self.barycentric(p)[j] / self.gradients[j].norm()
    }

    /// Radius of the largest ball centered at `p` inside the simplex.
    pub fn inscribed_radius(&self, p: &Point) -> f64 {
        let lam = self.barycentric(p);
        (0..lam.len())
            .map(|j| lam[j] / self.gradients[j].norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance travelled from an interior `p` along `dir` before leaving the
    /// simplex, in units of `‖dir‖`.
    pub fn exit_distance(&self, p: &Point, dir: &Point) -> f64 {
        let lam = self.barycentric(p);
        let mut t = f64::INFINITY;
        for (j, g) in self.gradients.iter().enumerate() {
            let rate = g.dot(dir);
            if rate < 0.0 {
                t = t.min(lam[j] / -rate);
            }
        }
        t
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.barycentric(p).iter().all(|&l| l >= -tol)
    }
}

/// A pyramid: an apex over a base of `d` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    apex: Point,
    base: Vec<Point>,
}

impl Pyramid {
    pub fn from_vertices(apex: Point, base: Vec<Point>) -> Result<Self, GeometryError> {
        let d = apex.len();
        if d < 2 {
            return Err(GeometryError::InvalidDimension { min: 2, got: d });
        }
        check_dim(d, base.len())?;
        for z in &base {
            check_dim(d, z.len())?;
        }
        Ok(Self { apex, base })
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    pub fn apex(&self) -> &Point {
        &self.apex
    }

    pub fn base(&self) -> &[Point] {
        &self.base
    }

    /// Apex first, then the base vertices.
    pub fn vertices(&self) -> Vec<Point> {
        std::iter::once(self.apex.clone()).chain(self.base.iter().cloned()).collect()
    }

    pub fn base_centroid(&self) -> Point {
        let d = self.dim();
        self.base.iter().fold(DVector::zeros(d), |acc, z| acc + z) / d as f64
    }

    /// Centroid of the `d + 1` vertices.
    pub fn center(&self) -> Point {
        let d = self.dim();
        (self.base.iter().fold(self.apex.clone(), |acc, z| acc + z)) / (d + 1) as f64
    }

    /// Unit vector from the apex toward the base centroid.
    pub fn axis(&self) -> Point {
        (self.base_centroid() - &self.apex).normalize()
    }

    pub fn facets(&self) -> Result<SimplexFacets, GeometryError> {
        SimplexFacets::new(&self.vertices())
    }

    /// Distance from the apex to the hyperplane of the base.
    pub fn height(&self) -> f64 {
        match self.facets() {
            Ok(f) => f.facet_distance(&self.apex, 0),
            Err(_) => 0.0,
        }
    }

    /// Largest angle between the axis and an apex-to-base-vertex edge.
    pub fn apex_half_angle(&self) -> f64 {
        let axis = self.axis();
        self.base
            .iter()
            .map(|z| {
                let e = (z - &self.apex).normalize();
                e.dot(&axis).clamp(-1.0, 1.0).acos()
            })
            .fold(0.0, f64::max)
    }
}

/// Builds the pyramid with apex `apex` whose base vertices `zᵢ` satisfy
/// `⟨apex − zᵢ, zᵢ − x0⟩ = 0` and make angle `φ` with `apex − x0`, where
/// `cos φ = c2 / d`.
///
/// The base is a regular `(d−1)`-simplex of circumradius `r sin φ cos φ`
/// centered at `x0 + sin²φ (apex − x0)`, `r = ‖apex − x0‖`.
pub fn build_pyramid(apex: &Point, x0: &Point, c2: f64) -> Result<Pyramid, GeometryError> {
    let d = apex.len();
    if d < 2 {
        return Err(GeometryError::InvalidDimension { min: 2, got: d });
    }
    check_dim(d, x0.len())?;
    let cos = c2 / d as f64;
    if !(cos > 0.0 && cos < 1.0) {
        return Err(GeometryError::InvalidAngle(cos));
    }
    let diff = apex - x0;
    let r = diff.norm();
    if !(r > 1e-280) || !r.is_finite() {
        return Err(GeometryError::DegenerateApex);
    }
    let u = &diff / r;
    let sin2 = 1.0 - cos * cos;
    let foot = x0 + &diff * sin2;
    let rho = r * sin2.sqrt() * cos;
    let frame = orthonormal_complement(&u);
    let unit = regular_simplex(&DVector::zeros(d - 1), 1.0, d - 1)?;
    let base = unit
        .iter()
        .map(|w| {
            frame
                .iter()
                .zip(w.iter())
                .fold(foot.clone(), |acc, (e, &c)| acc + e * (rho * c))
        })
        .collect();
    Pyramid::from_vertices(apex.clone(), base)
}

/// Centroid of the pyramid's vertices.
pub fn pyramid_center(p: &Pyramid) -> Point {
    p.center()
}

/// The polyhedral cone `{apex + Σ μᵢ gᵢ : μ ≥ 0}`.
#[derive(Debug, Clone)]
pub struct Cone {
    apex: Point,
    generators: Vec<Point>,
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Cone {
    pub fn new(apex: Point, generators: Vec<Point>) -> Result<Self, GeometryError> {
        let d = apex.len();
        check_dim(d, generators.len())?;
        let matrix = DMatrix::from_columns(&generators);
        let inverse = matrix.clone().try_inverse().ok_or(GeometryError::DegenerateCone)?;
        Ok(Self { apex, generators, matrix, inverse })
    }

    pub fn apex(&self) -> &Point {
        &self.apex
    }

    pub fn generators(&self) -> &[Point] {
        &self.generators
    }

    /// Unit opening direction: the normalized mean of the generators.
    pub fn axis(&self) -> Point {
        let d = self.apex.len();
        self.generators.iter().fold(DVector::zeros(d), |acc, g| acc + g).normalize()
    }

    /// Exact coefficients `μ` with `x − apex = Σ μᵢ gᵢ`.
    pub fn coefficients(&self, x: &Point) -> DVector<f64> {
        &self.inverse * (x - &self.apex)
    }

    /// Distance from `x − apex` to the cone of generators (NNLS residual).
    pub fn residual(&self, x: &Point) -> f64 {
        nnls(&self.matrix, &(x - &self.apex)).residual
    }

    pub fn contains(&self, x: &Point) -> bool {
        let offset = (x - &self.apex).norm();
        offset > 0.0 && self.residual(x) <= CONE_TOLERANCE * offset.max(1.0)
    }

    /// Half-angle of the largest circular cone around [`Cone::axis`] that
    /// fits inside this cone.
    pub fn inscribed_half_angle(&self) -> Result<f64, GeometryError> {
        let axis = self.axis();
        let mut sin_min = f64::INFINITY;
        for i in 0..self.inverse.nrows() {
            let row = self.inverse.row(i).transpose();
            sin_min = sin_min.min(row.dot(&axis) / row.norm());
        }
        if !(sin_min > 0.0) {
            return Err(GeometryError::NoContainingCap);
        }
        Ok(sin_min.min(1.0).asin())
    }
}

/// The reflected cone of a pyramid: apex `y`, generators `−(zᵢ − y)`.
pub fn cone_of(p: &Pyramid) -> Result<Cone, GeometryError> {
    let generators = p.base().iter().map(|z| p.apex() - z).collect();
    Cone::new(p.apex().clone(), generators)
}

/// Ellipsoid `{x : (x − c)ᵀ A⁻¹ (x − c) ≤ 1}`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    center: Point,
    shape: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl PartialEq for Ellipsoid {
    fn eq(&self, other: &Self) -> bool {
        self.center == other.center && self.shape == other.shape
    }
}

impl Ellipsoid {
    pub fn new(center: Point, shape: DMatrix<f64>) -> Result<Self, GeometryError> {
        let d = center.len();
        if d == 0 {
            return Err(GeometryError::InvalidDimension { min: 1, got: 0 });
        }
        check_dim(d, shape.nrows())?;
        check_dim(d, shape.ncols())?;
        let scale = shape.amax().max(f64::MIN_POSITIVE);
        if (&shape - shape.transpose()).amax() > 1e-12 * scale {
            return Err(GeometryError::NotPositiveDefinite);
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let chol = Cholesky::new(shape.clone()).ok_or(GeometryError::NotPositiveDefinite)?;
        if chol.l_dirty().diagonal().iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(GeometryError::NotPositiveDefinite);
        }
        Ok(Self { center, shape, chol })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidRadius(radius));
        }
        let d = center.len();
        Self::new(center, DMatrix::identity(d, d) * (radius * radius))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// Lower-triangular `L` with `A = L Lᵀ`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `(x − c)ᵀ A⁻¹ (x − c)`; at most 1 inside.
    pub fn gauge(&self, x: &Point) -> f64 {
        let diff = x - &self.center;
        diff.dot(&self.chol.solve(&diff))
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.gauge(x) <= 1.0 + tol
    }

    pub fn log_volume(&self) -> f64 {
        let half_log_det: f64 = self.chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum();
        unit_ball_volume(self.dim()).ln() + half_log_det
    }

    pub fn volume(&self) -> f64 {
        self.log_volume().exp()
    }

    /// Radius if the shape is `R² I` to relative precision `1e-9`.
    pub fn ball_radius(&self) -> Option<f64> {
        let d = self.dim();
        let r2 = self.shape[(0, 0)];
        let dev = (&self.shape - DMatrix::identity(d, d) * r2).amax();
        (r2 > 0.0 && dev <= 1e-9 * r2).then(|| r2.sqrt())
    }
}

/// Cap `{x ∈ ball : ⟨normal, x − center⟩ ≥ offset}` of a ball, together with
/// the Goldfarb-Todd depth `alpha = −offset / radius` of the matching cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CapCut {
    pub ball_center: Point,
    pub radius: f64,
    pub normal: Point,
    pub offset: f64,
    pub alpha: f64,
}

impl CapCut {
    pub fn contains(&self, x: &Point) -> bool {
        let diff = x - &self.ball_center;
        diff.norm() <= self.radius && self.normal.dot(&diff) >= self.offset
    }

    /// Distance of the cutting hyperplane from the ball center (signed, positive
    /// when the hyperplane lies beyond the center in the cap direction).
    pub fn hyperplane_distance(&self) -> f64 {
        self.offset
    }
}

/// Smallest-offset cap of `ball` contained in the circular cone with the given
/// apex, unit axis and half-angle.
///
/// At height `t` along the axis the ball's cross-section is a disc of radius
/// `√(R² − t²)` and the cone's is a disc of radius `(t − s) tan ψ`, offset by
/// the apex's transverse displacement `m`. The cap fits iff
/// `m + √(R² − t²) ≤ (t − s) tan ψ` for every `t` in `[h, R]`; the left side
/// minus the right is convex in `t`, so the smallest valid `h` is the larger
/// root of the squared equality.
pub fn cap_for_circular_cone(
    apex: &Point,
    axis: &Point,
    half_angle: f64,
    ball: &Ellipsoid,
) -> Result<CapCut, GeometryError> {
    let d = apex.len();
    check_dim(d, ball.dim())?;
    check_dim(d, axis.len())?;
    let radius = ball.ball_radius().ok_or(GeometryError::NotABall)?;
    let x0 = ball.center();
    let g = axis.normalize();
    let rel = apex - x0;
    if rel.norm() > radius * (1.0 + 1e-12) {
        return Err(GeometryError::ApexOutsideBall);
    }
    let s = g.dot(&rel);
    let m = (&rel - &g * s).norm();

    let offset = if half_angle >= std::f64::consts::FRAC_PI_2 - 1e-15 {
        // Degenerate cone: a half-space through the apex.
        if m > 0.0 {
            return Err(GeometryError::NoContainingCap);
        }
        s
    } else {
        if !(half_angle > 0.0) {
            return Err(GeometryError::NoContainingCap);
        }
        let k = half_angle.tan();
        if k * (radius - s) < m {
            return Err(GeometryError::NoContainingCap);
        }
        let q = k * s + m;
        let disc = (k * k + 1.0) * radius * radius - q * q;
        if disc < 0.0 {
            return Err(GeometryError::NoContainingCap);
        }
        let root = (k * q + disc.sqrt()) / (k * k + 1.0);
        (root + 1e-12 * radius).clamp(-radius, radius)
    };
    Ok(CapCut {
        ball_center: x0.clone(),
        radius,
        normal: g,
        offset,
        alpha: -offset / radius,
    })
}

/// A cap of `ball` contained in `cone`, via the inscribed circular cone.
pub fn cap_halfspace_for_cone(cone: &Cone, ball: &Ellipsoid) -> Result<CapCut, GeometryError> {
    let psi = cone.inscribed_half_angle()?;
    cap_for_circular_cone(cone.apex(), &cone.axis(), psi, ball)
}

/// Goldfarb-Todd volume ratio `vol(E⁺)/vol(E)` for cut depth `alpha`.
pub fn cut_volume_ratio(d: usize, alpha: f64) -> f64 {
    let (_, sigma, delta) = cut_coefficients(d, alpha);
    delta.powf(d as f64 / 2.0) * (1.0 - sigma).sqrt()
}

fn cut_coefficients(d: usize, alpha: f64) -> (f64, f64, f64) {
    let n = d as f64;
    let tau = (1.0 + n * alpha) / (n + 1.0);
    let sigma = 2.0 * (1.0 + n * alpha) / ((n + 1.0) * (1.0 + alpha));
    let delta = n * n * (1.0 - alpha * alpha) / (n * n - 1.0);
    (tau, sigma, delta)
}

/// Minimum-volume ellipsoid containing `E ∩ {x : ⟨a, x − c⟩ ≤ −α √(aᵀAa)}`,
/// i.e. `E` with the cap in direction `normal` removed.
///
/// `alpha < 0` is a shallow cut, `0` a central cut, `alpha > 0` a deep cut.
/// The update shrinks the volume only for `alpha > −1/d`.
pub fn shallow_cut_update(e: &Ellipsoid, normal: &Point, alpha: f64) -> Result<Ellipsoid, GeometryError> {
    let d = e.dim();
    if d < 2 {
        return Err(GeometryError::InvalidDimension { min: 2, got: d });
    }
    check_dim(d, normal.len())?;
    let lo = -1.0 / d as f64;
    if !(alpha > lo && alpha < 1.0) {
        return Err(GeometryError::InvalidCutDepth { alpha, lo, hi: 1.0 });
    }
    let a_a = e.shape() * normal;
    let scale = normal.dot(&a_a).sqrt();
    let b = a_a / scale;
    let (tau, sigma, delta) = cut_coefficients(d, alpha);
    let center = e.center() - &b * tau;
    let shape = (e.shape() - &b * b.transpose() * sigma) * delta;
    Ellipsoid::new(center, (&shape + shape.transpose()) * 0.5)
}

/// Affine map `x ↦ L⁻¹(x − c)` sending an ellipsoid onto the unit ball.
#[derive(Debug, Clone)]
pub struct IsotropicMap {
    offset: Point,
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl IsotropicMap {
    /// Original coordinates to isotropic coordinates.
    pub fn forward(&self, x: &Point) -> Point {
        &self.inverse * (x - &self.offset)
    }

    /// Isotropic coordinates back to original coordinates.
    pub fn inverse(&self, u: &Point) -> Point {
        &self.offset + &self.matrix * u
    }

    /// Linear part applied to a direction.
    pub fn push_direction(&self, v: &Point) -> Point {
        &self.matrix * v
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &Point {
        &self.offset
    }

    /// Maps an ellipsoid given in isotropic coordinates back to the original frame.
    pub fn pull_back(&self, e: &Ellipsoid) -> Result<Ellipsoid, GeometryError> {
        let center = self.inverse(e.center());
        let shape = &self.matrix * e.shape() * self.matrix.transpose();
        Ellipsoid::new(center, (&shape + shape.transpose()) * 0.5)
    }
}

pub fn round_to_isotropic(e: &Ellipsoid) -> Result<IsotropicMap, GeometryError> {
    let eig = e.shape().clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) {
        return Err(GeometryError::NotPositiveDefinite);
    }
    let cond = max / min;
    if cond > MAX_CONDITION {
        return Err(GeometryError::IllConditioned(cond));
    }
    let matrix = e.cholesky_factor();
    let d = e.dim();
    let inverse = matrix
        .solve_lower_triangular(&DMatrix::identity(d, d))
        .ok_or(GeometryError::NotPositiveDefinite)?;
    Ok(IsotropicMap { offset: e.center().clone(), matrix, inverse })
}
