//! Uniform samplers over the bodies the Monte-Carlo containment checks use.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{CapCut, Ellipsoid, Point};

/// Uniform point on the unit sphere in `d` dimensions.
pub fn unit_sphere<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Point {
    loop {
        let v: Point = DVector::from_iterator(d, (0..d).map(|_| -> f64 { StandardNormal.sample(rng) }));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniform point in the unit ball.
pub fn unit_ball<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Point {
    let dir = unit_sphere(rng, d);
    let u: f64 = rng.random();
    dir * u.powf(1.0 / d as f64)
}

/// Uniform point in an ellipsoid.
pub fn in_ellipsoid<R: Rng + ?Sized>(rng: &mut R, e: &Ellipsoid) -> Point {
    let u = unit_ball(rng, e.dim());
    e.center() + e.cholesky_factor() * u
}

/// Uniform point in the simplex spanned by `vertices` (flat Dirichlet weights).
pub fn in_simplex<R: Rng + ?Sized>(rng: &mut R, vertices: &[Point]) -> Point {
    let weights: Vec<f64> = vertices.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let d = vertices[0].len();
    vertices
        .iter()
        .zip(&weights)
        .fold(DVector::zeros(d), |acc, (v, w)| acc + v * (w / total))
}

/// Uniform point in a spherical cap, by rejection from the enclosing ball.
///
/// Returns `None` when `max_tries` draws all miss (an essentially empty cap).
pub fn in_cap<R: Rng + ?Sized>(rng: &mut R, cap: &CapCut, max_tries: usize) -> Option<Point> {
    let d = cap.normal.len();
    for _ in 0..max_tries {
        let p = &cap.ball_center + unit_ball(rng, d) * cap.radius;
        if cap.contains(&p) {
            return Some(p);
        }
    }
    None
}

/// Uniform point on the rim of a cap, i.e. the sphere ∩ cutting hyperplane.
pub fn on_cap_rim<R: Rng + ?Sized>(rng: &mut R, cap: &CapCut) -> Point {
    let d = cap.normal.len();
    let rim_radius = (cap.radius * cap.radius - cap.offset * cap.offset).max(0.0).sqrt();
    let mut v = unit_sphere(rng, d);
    v -= &cap.normal * cap.normal.dot(&v);
    let n = v.norm();
    let dir = if n > 1e-12 { v / n } else { DVector::zeros(d) };
    &cap.ball_center + &cap.normal * cap.offset + dir * rim_radius
}
