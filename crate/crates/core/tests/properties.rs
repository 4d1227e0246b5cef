use convex_bandit::bandit1d::{classify_1d, Case1d, Side};
use convex_bandit::confint::{ge, required_samples, PointEstimate, SamplingMode};
use convex_bandit::geometry::{build_pyramid, cut_volume_ratio, sampling, shallow_cut_update, Ellipsoid, Point};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn est(mean: f64, level: f64) -> PointEstimate {
    PointEstimate::with_mean(DVector::zeros(1), mean, level)
}

fn flip(c: Case1d) -> Case1d {
    let other = |s| if s == Side::Left { Side::Right } else { Side::Left };
    match c {
        Case1d::Case1(s) => Case1d::Case1(other(s)),
        Case1d::Case2(s) => Case1d::Case2(other(s)),
        Case1d::Continue => Case1d::Continue,
    }
}

proptest! {
    #[test]
    fn mirrored_probes_mirror_the_case(
        l in -1.0..1.0f64, c in -1.0..1.0f64, r in -1.0..1.0f64, level in 0.001..0.5f64,
    ) {
        prop_assume!((l - r).abs() > 1e-9);
        let a = classify_1d(&est(l, level), &est(c, level), &est(r, level), level).unwrap();
        let b = classify_1d(&est(r, level), &est(c, level), &est(l, level), level).unwrap();
        prop_assert_eq!(flip(a), b);
    }

    #[test]
    fn shrinking_cases_are_backed_by_separation(
        l in -1.0..1.0f64, c in -1.0..1.0f64, r in -1.0..1.0f64, level in 0.001..0.5f64,
    ) {
        let case = classify_1d(&est(l, level), &est(c, level), &est(r, level), level).unwrap();
        let (hi, lo) = (l.max(r), l.min(r));
        match case {
            Case1d::Case1(s) => {
                prop_assert!(ge(hi - level, lo + level + level));
                prop_assert_eq!(s == Side::Left, ge(l - level, r - level));
            }
            Case1d::Case2(s) => {
                prop_assert!(!ge(hi - level, lo + level + level));
                prop_assert!(ge(hi - level, c + level + level));
                prop_assert_eq!(s == Side::Left, ge(l - level, r - level));
            }
            Case1d::Continue => {
                prop_assert!(!ge(hi - level, lo + level + level));
                prop_assert!(!ge(hi - level, c + level + level));
            }
        }
    }

    #[test]
    fn sample_counts_grow_as_gamma_shrinks(g in 1e-4..1.0f64, sigma in 0.01..1.0f64, t in 100u64..10_000_000) {
        for mode in [SamplingMode::Calibrated, SamplingMode::Variance, SamplingMode::PaperLiteral] {
            let n = required_samples(mode, g, sigma, t as f64);
            prop_assert!(n >= 1);
            prop_assert!(required_samples(mode, g / 2.0, sigma, t as f64) >= n);
        }
    }

    #[test]
    fn cut_keeps_the_complement_of_the_cap(d in 2usize..6, seed in any::<u64>(), depth in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = DMatrix::from_fn(d, d, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Equal => 0.5 + rng.random::<f64>(),
            std::cmp::Ordering::Greater => rng.random_range(-1.0..1.0),
        });
        let shape = &l * l.transpose();
        let e = Ellipsoid::new(sampling::unit_ball(&mut rng, d), shape).unwrap();
        let normal: Point = sampling::unit_sphere(&mut rng, d);
        let alpha = -depth / d as f64 * 0.999;
        let next = shallow_cut_update(&e, &normal, alpha).unwrap();
        let ratio = (next.log_volume() - e.log_volume()).exp();
        prop_assert!((ratio - cut_volume_ratio(d, alpha)).abs() <= 1e-9);
        prop_assert!(ratio < 1.0);
        let width = normal.dot(&(e.shape() * &normal)).sqrt();
        for _ in 0..200 {
            let x = sampling::in_ellipsoid(&mut rng, &e);
            if normal.dot(&(&x - e.center())) <= -alpha * width {
                prop_assert!(next.gauge(&x) <= 1.0 + 1e-10);
            }
        }
    }

    #[test]
    fn pyramid_vertices_sit_on_the_sphere_of_radius_sin(d in 2usize..7, seed in any::<u64>(), dist in 0.01..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c2 = 0.5;
        let x0 = sampling::unit_ball(&mut rng, d);
        let apex = &x0 + sampling::unit_sphere(&mut rng, d) * dist;
        let p = build_pyramid(&apex, &x0, c2).unwrap();
        let cos = c2 / d as f64;
        let sin = (1.0 - cos * cos).sqrt();
        for z in p.base() {
            prop_assert!(((z - &x0).norm() - dist * sin).abs() <= 1e-9 * dist);
            prop_assert!(((p.apex() - z).norm() - dist * cos).abs() <= 1e-9 * dist);
        }
        prop_assert!(p.facets().unwrap().contains(&p.center(), 0.0));
    }
}
