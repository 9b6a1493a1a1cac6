mod common;

use common::{rng, well_posed_instance, wls_oracle};
use nalgebra::{Matrix2, RowVector2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rmpc_push::rmp::{push_local_field, resolve_unclamped, DistanceMap, TaskRmp};
use rmpc_push::types::Vec2;

#[test]
fn resolve_matches_weighted_least_squares_oracle() {
    let mut r = rng(2024);
    for i in 0..200 {
        let policies = well_posed_instance(&mut r);
        let got = resolve_unclamped(&policies).unwrap();
        let want = wls_oracle(&policies);
        let err = (got - want).norm() / want.norm().max(1.0);
        assert!(err < 1e-8, "instance {i}: {got:?} vs {want:?}");
    }
}

#[test]
fn distance_map_jacobian_matches_central_differences() {
    let mut r = rng(7);
    let h = 1e-6;
    for i in 0..100 {
        let map = DistanceMap {
            center: Vec2::new(r.random_range(0.0..2.0), r.random_range(0.0..2.0)),
            radius: r.random_range(0.01..0.2),
        };
        let x = loop {
            let x = Vec2::new(r.random_range(0.0..2.0), r.random_range(0.0..2.0));
            if (x - map.center).norm() > 0.05 {
                break x;
            }
        };
        let fd = RowVector2::new(
            (map.value(x + Vec2::new(h, 0.0)) - map.value(x - Vec2::new(h, 0.0))) / (2.0 * h),
            (map.value(x + Vec2::new(0.0, h)) - map.value(x - Vec2::new(0.0, h))) / (2.0 * h),
        );
        assert!((map.jacobian(x) - fd).norm() < 1e-5, "configuration {i}");

        // J̇ẋ is the derivative of J(x + t ẋ) ẋ at t = 0
        let xd = Vec2::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
        let along = |t: f64| (map.jacobian(x + xd * t) * xd)[0];
        let fd_curv = (along(h) - along(-h)) / (2.0 * h);
        assert!(
            (map.curvature(x, xd) - fd_curv).abs() < 1e-5,
            "configuration {i}"
        );
    }
}

#[test]
fn push_field_matches_polynomial_on_grid() {
    let mut r = rng(5);
    for _ in 0..5 {
        let alphas: [f64; 4] = std::array::from_fn(|_| r.random_range(0.1..10.0));
        let extent = r.random_range(0.02..0.2);
        for i in 0..21 {
            for j in 0..21 {
                let x: f64 = -1.0 + 0.1 * i as f64;
                let y: f64 = -1.0 + 0.1 * j as f64;
                let half: f64 = extent / 2.0;
                let vx = alphas[0] * x.powi(2) - alphas[1] * y.powi(2) - alphas[2] * half.powi(2);
                let vy = alphas[3] * x * y;
                let v = push_local_field(Vec2::new(x, y), extent, alphas);
                let scale = 1.0 + vx.abs().max(vy.abs());
                assert!((v.x - vx).abs() <= 1e-15 * scale);
                assert!((v.y - vy).abs() <= 1e-15 * scale);
            }
        }
    }
}

#[test]
fn raising_one_weight_moves_toward_its_target() {
    let mut r = rng(9);
    for _ in 0..50 {
        let policies = well_posed_instance(&mut r);
        let target = Vec2::new(r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let mut last = f64::INFINITY;
        for w in [0.1, 0.3, 1.0, 3.0, 10.0, 30.0] {
            let mut all = policies.clone();
            all.push(TaskRmp::identity(target, Matrix2::identity() * w));
            let gap = (resolve_unclamped(&all).unwrap() - target).norm();
            assert!(gap <= last + 1e-12);
            last = gap;
        }
    }
}

proptest! {
    #[test]
    fn resolve_ignores_policy_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let policies = well_posed_instance(&mut r);
        let mut shuffled = policies.clone();
        shuffled.shuffle(&mut r);
        let a = resolve_unclamped(&policies).unwrap();
        let b = resolve_unclamped(&shuffled).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn resolve_is_invariant_to_global_metric_scale(seed in any::<u64>(), s in 1e-3..1e3f64) {
        let mut r = rng(seed);
        let policies = well_posed_instance(&mut r);
        let scaled: Vec<TaskRmp> = policies.iter().map(|p| p.metric_scaled(s)).collect();
        let a = resolve_unclamped(&policies).unwrap();
        let b = resolve_unclamped(&scaled).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
    }
}
