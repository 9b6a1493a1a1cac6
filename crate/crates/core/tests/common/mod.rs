#![allow(dead_code)]

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Matrix2, RowVector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rmpc_push::physics::{step, PhysicsConfig};
use rmpc_push::rmp::TaskRmp;
use rmpc_push::scenegen::{generate_scene, SceneGenConfig};
use rmpc_push::types::{wrap_angle, PushTask, RobotAction, SceneState, Vec2};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn scene(seed: u64) -> (SceneState, PushTask) {
    generate_scene(&SceneGenConfig::default().with_seed(seed)).expect("default generator succeeds")
}

/// Mostly heads for a random object at full speed so that contacts happen.
pub fn probing_action(state: &SceneState, rng: &mut impl Rng, v_max: f64) -> RobotAction {
    let i = rng.random_range(0..state.objects.len());
    let to = state.objects[i].position() - state.robot.position();
    let heading = if rng.random_bool(0.8) && to.norm() > 0.0 {
        to.y.atan2(to.x) + rng.random_range(-0.3..0.3)
    } else {
        rng.random::<f64>() * TAU
    };
    let speed = v_max * rng.random_range(0.3..=1.0);
    RobotAction::new(
        Vec2::new(heading.cos(), heading.sin()) * speed,
        Vec2::zeros(),
    )
}

/// Random episode: a generated scene driven by `steps` probing actions.
pub fn random_episode(
    seed: u64,
    steps: usize,
    cfg: &PhysicsConfig,
) -> (Vec<SceneState>, Vec<RobotAction>) {
    let (mut s, _) = scene(seed);
    let mut r = rng(seed ^ 0xabcd);
    let mut states = vec![s.clone()];
    let mut actions = Vec::new();
    for _ in 0..steps {
        let a = probing_action(&s, &mut r, cfg.limits.v_max);
        s = step(&s, &a, cfg).expect("valid step").0;
        states.push(s.clone());
        actions.push(a);
    }
    (states, actions)
}

/// Reflection about the horizontal mid-line of the workspace.
pub fn mirror(state: &SceneState) -> SceneState {
    let h = state.workspace.height;
    let mut m = state.clone();
    m.robot.pose.y = h - m.robot.pose.y;
    m.robot.pose.theta = wrap_angle(-m.robot.pose.theta);
    m.robot.velocity.y = -m.robot.velocity.y;
    for o in &mut m.objects {
        o.pose.y = h - o.pose.y;
        o.pose.theta = wrap_angle(-o.pose.theta);
        o.linear_velocity.y = -o.linear_velocity.y;
        o.angular_velocity = -o.angular_velocity;
    }
    m
}

pub fn mirror_action(a: &RobotAction) -> RobotAction {
    RobotAction::new(
        Vec2::new(a.velocity.x, -a.velocity.y),
        Vec2::new(a.acceleration.x, -a.acceleration.y),
    )
}

/// Largest coordinate difference between two states with the same layout;
/// angles compare modulo 2π.
pub fn state_gap(a: &SceneState, b: &SceneState) -> f64 {
    let mut worst = (a.robot.position() - b.robot.position()).norm();
    worst = worst.max((a.robot.velocity - b.robot.velocity).norm());
    for (p, q) in a.objects.iter().zip(&b.objects) {
        worst = worst
            .max((p.position() - q.position()).norm())
            .max(wrap_angle(p.pose.theta - q.pose.theta).abs())
            .max((p.linear_velocity - q.linear_velocity).norm())
            .max((p.angular_velocity - q.angular_velocity).abs());
    }
    worst
}

/// Target pushed along y = 1 through a gap narrower than itself.
pub const CORRIDOR_SCENE: &str = "\
workspace 2 2
robot 0.3 1 0
task 1 1.5 1 0.05
1 disc 0.04 0.6 1 0 0.3
2 box 0.1 0.1 1.05 1.085 0 0.4
3 box 0.1 0.1 1.05 0.915 0 0.4
";

/// The target already sits on its goal.
pub const AT_GOAL_SCENE: &str = "\
workspace 2 2
robot 0.3 0.3 0
task 1 1 1 0.05
1 disc 0.04 1 1 0 0.3
2 disc 0.04 1.5 1.5 0 0.3
";

pub fn random_linear_rmp(r: &mut impl Rng) -> TaskRmp {
    let mut u = || r.random_range(-2.0..2.0);
    if u() > 0.0 {
        let b = u();
        TaskRmp::Scalar {
            jacobian: RowVector2::new(u(), u()),
            curvature: 0.0,
            accel: u(),
            metric: b * b,
        }
    } else {
        let b = Matrix2::new(u(), u(), u(), u());
        TaskRmp::Planar {
            jacobian: Matrix2::new(u(), u(), u(), u()),
            curvature: Vec2::zeros(),
            accel: Vec2::new(u(), u()),
            metric: b.transpose() * b,
        }
    }
}

/// Minimizer of Σ (J q − a)ᵀ M (J q − a) found by stacking square-root
/// weighted rows and solving the least-squares system with an SVD.
pub fn wls_oracle(policies: &[TaskRmp]) -> Vec2 {
    let mut rows: Vec<[f64; 2]> = Vec::new();
    let mut rhs = Vec::new();
    for p in policies {
        match *p {
            TaskRmp::Scalar {
                jacobian,
                accel,
                metric,
                ..
            } => {
                let w = metric.sqrt();
                rows.push([w * jacobian[0], w * jacobian[1]]);
                rhs.push(w * accel);
            }
            TaskRmp::Planar {
                jacobian,
                accel,
                metric,
                ..
            } => {
                let w = metric
                    .cholesky()
                    .map(|c| c.l().transpose())
                    .unwrap_or_else(Matrix2::zeros);
                let wj = w * jacobian;
                let wa = w * accel;
                for i in 0..2 {
                    rows.push([wj[(i, 0)], wj[(i, 1)]]);
                    rhs.push(wa[i]);
                }
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let x = a.svd(true, true).solve(&b, 1e-12).expect("svd solve");
    Vec2::new(x[0], x[1])
}

fn combined_metric(policies: &[TaskRmp]) -> Matrix2<f64> {
    policies.iter().fold(Matrix2::zeros(), |acc, p| match *p {
        TaskRmp::Scalar {
            jacobian, metric, ..
        } => acc + jacobian.transpose() * jacobian * metric,
        TaskRmp::Planar {
            jacobian, metric, ..
        } => acc + jacobian.transpose() * metric * jacobian,
    })
}

pub fn well_posed_instance(r: &mut impl Rng) -> Vec<TaskRmp> {
    loop {
        let n = r.random_range(1..=5);
        let policies: Vec<TaskRmp> = (0..n).map(|_| random_linear_rmp(r)).collect();
        let eig = combined_metric(&policies).symmetric_eigenvalues();
        if eig.min() > 1e-2 && eig.max() / eig.min() < 1e4 {
            return policies;
        }
    }
}
