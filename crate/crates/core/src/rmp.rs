//! Riemannian motion policies for a planar pusher.
//!
//! Each local policy lives in its own task space (the plane itself for the
//! attractor, a scalar clearance for obstacles) and supplies a desired task
//! acceleration together with a metric. Policies are pulled back through
//! their task-map Jacobians and combined by metric-weighted least squares
//! in [`resolve`]. [`control`] wires the policies into the closed-loop
//! pushing controller: approach the staging point behind the target, then
//! follow the local pushing field. On the way in the pusher circles the
//! target toward its rear side and keeps clear of obstacles and walls.

use nalgebra::{Matrix2, RowVector2};

use crate::error::RmpError;
use crate::types::{
    clamp_norm, wrap_angle, Limits, ObjectState, Pose2, PushTask, RobotAction, SceneState, Vec2,
    Workspace,
};

/// Gains and shape parameters of every policy used by the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmpGains {
    pub attractor_gain: f64,
    pub attractor_damping: f64,
    pub attractor_soft_eps: f64,
    pub attractor_soft_radius: f64,
    pub obstacle_eta: f64,
    pub obstacle_damping: f64,
    pub obstacle_d_min: f64,
    pub obstacle_metric_cap: f64,
    pub obstacle_d_active: f64,
    /// Gap between the target and the pusher at the staging point.
    pub approach_margin: f64,
    /// Distance from the target center below which the pushing field takes
    /// over; `None` means `mean_extent + 2 * robot_radius`.
    pub engage_radius: Option<f64>,
    /// Converts the local pushing field into meters per second.
    pub field_gain: f64,
    /// Half-width of the sector behind the target from which the pusher
    /// heads straight for the staging point; outside it the pusher orbits.
    pub orbit_sector: f64,
    /// Orbit radius beyond the engage radius.
    pub orbit_clearance: f64,
    /// Largest angle between the push direction and the goal bearing.
    pub max_deflection: f64,
    /// Wall clearance below which the wall policies switch on.
    pub wall_d_active: f64,
}

impl Default for RmpGains {
    fn default() -> Self {
        Self {
            attractor_gain: 2.0,
            attractor_damping: 2.0,
            attractor_soft_eps: 1e-6,
            attractor_soft_radius: 0.2,
            obstacle_eta: 0.05,
            obstacle_damping: 4.0,
            obstacle_d_min: 0.01,
            obstacle_metric_cap: 1e4,
            obstacle_d_active: 0.15,
            approach_margin: 0.02,
            engage_radius: None,
            field_gain: 30.0,
            orbit_sector: std::f64::consts::FRAC_PI_4,
            orbit_clearance: 0.05,
            max_deflection: std::f64::consts::FRAC_PI_3,
            wall_d_active: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlConfig {
    pub gains: RmpGains,
    pub limits: Limits,
    pub robot_radius: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            gains: RmpGains::default(),
            limits: Limits::default(),
            robot_radius: 0.05,
        }
    }
}

/// Node weights of the policy tree plus the pushing-field coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RmpWeights {
    pub attractor: f64,
    /// One weight per non-target object, in scene order.
    pub obstacles: Vec<f64>,
    pub field_alphas: [f64; 4],
}

impl RmpWeights {
    /// All weights and coefficients equal to 1.
    pub fn nominal(n_obstacles: usize) -> Self {
        Self {
            attractor: 1.0,
            obstacles: vec![1.0; n_obstacles],
            field_alphas: [1.0; 4],
        }
    }

    pub fn nominal_for(state: &SceneState) -> Self {
        Self::nominal(state.objects.len().saturating_sub(1))
    }
}

/// A local policy evaluated at one configuration, ready to be pulled back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaskRmp {
    /// One-dimensional task space.
    Scalar {
        jacobian: RowVector2<f64>,
        /// `J̇ ẋ`
        curvature: f64,
        accel: f64,
        metric: f64,
    },
    /// Two-dimensional task space.
    Planar {
        jacobian: Matrix2<f64>,
        curvature: Vec2,
        accel: Vec2,
        metric: Matrix2<f64>,
    },
}

impl TaskRmp {
    /// Identity task map with the given accel and metric.
    pub fn identity(accel: Vec2, metric: Matrix2<f64>) -> Self {
        TaskRmp::Planar {
            jacobian: Matrix2::identity(),
            curvature: Vec2::zeros(),
            accel,
            metric,
        }
    }

    /// `(Jᵀ M J, Jᵀ M (a − J̇ẋ))`
    fn pullback(&self) -> (Matrix2<f64>, Vec2) {
        match *self {
            TaskRmp::Scalar {
                jacobian,
                curvature,
                accel,
                metric,
            } => {
                let jt = jacobian.transpose();
                (jt * jacobian * metric, jt * (metric * (accel - curvature)))
            }
            TaskRmp::Planar {
                jacobian,
                curvature,
                accel,
                metric,
            } => {
                let jt = jacobian.transpose();
                (jt * metric * jacobian, jt * metric * (accel - curvature))
            }
        }
    }

    fn metric_is_psd(&self) -> bool {
        const TOL: f64 = 1e-9;
        match *self {
            TaskRmp::Scalar { metric, .. } => metric.is_finite() && metric >= -TOL,
            TaskRmp::Planar { metric, .. } => {
                if !metric.iter().all(|v| v.is_finite())
                    || (metric[(0, 1)] - metric[(1, 0)]).abs() > TOL
                {
                    return false;
                }
                let sym = (metric + metric.transpose()) * 0.5;
                sym.symmetric_eigenvalues().iter().all(|&e| e >= -TOL)
            }
        }
    }

    pub fn metric_scaled(&self, s: f64) -> Self {
        let mut out = *self;
        match &mut out {
            TaskRmp::Scalar { metric, .. } => *metric *= s,
            TaskRmp::Planar { metric, .. } => *metric *= s,
        }
        out
    }
}

/// Combines pulled-back policies into one acceleration,
/// `(Σ JᵀMJ)⁺ Σ JᵀM(a − J̇ẋ)`, without any limit.
pub fn resolve_unclamped(policies: &[TaskRmp]) -> Result<Vec2, RmpError> {
    if policies.is_empty() {
        return Err(RmpError::NoPolicies);
    }
    let mut metric = Matrix2::zeros();
    let mut force = Vec2::zeros();
    for (index, p) in policies.iter().enumerate() {
        if !p.metric_is_psd() {
            return Err(RmpError::MetricNotPsd { index });
        }
        let (m, f) = p.pullback();
        metric += m;
        force += f;
    }
    let pinv = metric
        .pseudo_inverse(1e-9)
        .expect("non-negative pseudo-inverse threshold");
    Ok(pinv * force)
}

/// [`resolve_unclamped`] followed by the acceleration limit.
pub fn resolve(policies: &[TaskRmp], a_max: f64) -> Result<Vec2, RmpError> {
    resolve_unclamped(policies).map(|a| clamp_norm(a, a_max))
}

/// Scalar task map `d(x) = ‖x − center‖ − radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceMap {
    pub center: Vec2,
    pub radius: f64,
}

impl DistanceMap {
    pub fn value(&self, x: Vec2) -> f64 {
        (x - self.center).norm() - self.radius
    }

    pub fn jacobian(&self, x: Vec2) -> RowVector2<f64> {
        let d = x - self.center;
        let n = d.norm();
        if n > 0.0 {
            (d / n).transpose()
        } else {
            RowVector2::new(1.0, 0.0)
        }
    }

    /// `J̇ ẋ`, the centripetal term of the distance map.
    pub fn curvature(&self, x: Vec2, xd: Vec2) -> f64 {
        let d = x - self.center;
        let n = d.norm();
        if n == 0.0 {
            return 0.0;
        }
        let radial = d.dot(&xd) / n;
        (xd.norm_squared() - radial * radial) / n
    }
}

/// Pulls the configuration toward `goal` with saturated gain and damping.
#[derive(Debug, Clone, Copy)]
pub struct AttractorPolicy {
    pub goal: Vec2,
    pub weight: f64,
}

impl AttractorPolicy {
    pub fn evaluate(&self, x: Vec2, xd: Vec2, g: &RmpGains) -> TaskRmp {
        let delta = self.goal - x;
        let dist = delta.norm();
        let pull = delta / dist.max(g.attractor_soft_eps)
            * (dist / g.attractor_soft_radius).min(1.0)
            * g.attractor_gain;
        TaskRmp::identity(
            pull - xd * g.attractor_damping,
            Matrix2::identity() * self.weight,
        )
    }
}

/// Keeps a disc of the configuration's radius away from a circular obstacle.
/// `map.radius` is the obstacle bounding radius plus the body radius.
#[derive(Debug, Clone, Copy)]
pub struct ObstaclePolicy {
    pub map: DistanceMap,
    pub weight: f64,
}

impl ObstaclePolicy {
    pub fn evaluate(&self, x: Vec2, xd: Vec2, g: &RmpGains) -> TaskRmp {
        let jacobian = self.map.jacobian(x);
        let d = self.map.value(x);
        let dd = (jacobian * xd)[0];
        let (accel, metric) = clearance_terms(d, dd, self.weight, g.obstacle_d_active, g);
        TaskRmp::Scalar {
            jacobian,
            curvature: self.map.curvature(x, xd),
            accel,
            metric,
        }
    }
}

/// Task acceleration and metric of a clearance coordinate `d` moving at `dd`.
fn clearance_terms(d: f64, dd: f64, weight: f64, d_active: f64, g: &RmpGains) -> (f64, f64) {
    let dc = d.max(g.obstacle_d_min);
    let mut accel = g.obstacle_eta / (dc * dc);
    if dd < 0.0 {
        accel -= g.obstacle_damping * dd;
    }
    // The taper brings the metric continuously to zero at `d_active`.
    let metric = if d < d_active {
        let taper = (1.0 - d.max(0.0) / d_active).powi(2);
        weight * (1.0 / (dc * dc)).min(g.obstacle_metric_cap) * taper
    } else {
        0.0
    };
    (accel, metric)
}

/// Clearance policies for the four workspace walls. The task maps are
/// linear, so the curvature terms vanish.
pub fn wall_policies(
    pos: Vec2,
    vel: Vec2,
    ws: &Workspace,
    body_radius: f64,
    g: &RmpGains,
) -> [TaskRmp; 4] {
    let wall = |normal: Vec2, offset: f64| {
        let d = normal.dot(&pos) + offset - body_radius;
        let (accel, metric) = clearance_terms(d, normal.dot(&vel), 1.0, g.wall_d_active, g);
        TaskRmp::Scalar {
            jacobian: normal.transpose(),
            curvature: 0.0,
            accel,
            metric,
        }
    };
    [
        wall(Vec2::new(1.0, 0.0), 0.0),
        wall(Vec2::new(-1.0, 0.0), ws.width),
        wall(Vec2::new(0.0, 1.0), 0.0),
        wall(Vec2::new(0.0, -1.0), ws.height),
    ]
}

pub fn attractor_policy(pos: Vec2, vel: Vec2, goal: Vec2, weight: f64, g: &RmpGains) -> TaskRmp {
    AttractorPolicy { goal, weight }.evaluate(pos, vel, g)
}

/// Avoidance of `obstacle` by a disc of radius `body_radius` at `pos`.
pub fn obstacle_policy(
    pos: Vec2,
    vel: Vec2,
    obstacle: &ObjectState,
    body_radius: f64,
    weight: f64,
    g: &RmpGains,
) -> TaskRmp {
    ObstaclePolicy {
        map: DistanceMap {
            center: obstacle.position(),
            radius: obstacle.shape.bounding_radius() + body_radius,
        },
        weight,
    }
    .evaluate(pos, vel, g)
}

/// The local pushing field `(α₁x² − α₂y² − α₃(m̄/2)², α₄xy)` at `rel`, a
/// position in the push frame.
pub fn push_local_field(rel: Vec2, mean_extent: f64, alphas: [f64; 4]) -> Vec2 {
    let half = 0.5 * mean_extent;
    let (x, y) = (rel.x, rel.y);
    Vec2::new(
        alphas[0] * x * x - alphas[1] * y * y - alphas[2] * half * half,
        alphas[3] * x * y,
    )
}

/// Frame at the target center whose x-axis points along `direction`.
pub fn push_frame(target: &ObjectState, direction: f64) -> Pose2 {
    Pose2::new(target.pose.x, target.pose.y, direction)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlMode {
    /// Driving to the staging point behind the target.
    Approach,
    /// Inside the engage radius, following the pushing field.
    Push,
}

/// Whether non-target objects contribute avoidance policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obstacles {
    Avoid,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub action: RobotAction,
    pub mode: ControlMode,
    /// Heading of the global policy at the target (push-frame orientation).
    pub push_direction: f64,
    pub approach_point: Vec2,
}

/// Closed-loop pushing controller with obstacle avoidance.
///
/// Outside the engage radius the action holds the current velocity and
/// carries the resolved acceleration; inside it the action is the pushing
/// field velocity with zero acceleration.
pub fn control(
    state: &SceneState,
    task: &PushTask,
    weights: &RmpWeights,
    cfg: &ControlConfig,
) -> Result<RobotAction, RmpError> {
    control_detailed(state, task, weights, cfg, Obstacles::Avoid).map(|o| o.action)
}

/// Global policy heading at the target: attractor to the goal plus
/// avoidance of every obstacle, evaluated as a position field.
fn push_direction(
    target: &ObjectState,
    obstacles: &[(&ObjectState, f64)],
    task: &PushTask,
    attractor_weight: f64,
    g: &RmpGains,
) -> Result<f64, RmpError> {
    let x = target.position();
    let at_rest = Vec2::zeros();
    let body = target.shape.bounding_radius();
    let mut policies = Vec::with_capacity(obstacles.len() + 1);
    policies.push(attractor_policy(x, at_rest, task.goal, attractor_weight, g));
    for (o, w) in obstacles {
        policies.push(obstacle_policy(x, at_rest, o, body, *w, g));
    }
    let acc = resolve_unclamped(&policies)?;
    let to_goal = task.goal - x;
    let bearing = to_goal.y.atan2(to_goal.x);
    if acc.norm() < 1e-6 {
        return Ok(bearing);
    }
    let deviation = wrap_angle(acc.y.atan2(acc.x) - bearing);
    Ok(wrap_angle(
        bearing + deviation.clamp(-g.max_deflection, g.max_deflection),
    ))
}

pub fn control_detailed(
    state: &SceneState,
    task: &PushTask,
    weights: &RmpWeights,
    cfg: &ControlConfig,
    mode: Obstacles,
) -> Result<ControlOutput, RmpError> {
    let g = &cfg.gains;
    let target = state
        .object(task.target_id)
        .ok_or(RmpError::MissingTarget(task.target_id))?;
    let others = state.objects.iter().filter(|o| o.id != task.target_id);
    let expected = state.objects.len() - 1;
    if weights.obstacles.len() != expected {
        return Err(RmpError::WeightCount {
            expected,
            got: weights.obstacles.len(),
        });
    }
    let obstacles: Vec<(&ObjectState, f64)> = match mode {
        Obstacles::Avoid => others.zip(weights.obstacles.iter().copied()).collect(),
        Obstacles::Ignore => Vec::new(),
    };

    let extent = target.mean_extent();
    let direction = push_direction(target, &obstacles, task, weights.attractor, g)?;
    let frame = push_frame(target, direction);
    let heading = Vec2::new(direction.cos(), direction.sin());
    let approach_point =
        target.position() - heading * (0.5 * extent + cfg.robot_radius + g.approach_margin);

    let robot = state.robot.position();
    let rel = frame.inverse_transform_point(robot);
    let engage = g.engage_radius.unwrap_or(extent + 2.0 * cfg.robot_radius);

    if (robot - target.position()).norm() <= engage {
        let local = push_local_field(rel, extent, weights.field_alphas) * g.field_gain;
        let velocity = clamp_norm(frame.rotation() * local, cfg.limits.v_max);
        return Ok(ControlOutput {
            action: RobotAction::new(velocity, Vec2::zeros()),
            mode: ControlMode::Push,
            push_direction: direction,
            approach_point,
        });
    }

    // Inside the rear sector head for the staging point; elsewhere follow a
    // waypoint that slides around the target toward the rear.
    let bearing = rel.y.atan2(rel.x);
    let from_rear = wrap_angle(bearing - std::f64::consts::PI);
    let waypoint = if from_rear.abs() <= g.orbit_sector {
        approach_point
    } else {
        let radius = engage + g.orbit_clearance;
        let next = bearing - from_rear.signum() * g.orbit_sector;
        let p = frame.transform_point(Vec2::new(next.cos(), next.sin()) * radius);
        let ws = &state.workspace;
        let m = cfg.robot_radius + g.approach_margin;
        Vec2::new(p.x.clamp(m, ws.width - m), p.y.clamp(m, ws.height - m))
    };
    let vel = state.robot.velocity;
    let mut policies = Vec::with_capacity(obstacles.len() + 5);
    policies.push(attractor_policy(robot, vel, waypoint, weights.attractor, g));
    policies.extend(wall_policies(
        robot,
        vel,
        &state.workspace,
        cfg.robot_radius,
        g,
    ));
    for (o, w) in &obstacles {
        policies.push(obstacle_policy(robot, vel, o, cfg.robot_radius, *w, g));
    }
    let acceleration = resolve(&policies, cfg.limits.a_max)?;
    Ok(ControlOutput {
        action: RobotAction::new(vel, acceleration),
        mode: ControlMode::Approach,
        push_direction: direction,
        approach_point,
    })
}
