//! Shared domain vocabulary: planar poses, objects, scenes, tasks and actions.

use std::f64::consts::PI;

use nalgebra::{Rotation2, Vector2};

use crate::error::SceneError;

pub type Vec2 = Vector2<f64>;

/// Wraps an angle into `(-π, π]`.
///
/// Angles already inside the interval are returned unchanged, so the
/// function is exactly idempotent.
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Planar pose in SE(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn set_position(&mut self, p: Vec2) {
        self.x = p.x;
        self.y = p.y;
    }

    pub fn rotation(&self) -> Rotation2<f64> {
        Rotation2::new(self.theta)
    }

    /// Maps a point expressed in this frame into the world frame.
    pub fn transform_point(&self, local: Vec2) -> Vec2 {
        self.position() + self.rotation() * local
    }

    /// Expresses a world point in this frame.
    pub fn inverse_transform_point(&self, world: Vec2) -> Vec2 {
        self.rotation().inverse() * (world - self.position())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Distance between two poses: translation distance plus `angular_weight`
/// times the wrapped heading difference.
pub fn pose_distance(a: &Pose2, b: &Pose2, angular_weight: f64) -> f64 {
    let translation = (a.x - b.x).hypot(a.y - b.y);
    if angular_weight == 0.0 {
        return translation;
    }
    translation + angular_weight * wrap_angle(a.theta - b.theta).abs()
}

/// Footprint of an object on the plane. Box `width` runs along the local
/// x-axis and `length` along the local y-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Disc { radius: f64 },
    Box { width: f64, length: f64 },
}

impl Shape {
    /// Average dimension along width and length (diameter for a disc).
    pub fn mean_extent(&self) -> f64 {
        match *self {
            Shape::Disc { radius } => 2.0 * radius,
            Shape::Box { width, length } => 0.5 * (width + length),
        }
    }

    /// Radius of the smallest circle around the center containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Shape::Disc { radius } => radius,
            Shape::Box { width, length } => 0.5 * width.hypot(length),
        }
    }

    /// Moment of inertia about the center for a uniform lamina.
    pub fn inertia(&self, mass: f64) -> f64 {
        match *self {
            Shape::Disc { radius } => 0.5 * mass * radius * radius,
            Shape::Box { width, length } => mass * (width * width + length * length) / 12.0,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Disc { .. } => "disc",
            Shape::Box { .. } => "box",
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Shape::Disc { radius } => radius.is_finite() && radius > 0.0,
            Shape::Box { width, length } => {
                width.is_finite() && length.is_finite() && width > 0.0 && length > 0.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectState {
    pub id: u32,
    pub shape: Shape,
    pub pose: Pose2,
    pub linear_velocity: Vec2,
    pub angular_velocity: f64,
    pub mass: f64,
}

impl ObjectState {
    /// A resting object.
    pub fn new(id: u32, shape: Shape, pose: Pose2, mass: f64) -> Self {
        Self {
            id,
            shape,
            pose,
            linear_velocity: Vec2::zeros(),
            angular_velocity: 0.0,
            mass,
        }
    }

    pub fn mean_extent(&self) -> f64 {
        self.shape.mean_extent()
    }

    pub fn position(&self) -> Vec2 {
        self.pose.position()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.linear_velocity.norm_squared()
            + 0.5 * self.shape.inertia(self.mass) * self.angular_velocity.powi(2)
    }

    fn is_finite(&self) -> bool {
        self.pose.is_finite()
            && self.linear_velocity.iter().all(|v| v.is_finite())
            && self.angular_velocity.is_finite()
            && self.mass.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub pose: Pose2,
    pub velocity: Vec2,
}

impl RobotState {
    pub fn at(x: f64, y: f64) -> Self {
        Self {
            pose: Pose2::new(x, y, 0.0),
            velocity: Vec2::zeros(),
        }
    }

    pub fn position(&self) -> Vec2 {
        self.pose.position()
    }
}

/// Axis-aligned workspace rectangle `[0, width] × [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workspace {
    pub width: f64,
    pub height: f64,
}

impl Workspace {
    pub fn new(width: f64, height: f64) -> Self {
        Self { width, height }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }
}

impl Default for Workspace {
    fn default() -> Self {
        Self::new(2.0, 2.0)
    }
}

/// Robot state and every object state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub objects: Vec<ObjectState>,
    pub robot: RobotState,
    pub time: f64,
    pub workspace: Workspace,
}

impl SceneState {
    pub fn object(&self, id: u32) -> Option<&ObjectState> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: u32) -> Option<&mut ObjectState> {
        self.objects.iter_mut().find(|o| o.id == id)
    }

    pub fn object_index(&self, id: u32) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn is_finite(&self) -> bool {
        self.robot.pose.is_finite()
            && self.robot.velocity.iter().all(|v| v.is_finite())
            && self.time.is_finite()
            && self.objects.iter().all(ObjectState::is_finite)
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.objects.iter().map(ObjectState::kinetic_energy).sum()
    }

    /// Exact textual snapshot of every numeric field. Two states are
    /// bit-identical iff their snapshots are equal.
    pub fn snapshot(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let r = &self.robot;
        let _ = writeln!(
            s,
            "t {:?} ws {:?} {:?} robot {:?} {:?} {:?} {:?} {:?}",
            self.time,
            self.workspace.width,
            self.workspace.height,
            r.pose.x,
            r.pose.y,
            r.pose.theta,
            r.velocity.x,
            r.velocity.y
        );
        for o in &self.objects {
            let _ = writeln!(
                s,
                "{} {:?} {:?} {:?} {:?} {:?} {:?} {:?} {:?}",
                o.id,
                o.shape,
                o.pose.x,
                o.pose.y,
                o.pose.theta,
                o.linear_velocity.x,
                o.linear_velocity.y,
                o.angular_velocity,
                o.mass
            );
        }
        s
    }

    /// Checks object validity, id uniqueness and that centers lie in the workspace.
    pub fn validate(&self) -> Result<(), SceneError> {
        if !(self.workspace.width > 0.0 && self.workspace.height > 0.0) {
            return Err(SceneError::InvalidWorkspace);
        }
        if !self.is_finite() {
            return Err(SceneError::NonFinite);
        }
        for (i, o) in self.objects.iter().enumerate() {
            if self.objects[..i].iter().any(|p| p.id == o.id) {
                return Err(SceneError::DuplicateId(o.id));
            }
            if !o.shape.is_valid() {
                return Err(SceneError::InvalidShape(o.id));
            }
            if o.mass.is_nan() || o.mass <= 0.0 {
                return Err(SceneError::InvalidMass(o.id));
            }
            if !self.workspace.contains(o.position()) {
                return Err(SceneError::OutsideWorkspace(o.id));
            }
        }
        Ok(())
    }
}

/// Push the object `target_id` to `goal`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushTask {
    pub target_id: u32,
    pub goal: Vec2,
    pub goal_tolerance: f64,
}

impl PushTask {
    pub fn validate(&self, scene: &SceneState) -> Result<(), SceneError> {
        if scene.object(self.target_id).is_none() {
            return Err(SceneError::UnknownTarget(self.target_id));
        }
        if !self.goal.iter().all(|v| v.is_finite()) || !scene.workspace.contains(self.goal) {
            return Err(SceneError::GoalOutsideWorkspace);
        }
        if self.goal_tolerance.is_nan() || self.goal_tolerance <= 0.0 {
            return Err(SceneError::InvalidTolerance);
        }
        Ok(())
    }

    /// Distance from the target's center to the goal. Panics if the
    /// target is missing, which `validate` rules out.
    pub fn target_distance(&self, scene: &SceneState) -> f64 {
        let target = scene
            .object(self.target_id)
            .expect("task target missing from scene");
        (target.position() - self.goal).norm()
    }
}

/// Commanded end-effector velocity and acceleration for one control step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotAction {
    pub velocity: Vec2,
    pub acceleration: Vec2,
}

impl RobotAction {
    pub fn new(velocity: Vec2, acceleration: Vec2) -> Self {
        Self {
            velocity,
            acceleration,
        }
    }

    pub fn hold() -> Self {
        Self::new(Vec2::zeros(), Vec2::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.velocity
            .iter()
            .chain(self.acceleration.iter())
            .all(|v| v.is_finite())
    }

    pub fn within(&self, limits: &Limits) -> bool {
        self.is_finite()
            && self.velocity.norm() <= limits.v_max * (1.0 + 1e-12)
            && self.acceleration.norm() <= limits.a_max * (1.0 + 1e-12)
    }
}

/// Speed and acceleration bounds of the pusher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub v_max: f64,
    pub a_max: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            a_max: 2.0,
        }
    }
}

/// Scales `v` down so that its norm does not exceed `max`.
pub fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max && n > 0.0 {
        v * (max / n)
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    pub gamma: f64,
    pub horizon: usize,
    /// Meters charged per radian of heading change in `pose_distance`.
    pub angular_weight: f64,
    /// Minimum non-target displacement counted as a collision event.
    pub collision_epsilon: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            horizon: 20,
            angular_weight: 0.1,
            collision_epsilon: 0.002,
        }
    }
}

impl RewardConfig {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.gamma)
            && self.horizon >= 1
            && self.angular_weight >= 0.0
            && self.collision_epsilon > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-9);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
    }

    #[test]
    fn pose_distance_examples() {
        let o = Pose2::new(0.0, 0.0, 0.0);
        assert_eq!(pose_distance(&o, &o, 0.1), 0.0);
        assert!((pose_distance(&o, &Pose2::new(3.0, 4.0, 0.0), 0.1) - 5.0).abs() < 1e-12);
        let d = pose_distance(&o, &Pose2::new(0.0, 0.0, PI / 2.0), 0.1);
        assert!((d - 0.1 * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mean_extent_of_shapes() {
        assert_eq!(Shape::Disc { radius: 0.03 }.mean_extent(), 0.06);
        let b = Shape::Box {
            width: 0.1,
            length: 0.05,
        };
        assert!((b.mean_extent() - 0.075).abs() < 1e-15);
    }

    #[test]
    fn frame_transforms_invert() {
        let f = Pose2::new(1.0, 2.0, 0.7);
        let p = Vec2::new(-0.3, 0.4);
        let back = f.inverse_transform_point(f.transform_point(p));
        assert!((back - p).norm() < 1e-12);
    }

    #[test]
    fn validate_rejects_duplicates_and_outside() {
        let mut s = SceneState {
            objects: vec![
                ObjectState::new(
                    1,
                    Shape::Disc { radius: 0.05 },
                    Pose2::new(0.5, 0.5, 0.0),
                    1.0,
                ),
                ObjectState::new(
                    1,
                    Shape::Disc { radius: 0.05 },
                    Pose2::new(1.0, 0.5, 0.0),
                    1.0,
                ),
            ],
            robot: RobotState::at(0.2, 0.2),
            time: 0.0,
            workspace: Workspace::default(),
        };
        assert_eq!(s.validate(), Err(SceneError::DuplicateId(1)));
        s.objects[1].id = 2;
        s.objects[1].pose.x = 3.0;
        assert_eq!(s.validate(), Err(SceneError::OutsideWorkspace(2)));
    }

    fn pose() -> impl Strategy<Value = Pose2> {
        (-5.0..5.0f64, -5.0..5.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| Pose2::new(x, y, t))
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(t in -100.0..100.0f64) {
            let w = wrap_angle(t);
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w), w);
            let k = ((t - w) / (2.0 * PI)).round();
            prop_assert!((t - w - k * 2.0 * PI).abs() < 1e-9);
        }

        #[test]
        fn pose_distance_is_a_metric(a in pose(), b in pose(), c in pose(), w in 0.0..1.0f64) {
            let ab = pose_distance(&a, &b, w);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - pose_distance(&b, &a, w)).abs() < 1e-12);
            prop_assert!(ab <= pose_distance(&a, &c, w) + pose_distance(&c, &b, w) + 1e-9);
        }
    }
}
