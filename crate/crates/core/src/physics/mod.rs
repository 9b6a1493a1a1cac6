//! Deterministic fixed-timestep planar rigid-body engine.
//!
//! The pusher is a disc driven by second-order commands; objects are discs
//! or boxes sliding on a floor with Coulomb friction. Contacts use
//! sequential impulses with zero restitution followed by a position
//! projection pass. There is no global state: `step` is a pure function of
//! its arguments.

pub mod contact;
pub mod trajectory;

use crate::error::PhysicsError;
use crate::types::{
    clamp_norm, pose_distance, wrap_angle, Limits, RobotAction, SceneState, Shape, Vec2,
};
use contact::{collide, collide_walls, Geom, ManifoldPoint};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConfig {
    pub dt: f64,
    pub floor_friction_mu: f64,
    /// Coulomb coefficient between touching bodies.
    pub contact_friction_mu: f64,
    /// Only 0 is supported.
    pub contact_restitution: f64,
    pub penetration_tolerance: f64,
    pub solver_iterations: usize,
    pub robot_radius: f64,
    pub robot_mass: f64,
    pub limits: Limits,
    /// Pose change (see `pose_distance`) above which an object counts as displaced.
    pub displacement_epsilon: f64,
    pub angular_weight: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            floor_friction_mu: 0.6,
            contact_friction_mu: 0.3,
            contact_restitution: 0.0,
            penetration_tolerance: 1e-3,
            solver_iterations: 8,
            robot_radius: 0.05,
            robot_mass: 3.0,
            limits: Limits::default(),
            displacement_epsilon: 0.002,
            angular_weight: 0.1,
        }
    }
}

impl PhysicsConfig {
    pub fn is_valid(&self) -> bool {
        self.dt > 0.0
            && self.floor_friction_mu >= 0.0
            && self.contact_friction_mu >= 0.0
            && self.contact_restitution == 0.0
            && self.penetration_tolerance > 0.0
            && self.solver_iterations >= 1
            && self.robot_radius > 0.0
            && self.robot_mass > 0.0
    }

    fn speculative_margin(&self) -> f64 {
        2.0 * self.limits.v_max * self.dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyId {
    Robot,
    Object(u32),
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactRecord {
    pub a: BodyId,
    pub b: BodyId,
    pub point: Vec2,
    /// Points from `a` toward `b`.
    pub normal: Vec2,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    /// Touching contacts (separation ≤ 0 before the step's projection pass).
    pub contacts: Vec<ContactRecord>,
    /// Objects whose pose moved by more than `displacement_epsilon`, in scene order.
    pub displaced_ids: Vec<u32>,
}

impl StepReport {
    pub fn displaced_non_target_ids(&self, target_id: u32) -> Vec<u32> {
        self.displaced_ids
            .iter()
            .copied()
            .filter(|&id| id != target_id)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Body {
    pos: Vec2,
    angle: f64,
    vel: Vec2,
    omega: f64,
    inv_mass: f64,
    inv_inertia: f64,
    shape: Shape,
}

impl Body {
    fn geom(&self) -> Geom {
        Geom {
            center: self.pos,
            angle: self.angle,
            shape: self.shape,
        }
    }
}

const WALL: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Constraint {
    a: usize,
    b: usize,
    ra: Vec2,
    rb: Vec2,
    normal: Vec2,
    tangent: Vec2,
    separation: f64,
    normal_mass: f64,
    tangent_mass: f64,
    normal_impulse: f64,
    tangent_impulse: f64,
}

fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn cross_sv(s: f64, v: Vec2) -> Vec2 {
    Vec2::new(-s * v.y, s * v.x)
}

struct World<'a> {
    bodies: Vec<Body>,
    cfg: &'a PhysicsConfig,
    ws: crate::types::Workspace,
}

impl World<'_> {
    fn body(&self, i: usize) -> Option<&Body> {
        if i == WALL {
            None
        } else {
            Some(&self.bodies[i])
        }
    }

    fn inv_mass(&self, i: usize) -> (f64, f64) {
        self.body(i)
            .map_or((0.0, 0.0), |b| (b.inv_mass, b.inv_inertia))
    }

    fn velocity_at(&self, i: usize, r: Vec2) -> Vec2 {
        self.body(i)
            .map_or(Vec2::zeros(), |b| b.vel + cross_sv(b.omega, r))
    }

    fn apply_impulse(&mut self, i: usize, r: Vec2, p: Vec2) {
        if i == WALL {
            return;
        }
        let b = &mut self.bodies[i];
        b.vel += p * b.inv_mass;
        b.omega += b.inv_inertia * cross(r, p);
    }

    /// Visits candidate pairs in a fixed order: body pairs (i < j), then walls.
    fn manifolds(&self, margin: f64, mut visit: impl FnMut(usize, usize, &[ManifoldPoint])) {
        let mut pts = Vec::with_capacity(4);
        let n = self.bodies.len();
        for i in 0..n {
            let gi = self.bodies[i].geom();
            for j in (i + 1)..n {
                pts.clear();
                collide(&gi, &self.bodies[j].geom(), margin, &mut pts);
                if !pts.is_empty() {
                    visit(i, j, &pts);
                }
            }
        }
        for i in 0..n {
            pts.clear();
            collide_walls(&self.bodies[i].geom(), &self.ws, margin, &mut pts);
            if !pts.is_empty() {
                visit(WALL, i, &pts);
            }
        }
    }

    fn build_constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        self.manifolds(self.cfg.speculative_margin(), |a, b, pts| {
            for m in pts {
                let ca = self.body(a).map_or(m.point, |body| body.pos);
                let cb = self.body(b).map_or(m.point, |body| body.pos);
                let ra = m.point - ca;
                let rb = m.point - cb;
                let (ima, iia) = self.inv_mass(a);
                let (imb, iib) = self.inv_mass(b);
                let tangent = Vec2::new(-m.normal.y, m.normal.x);
                let kn = ima
                    + imb
                    + iia * cross(ra, m.normal).powi(2)
                    + iib * cross(rb, m.normal).powi(2);
                let kt =
                    ima + imb + iia * cross(ra, tangent).powi(2) + iib * cross(rb, tangent).powi(2);
                out.push(Constraint {
                    a,
                    b,
                    ra,
                    rb,
                    normal: m.normal,
                    tangent,
                    separation: m.separation,
                    normal_mass: if kn > 0.0 { 1.0 / kn } else { 0.0 },
                    tangent_mass: if kt > 0.0 { 1.0 / kt } else { 0.0 },
                    normal_impulse: 0.0,
                    tangent_impulse: 0.0,
                });
            }
        });
        out
    }

    fn solve_velocities(&mut self, constraints: &mut [Constraint]) {
        let dt = self.cfg.dt;
        let mu = self.cfg.contact_friction_mu;
        for _ in 0..self.cfg.solver_iterations {
            for c in constraints.iter_mut() {
                // normal: relative approach speed may not exceed the gap closure rate
                let dv = self.velocity_at(c.b, c.rb) - self.velocity_at(c.a, c.ra);
                let vn = dv.dot(&c.normal);
                let allowed = c.separation.max(0.0) / dt;
                let lambda = -c.normal_mass * (vn + allowed);
                let new_impulse = (c.normal_impulse + lambda).max(0.0);
                let applied = new_impulse - c.normal_impulse;
                c.normal_impulse = new_impulse;
                let p = c.normal * applied;
                self.apply_impulse(c.a, c.ra, -p);
                self.apply_impulse(c.b, c.rb, p);

                let dv = self.velocity_at(c.b, c.rb) - self.velocity_at(c.a, c.ra);
                let vt = dv.dot(&c.tangent);
                let max_friction = mu * c.normal_impulse;
                let new_impulse =
                    (c.tangent_impulse - c.tangent_mass * vt).clamp(-max_friction, max_friction);
                let applied = new_impulse - c.tangent_impulse;
                c.tangent_impulse = new_impulse;
                let p = c.tangent * applied;
                self.apply_impulse(c.a, c.ra, -p);
                self.apply_impulse(c.b, c.rb, p);
            }
        }
    }

    /// Separates overlapping shapes by moving positions only.
    fn project_positions(&mut self) {
        let slop = 0.25 * self.cfg.penetration_tolerance;
        let max_iterations = 4 * self.cfg.solver_iterations.max(8);
        let mut moves: Vec<(usize, usize, Vec2, f64)> = Vec::new();
        for _ in 0..max_iterations {
            let mut worst = 0.0f64;
            moves.clear();
            self.manifolds(0.0, |a, b, pts| {
                let deepest =
                    pts.iter().fold(
                        pts[0],
                        |m, p| if p.separation < m.separation { *p } else { m },
                    );
                let depth = -deepest.separation;
                if depth > slop {
                    moves.push((a, b, deepest.normal, depth - slop));
                }
            });
            // Gauss-Seidel over the pairs found this sweep, re-measuring each.
            for &(a, b, _, _) in moves.iter() {
                let mut pts = Vec::with_capacity(4);
                match self.body(a) {
                    Some(ba) => collide(&ba.geom(), &self.bodies[b].geom(), 0.0, &mut pts),
                    None => collide_walls(&self.bodies[b].geom(), &self.ws, 0.0, &mut pts),
                }
                let Some(deepest) =
                    pts.iter()
                        .copied()
                        .reduce(|m, p| if p.separation < m.separation { p } else { m })
                else {
                    continue;
                };
                let depth = -deepest.separation;
                worst = worst.max(depth);
                if depth <= slop {
                    continue;
                }
                let (ima, _) = self.inv_mass(a);
                let (imb, _) = self.inv_mass(b);
                let total = ima + imb;
                if total == 0.0 {
                    continue;
                }
                let correction = deepest.normal * (depth - slop);
                if a != WALL {
                    self.bodies[a].pos -= correction * (ima / total);
                }
                self.bodies[b].pos += correction * (imb / total);
            }
            if worst <= slop {
                break;
            }
        }
    }
}

/// Applies floor friction to a speed: reduces it by `decel·dt`, stopping at 0.
fn friction_scale(speed: f64, decel_dt: f64) -> f64 {
    if speed <= decel_dt {
        0.0
    } else {
        1.0 - decel_dt / speed
    }
}

/// Advances the scene by one control period under `action`.
pub fn step(
    state: &SceneState,
    action: &RobotAction,
    cfg: &PhysicsConfig,
) -> Result<(SceneState, StepReport), PhysicsError> {
    if !state.is_finite() {
        return Err(PhysicsError::NonFiniteState);
    }
    if !action.is_finite() {
        return Err(PhysicsError::NonFiniteAction);
    }
    let dt = cfg.dt;
    let decel_dt = cfg.floor_friction_mu * GRAVITY * dt;

    let mut bodies = Vec::with_capacity(state.objects.len() + 1);
    bodies.push(Body {
        pos: state.robot.position(),
        angle: state.robot.pose.theta,
        vel: clamp_norm(action.velocity + action.acceleration * dt, cfg.limits.v_max),
        omega: 0.0,
        inv_mass: 1.0 / cfg.robot_mass,
        inv_inertia: 0.0,
        shape: Shape::Disc {
            radius: cfg.robot_radius,
        },
    });
    for o in &state.objects {
        let speed = o.linear_velocity.norm();
        let vel = if speed > 0.0 {
            o.linear_velocity * friction_scale(speed, decel_dt)
        } else {
            o.linear_velocity
        };
        let rim = o.shape.bounding_radius();
        let omega = if o.angular_velocity != 0.0 {
            o.angular_velocity * friction_scale(o.angular_velocity.abs(), decel_dt / rim)
        } else {
            0.0
        };
        bodies.push(Body {
            pos: o.position(),
            angle: o.pose.theta,
            vel,
            omega,
            inv_mass: 1.0 / o.mass,
            inv_inertia: 1.0 / o.shape.inertia(o.mass),
            shape: o.shape,
        });
    }

    let mut world = World {
        bodies,
        cfg,
        ws: state.workspace,
    };
    let mut constraints = world.build_constraints();
    world.solve_velocities(&mut constraints);

    for b in world.bodies.iter_mut() {
        b.pos += b.vel * dt;
        b.angle += b.omega * dt;
    }
    world.project_positions();

    let id_of = |i: usize| match i {
        WALL => BodyId::Wall,
        0 => BodyId::Robot,
        k => BodyId::Object(state.objects[k - 1].id),
    };
    let contacts = constraints
        .iter()
        .filter(|c| c.separation <= 0.0 || c.normal_impulse > 0.0)
        .map(|c| ContactRecord {
            a: id_of(c.a),
            b: id_of(c.b),
            point: match world.body(c.a) {
                Some(_) => c.ra + state_pos(state, c.a),
                None => c.rb + state_pos(state, c.b),
            },
            normal: c.normal,
        })
        .collect();

    let mut next = state.clone();
    next.time = state.time + dt;
    let robot = &world.bodies[0];
    next.robot.pose.set_position(robot.pos);
    next.robot.velocity = robot.vel;
    let mut displaced_ids = Vec::new();
    for (o, b) in next.objects.iter_mut().zip(&world.bodies[1..]) {
        let before = o.pose;
        o.pose.x = b.pos.x;
        o.pose.y = b.pos.y;
        o.pose.theta = wrap_angle(b.angle);
        o.linear_velocity = b.vel;
        o.angular_velocity = b.omega;
        if pose_distance(&before, &o.pose, cfg.angular_weight) > cfg.displacement_epsilon {
            displaced_ids.push(o.id);
        }
    }
    Ok((
        next,
        StepReport {
            contacts,
            displaced_ids,
        },
    ))
}

fn state_pos(state: &SceneState, i: usize) -> Vec2 {
    if i == 0 {
        state.robot.position()
    } else {
        state.objects[i - 1].position()
    }
}

/// Deep copy of a scene; stepping the copy never touches the original.
pub fn clone_state(state: &SceneState) -> SceneState {
    state.clone()
}

/// Folds `step` over `actions`, returning every successor state and report.
pub fn rollout(
    state: &SceneState,
    actions: &[RobotAction],
    cfg: &PhysicsConfig,
) -> Result<(Vec<SceneState>, Vec<StepReport>), PhysicsError> {
    if actions.is_empty() {
        return Err(PhysicsError::EmptyRollout);
    }
    let mut states = Vec::with_capacity(actions.len());
    let mut reports = Vec::with_capacity(actions.len());
    let mut current = state.clone();
    for (index, action) in actions.iter().enumerate() {
        let (next, report) = step(&current, action, cfg).map_err(|e| PhysicsError::Rollout {
            index,
            source: Box::new(e),
        })?;
        states.push(next.clone());
        reports.push(report);
        current = next;
    }
    Ok((states, reports))
}

/// Largest overlap between any two shapes (robot included) or a shape and a wall.
pub fn max_penetration(state: &SceneState, cfg: &PhysicsConfig) -> f64 {
    let mut geoms: Vec<Geom> = Vec::with_capacity(state.objects.len() + 1);
    geoms.push(Geom {
        center: state.robot.position(),
        angle: state.robot.pose.theta,
        shape: Shape::Disc {
            radius: cfg.robot_radius,
        },
    });
    geoms.extend(state.objects.iter().map(|o| Geom {
        center: o.position(),
        angle: o.pose.theta,
        shape: o.shape,
    }));
    let mut worst = 0.0f64;
    for (i, a) in geoms.iter().enumerate() {
        worst = worst.max(contact::wall_penetration_depth(a, &state.workspace));
        for b in &geoms[i + 1..] {
            worst = worst.max(contact::penetration_depth(a, b));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ObjectState, Pose2, RobotState, Workspace};

    fn scene(objects: Vec<ObjectState>, robot: RobotState) -> SceneState {
        SceneState {
            objects,
            robot,
            time: 0.0,
            workspace: Workspace::default(),
        }
    }

    fn disc(id: u32, x: f64, y: f64, r: f64) -> ObjectState {
        ObjectState::new(id, Shape::Disc { radius: r }, Pose2::new(x, y, 0.0), 0.5)
    }

    #[test]
    fn ballistic_robot() {
        let s = scene(vec![], RobotState::at(1.0, 1.0));
        let cfg = PhysicsConfig {
            dt: 0.1,
            ..Default::default()
        };
        let a = RobotAction::new(Vec2::new(0.1, 0.0), Vec2::zeros());
        let (n, r) = step(&s, &a, &cfg).unwrap();
        assert!((n.robot.pose.x - 1.01).abs() < 1e-15);
        assert_eq!(n.robot.pose.y, 1.0);
        assert!(r.contacts.is_empty());
    }

    #[test]
    fn acceleration_integrates_then_clamps() {
        let s = scene(vec![], RobotState::at(1.0, 1.0));
        let cfg = PhysicsConfig::default();
        let a = RobotAction::new(Vec2::new(0.49, 0.0), Vec2::new(2.0, 0.0));
        let (n, _) = step(&s, &a, &cfg).unwrap();
        assert!((n.robot.velocity.x - 0.5).abs() < 1e-15);
        assert!((n.robot.pose.x - (1.0 + 0.5 * 0.05)).abs() < 1e-15);
    }

    #[test]
    fn dead_center_push_moves_along_normal() {
        let s = scene(vec![disc(1, 1.0, 1.0, 0.05)], RobotState::at(0.9, 1.0));
        let cfg = PhysicsConfig::default();
        let a = RobotAction::new(Vec2::new(0.3, 0.0), Vec2::zeros());
        let (n, r) = step(&s, &a, &cfg).unwrap();
        let v = n.objects[0].linear_velocity;
        assert!(v.x > 0.0);
        assert!(v.y.atan2(v.x).abs() < 1e-6);
        assert!(!r.contacts.is_empty());
        assert_eq!(r.displaced_ids, vec![1]);
    }

    #[test]
    fn far_robot_leaves_objects_alone() {
        let s = scene(
            vec![disc(1, 0.5, 0.5, 0.05), disc(2, 1.5, 1.5, 0.05)],
            RobotState::at(1.5, 0.3),
        );
        let a = RobotAction::new(Vec2::new(0.2, 0.1), Vec2::zeros());
        let (n, r) = step(&s, &a, &PhysicsConfig::default()).unwrap();
        assert_eq!(n.objects[0].pose, s.objects[0].pose);
        assert_eq!(n.objects[1].pose, s.objects[1].pose);
        assert!(r.displaced_non_target_ids(1).is_empty());
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let s = scene(vec![], RobotState::at(1.0, 1.0));
        let bad = RobotAction::new(Vec2::new(f64::NAN, 0.0), Vec2::zeros());
        assert_eq!(
            step(&s, &bad, &PhysicsConfig::default()),
            Err(PhysicsError::NonFiniteAction)
        );
        let mut s2 = s.clone();
        s2.robot.pose.x = f64::INFINITY;
        assert_eq!(
            step(&s2, &RobotAction::hold(), &PhysicsConfig::default()),
            Err(PhysicsError::NonFiniteState)
        );
    }

    #[test]
    fn friction_stops_sliding_object_exactly() {
        let mut o = disc(1, 1.0, 1.0, 0.05);
        o.linear_velocity = Vec2::new(0.5, 0.0);
        let mut s = scene(vec![o], RobotState::at(0.2, 0.2));
        let cfg = PhysicsConfig::default();
        let mut steps = 0;
        while s.objects[0].linear_velocity.norm() > 0.0 {
            s = step(&s, &RobotAction::hold(), &cfg).unwrap().0;
            steps += 1;
            assert!(steps < 10);
        }
        assert_eq!(s.objects[0].linear_velocity, Vec2::zeros());
    }

    #[test]
    fn robot_cannot_leave_workspace() {
        let s = scene(vec![], RobotState::at(0.06, 1.0));
        let cfg = PhysicsConfig::default();
        let mut cur = s;
        for _ in 0..10 {
            let a = RobotAction::new(Vec2::new(-0.5, 0.0), Vec2::zeros());
            cur = step(&cur, &a, &cfg).unwrap().0;
        }
        assert!(cur.robot.pose.x >= cfg.robot_radius - cfg.penetration_tolerance);
    }

    #[test]
    fn rollout_is_a_fold_and_requires_actions() {
        let s = scene(vec![disc(1, 1.0, 1.0, 0.05)], RobotState::at(0.5, 1.0));
        let cfg = PhysicsConfig::default();
        let a = RobotAction::new(Vec2::new(0.3, 0.0), Vec2::zeros());
        let (states, reports) = rollout(&s, &[a; 3], &cfg).unwrap();
        let mut manual = s.clone();
        for st in &states {
            manual = step(&manual, &a, &cfg).unwrap().0;
            assert_eq!(manual.snapshot(), st.snapshot());
        }
        assert_eq!(reports.len(), 3);
        assert_eq!(rollout(&s, &[], &cfg), Err(PhysicsError::EmptyRollout));
    }

    #[test]
    fn rollout_reports_failing_index() {
        let s = scene(vec![], RobotState::at(1.0, 1.0));
        let good = RobotAction::hold();
        let bad = RobotAction::new(Vec2::new(f64::NAN, 0.0), Vec2::zeros());
        match rollout(&s, &[good, bad], &PhysicsConfig::default()) {
            Err(PhysicsError::Rollout { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn clone_is_independent() {
        let s = scene(vec![disc(1, 1.0, 1.0, 0.05)], RobotState::at(0.9, 1.0));
        let before = s.snapshot();
        let c = clone_state(&s);
        assert_eq!(c, s);
        let _ = step(
            &c,
            &RobotAction::new(Vec2::new(0.3, 0.0), Vec2::zeros()),
            &PhysicsConfig::default(),
        );
        assert_eq!(s.snapshot(), before);
    }
}
