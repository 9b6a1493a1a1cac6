//! Planners sharing one interface: given the current scene and task, emit
//! the next action (or, for the open-loop baseline, a whole sequence).

mod mpc;
mod rmpc;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::PlanError;
use crate::physics::PhysicsConfig;
use crate::rmp::{control_detailed, ControlConfig, Obstacles, RmpWeights};
use crate::types::{PushTask, RewardConfig, RobotAction, SceneState};

pub use mpc::{mpc_candidate_cost, mpc_plan, open_loop_plan, sample_action_sequence};
pub use rmpc::{rmpc_candidates, rmpc_plan, sample_weights, RmpcDecision, RolloutCandidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlannerKind {
    Rmpc,
    Rmp,
    Mpc,
    OpenLoop,
    Direct,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::Rmpc,
        PlannerKind::Rmp,
        PlannerKind::Mpc,
        PlannerKind::OpenLoop,
        PlannerKind::Direct,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::Rmpc => "rmpc",
            PlannerKind::Rmp => "rmp",
            PlannerKind::Mpc => "mpc",
            PlannerKind::OpenLoop => "open_loop",
            PlannerKind::Direct => "direct",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub kind: PlannerKind,
    /// Number of candidates per control step (including the nominal one).
    pub samples_k: usize,
    pub horizon_h: usize,
    /// Bounds of the log-uniform node-weight distribution.
    pub weight_log_range: (f64, f64),
    pub seed: u64,
    /// Candidate 0 of every RMPC step uses the nominal weights.
    pub include_nominal: bool,
    pub sample_policy_weights: bool,
    pub sample_field_alphas: bool,
    /// MPC holds each sampled velocity for this many steps.
    pub mpc_resample_every: usize,
    pub mpc_obstacle_weight: f64,
    /// Clearance below which MPC starts charging for obstacle proximity.
    pub mpc_clearance: f64,
    /// MPC weight on the pusher's final distance to the staging point.
    pub mpc_reach_weight: f64,
    /// Longest sequence the open-loop planner may produce.
    pub max_steps: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            kind: PlannerKind::Rmpc,
            samples_k: 16,
            horizon_h: 20,
            weight_log_range: (0.1, 10.0),
            seed: 0,
            include_nominal: true,
            sample_policy_weights: true,
            sample_field_alphas: true,
            mpc_resample_every: 20,
            mpc_obstacle_weight: 1.0,
            mpc_clearance: 0.3,
            mpc_reach_weight: 1.0,
            max_steps: 400,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        let (low, high) = self.weight_log_range;
        let problem = if self.samples_k == 0 {
            Some("samples_K must be at least 1")
        } else if self.horizon_h == 0 {
            Some("horizon_H must be at least 1")
        } else if !(low > 0.0 && low <= high && high.is_finite()) {
            Some("weight range must satisfy 0 < low <= high")
        } else if self.include_nominal && !(low <= 1.0 && 1.0 <= high) {
            Some("nominal weight 1.0 must lie inside the weight range")
        } else if self.mpc_resample_every == 0 {
            Some("mpc_resample_every must be at least 1")
        } else {
            None
        };
        match problem {
            Some(p) => Err(PlanError::InvalidConfig(p.to_string())),
            None => Ok(()),
        }
    }
}

/// Everything a planner needs: its own knobs plus the controller, the
/// look-ahead physics model and the reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Planner {
    pub config: PlannerConfig,
    pub control: ControlConfig,
    pub physics: PhysicsConfig,
    pub reward: RewardConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Plan {
    /// Execute one action, then replan.
    Action(RobotAction),
    /// Execute the whole sequence without feedback.
    Sequence(Vec<RobotAction>),
}

impl Planner {
    pub fn new(config: PlannerConfig) -> Self {
        Self {
            config,
            control: ControlConfig::default(),
            physics: PhysicsConfig::default(),
            reward: RewardConfig::default(),
        }
    }

    pub fn with_kind(&self, kind: PlannerKind) -> Self {
        let mut p = *self;
        p.config.kind = kind;
        p
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut p = *self;
        p.config.seed = seed;
        p
    }

    pub fn plan(&self, state: &SceneState, task: &PushTask) -> Result<Plan, PlanError> {
        match self.config.kind {
            PlannerKind::Rmpc => rmpc_plan(state, task, self).map(Plan::Action),
            PlannerKind::Rmp => {
                rmp_plan(state, task, &RmpWeights::nominal_for(state), &self.control)
                    .map(Plan::Action)
            }
            PlannerKind::Mpc => mpc_plan(state, task, self).map(Plan::Action),
            PlannerKind::OpenLoop => open_loop_plan(state, task, self).map(Plan::Sequence),
            PlannerKind::Direct => direct_plan(state, task, &self.control).map(Plan::Action),
        }
    }
}

/// Closed-loop RMP control with fixed weights.
pub fn rmp_plan(
    state: &SceneState,
    task: &PushTask,
    weights: &RmpWeights,
    control: &ControlConfig,
) -> Result<RobotAction, PlanError> {
    Ok(control_detailed(state, task, weights, control, Obstacles::Avoid)?.action)
}

/// Goal-directed pushing that ignores every non-target object.
pub fn direct_plan(
    state: &SceneState,
    task: &PushTask,
    control: &ControlConfig,
) -> Result<RobotAction, PlanError> {
    let weights = RmpWeights::nominal_for(state);
    Ok(control_detailed(state, task, &weights, control, Obstacles::Ignore)?.action)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-call generator keyed on the planner seed and the scene clock, so a
/// planner stays a pure function of (state, task, config).
pub(crate) fn step_rng(seed: u64, state: &SceneState) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(state.time.to_bits())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{ObjectState, Pose2, RobotState, Shape, Vec2, Workspace};

    pub(crate) fn two_object_scene() -> (SceneState, PushTask) {
        let s = SceneState {
            objects: vec![
                ObjectState::new(
                    1,
                    Shape::Disc { radius: 0.04 },
                    Pose2::new(0.8, 1.0, 0.0),
                    0.4,
                ),
                ObjectState::new(
                    2,
                    Shape::Box {
                        width: 0.08,
                        length: 0.06,
                    },
                    Pose2::new(1.2, 1.05, 0.3),
                    0.4,
                ),
            ],
            robot: RobotState::at(0.3, 0.7),
            time: 0.0,
            workspace: Workspace::default(),
        };
        let task = PushTask {
            target_id: 1,
            goal: Vec2::new(1.6, 1.0),
            goal_tolerance: 0.05,
        };
        (s, task)
    }

    #[test]
    fn kinds_parse_and_print() {
        for k in PlannerKind::ALL {
            assert_eq!(k.name().parse::<PlannerKind>().unwrap(), k);
        }
        assert!("rrt".parse::<PlannerKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(PlannerConfig::default().validate().is_ok());
        let bad = PlannerConfig {
            weight_log_range: (2.0, 10.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let zero = PlannerConfig {
            samples_k: 0,
            ..Default::default()
        };
        assert!(zero.validate().is_err());
    }

    #[test]
    fn direct_matches_rmp_without_obstacles() {
        let (mut s, task) = two_object_scene();
        s.objects.truncate(1);
        let c = ControlConfig::default();
        let a = rmp_plan(&s, &task, &RmpWeights::nominal(0), &c).unwrap();
        let b = direct_plan(&s, &task, &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn direct_ignores_obstacles() {
        let (s, task) = two_object_scene();
        let mut lone = s.clone();
        lone.objects.truncate(1);
        let c = ControlConfig::default();
        assert_eq!(
            direct_plan(&s, &task, &c).unwrap(),
            direct_plan(&lone, &task, &c).unwrap()
        );
    }

    #[test]
    fn rmp_is_stateless() {
        let (s, task) = two_object_scene();
        let c = ControlConfig::default();
        let w = RmpWeights::nominal_for(&s);
        assert_eq!(
            rmp_plan(&s, &task, &w, &c).unwrap(),
            rmp_plan(&s, &task, &w, &c).unwrap()
        );
    }

    #[test]
    fn rmp_is_sensitive_to_obstacle_weight() {
        let (mut s, task) = two_object_scene();
        s.robot = RobotState {
            pose: Pose2::new(1.35, 1.2, 0.0),
            velocity: Vec2::new(-0.2, -0.1),
        };
        let c = ControlConfig::default();
        let base = rmp_plan(&s, &task, &RmpWeights::nominal_for(&s), &c).unwrap();
        let mut w = RmpWeights::nominal_for(&s);
        w.obstacles[0] = 10.0;
        let heavy = rmp_plan(&s, &task, &w, &c).unwrap();
        let diff = (base.acceleration - heavy.acceleration).norm()
            + (base.velocity - heavy.velocity).norm();
        assert!(diff > 1e-6, "diff {diff}");
    }

    #[test]
    fn direct_engages_with_push_field() {
        let (mut s, task) = two_object_scene();
        s.robot = RobotState::at(0.8 - 0.04 - 0.05 - 0.02, 1.0);
        let a = direct_plan(&s, &task, &ControlConfig::default()).unwrap();
        let extent = 0.08;
        let rel = Vec2::new(-(0.04 + 0.05 + 0.02), 0.0);
        let field = crate::rmp::push_local_field(rel, extent, [1.0; 4]) * 30.0;
        assert!((a.velocity - field).norm() < 1e-12);
        assert_eq!(a.acceleration, Vec2::zeros());
    }
}
