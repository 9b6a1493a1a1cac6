//! Random-shooting MPC and its open-loop variant.
//!
//! Each candidate is a piecewise-constant velocity sequence: a direction
//! uniform on the circle and a speed uniform in `(0, v_max]`, resampled every
//! `mpc_resample_every` steps. The cost is the predicted final target-to-goal
//! distance, the mean over the rollout of how far obstacles intrude into a
//! clearance band, and the pusher's final distance to the staging point
//! behind the target.

use std::f64::consts::TAU;

use rand::Rng;
use rayon::prelude::*;

use super::{step_rng, Planner};
use crate::error::PlanError;
use crate::physics::{rollout, step};
use crate::types::{PushTask, RobotAction, SceneState, Vec2};

pub fn sample_action_sequence(
    rng: &mut impl Rng,
    len: usize,
    every: usize,
    v_max: f64,
) -> Vec<RobotAction> {
    let mut out = Vec::with_capacity(len);
    let mut current = RobotAction::hold();
    for i in 0..len {
        if i % every == 0 {
            let heading = rng.random::<f64>() * TAU;
            let speed = v_max * (1.0 - rng.random::<f64>());
            current = RobotAction::new(
                Vec2::new(heading.cos(), heading.sin()) * speed,
                Vec2::zeros(),
            );
        }
        out.push(current);
    }
    out
}

/// Cost of a predicted state sequence; lower is better.
pub fn mpc_candidate_cost(states: &[SceneState], task: &PushTask, planner: &Planner) -> f64 {
    let cfg = &planner.config;
    let d_active = cfg.mpc_clearance;
    let robot_radius = planner.physics.robot_radius;
    let mut proximity = 0.0;
    for s in states {
        let Some(target) = s.object(task.target_id) else {
            return f64::INFINITY;
        };
        let target_radius = target.shape.bounding_radius();
        for o in s.objects.iter().filter(|o| o.id != task.target_id) {
            let r = o.shape.bounding_radius();
            let robot_gap = (s.robot.position() - o.position()).norm() - r - robot_radius;
            let target_gap = (target.position() - o.position()).norm() - r - target_radius;
            proximity += (d_active - robot_gap.min(target_gap)).max(0.0);
        }
    }
    let Some(last) = states.last() else {
        return f64::INFINITY;
    };
    let Some(target) = last.object(task.target_id) else {
        return f64::INFINITY;
    };
    let to_goal = task.goal - target.position();
    let distance = to_goal.norm();
    let heading = if distance > 0.0 {
        to_goal / distance
    } else {
        Vec2::new(1.0, 0.0)
    };
    let staging = target.position()
        - heading
            * (0.5 * target.mean_extent() + robot_radius + planner.control.gains.approach_margin);
    let reach = (last.robot.position() - staging).norm();
    let proximity = proximity / states.len() as f64;
    distance + cfg.mpc_obstacle_weight * proximity + cfg.mpc_reach_weight * reach
}

/// Index of the smallest cost; the lowest index wins ties.
fn argmin(costs: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &c) in costs.iter().enumerate() {
        if c.is_finite() && best.is_none_or(|b| c < costs[b]) {
            best = Some(i);
        }
    }
    best
}

pub fn mpc_plan(
    state: &SceneState,
    task: &PushTask,
    planner: &Planner,
) -> Result<RobotAction, PlanError> {
    let cfg = &planner.config;
    cfg.validate()?;
    let mut rng = step_rng(cfg.seed, state);
    let v_max = planner.physics.limits.v_max;
    let sequences: Vec<Vec<RobotAction>> = (0..cfg.samples_k)
        .map(|_| sample_action_sequence(&mut rng, cfg.horizon_h, cfg.mpc_resample_every, v_max))
        .collect();
    let costs: Vec<f64> = sequences
        .par_iter()
        .map(|seq| match rollout(state, seq, &planner.physics) {
            Ok((states, _)) => mpc_candidate_cost(&states, task, planner),
            Err(_) => f64::INFINITY,
        })
        .collect();
    let best = argmin(&costs).ok_or(PlanError::AllRolloutsFailed)?;
    Ok(sequences[best][0])
}

/// Plans the whole push in imagination by iterating MPC on the model until
/// the target is predicted to reach the goal, then returns the action list.
pub fn open_loop_plan(
    state: &SceneState,
    task: &PushTask,
    planner: &Planner,
) -> Result<Vec<RobotAction>, PlanError> {
    let max_steps = planner.config.max_steps;
    if max_steps == 0 {
        return Err(PlanError::ZeroMaxSteps);
    }
    let mut imagined = state.clone();
    let mut actions = Vec::new();
    for _ in 0..max_steps {
        let action = mpc_plan(&imagined, task, planner)?;
        imagined = step(&imagined, &action, &planner.physics)?.0;
        actions.push(action);
        if task.target_distance(&imagined) <= task.goal_tolerance {
            break;
        }
    }
    let best_distance = task.target_distance(&imagined);
    if best_distance > 2.0 * task.goal_tolerance {
        return Err(PlanError::GoalUnreachable { best_distance });
    }
    Ok(actions)
}
