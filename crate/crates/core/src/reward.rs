//! Step reward (goal progress minus displacement of every other object)
//! and its discounted sum over a rollout.

use crate::error::RewardError;
use crate::types::{pose_distance, PushTask, RewardConfig, SceneState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReward {
    /// Decrease of the target-to-goal distance over the step.
    pub progress: f64,
    /// Summed pose change of the non-target objects.
    pub collision_penalty: f64,
    pub value: f64,
    pub collision_event: bool,
}

/// Reward for the transition `prev → next`.
pub fn step_reward(
    prev: &SceneState,
    next: &SceneState,
    task: &PushTask,
    cfg: &RewardConfig,
) -> Result<StepReward, RewardError> {
    if prev.objects.len() != next.objects.len()
        || prev
            .objects
            .iter()
            .zip(&next.objects)
            .any(|(a, b)| a.id != b.id)
    {
        return Err(RewardError::MismatchedObjects);
    }
    let distance = |s: &SceneState| {
        s.object(task.target_id)
            .map(|t| (t.position() - task.goal).norm())
            .ok_or(RewardError::MissingTarget(task.target_id))
    };
    let progress = distance(prev)? - distance(next)?;
    let collision_penalty: f64 = prev
        .objects
        .iter()
        .zip(&next.objects)
        .filter(|(a, _)| a.id != task.target_id)
        .map(|(a, b)| pose_distance(&b.pose, &a.pose, cfg.angular_weight))
        .sum();
    Ok(StepReward {
        progress,
        collision_penalty,
        value: progress - collision_penalty,
        collision_event: collision_penalty > cfg.collision_epsilon,
    })
}

/// `Σ_k γ^k r_k`.
pub fn trajectory_reward(rewards: &[f64], gamma: f64) -> Result<f64, RewardError> {
    if rewards.is_empty() {
        return Err(RewardError::EmptyTrajectory);
    }
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    Ok(total)
}
