//! Riemannian motion predictive control: sample node weights, imagine each
//! weighted controller for `horizon_h` steps on a copy of the scene, score
//! the imagined steps with the discounted reward, and keep the first action
//! of the best rollout.

use rand::Rng;
use rayon::prelude::*;

use super::{step_rng, Planner, PlannerConfig};
use crate::error::PlanError;
use crate::physics::{clone_state, step};
use crate::reward::{step_reward, trajectory_reward};
use crate::rmp::{control, RmpWeights};
use crate::types::{PushTask, RobotAction, SceneState};

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutCandidate {
    pub weights: RmpWeights,
    pub actions: Vec<RobotAction>,
    pub states: Vec<SceneState>,
    pub rewards: Vec<f64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmpcDecision {
    /// One entry per sampled weight vector; `None` when its rollout failed.
    pub candidates: Vec<Option<RolloutCandidate>>,
    pub selected: usize,
}

impl RmpcDecision {
    pub fn action(&self) -> RobotAction {
        self.candidates[self.selected]
            .as_ref()
            .expect("selected candidate exists")
            .actions[0]
    }

    pub fn selected_candidate(&self) -> &RolloutCandidate {
        self.candidates[self.selected]
            .as_ref()
            .expect("selected candidate exists")
    }
}

fn log_uniform(rng: &mut impl Rng, (low, high): (f64, f64)) -> f64 {
    if low == high {
        return low;
    }
    let u: f64 = rng.random();
    (low.ln() + u * (high.ln() - low.ln())).exp()
}

/// Weight vectors for one control step. Candidate 0 is nominal when
/// `include_nominal` is set; frozen groups stay at 1.
pub fn sample_weights(
    cfg: &PlannerConfig,
    n_obstacles: usize,
    state: &SceneState,
) -> Vec<RmpWeights> {
    let mut rng = step_rng(cfg.seed, state);
    (0..cfg.samples_k)
        .map(|i| {
            let mut w = RmpWeights::nominal(n_obstacles);
            if i == 0 && cfg.include_nominal {
                return w;
            }
            // Draw every group so freezing one does not shift the other's stream.
            let attractor = log_uniform(&mut rng, cfg.weight_log_range);
            let obstacles: Vec<f64> = (0..n_obstacles)
                .map(|_| log_uniform(&mut rng, cfg.weight_log_range))
                .collect();
            let alphas: [f64; 4] =
                std::array::from_fn(|_| log_uniform(&mut rng, cfg.weight_log_range));
            if cfg.sample_policy_weights {
                w.attractor = attractor;
                w.obstacles = obstacles;
            }
            if cfg.sample_field_alphas {
                w.field_alphas = alphas;
            }
            w
        })
        .collect()
}

fn imagine(
    state: &SceneState,
    task: &PushTask,
    weights: RmpWeights,
    planner: &Planner,
) -> Result<RolloutCandidate, PlanError> {
    let h = planner.config.horizon_h;
    let mut actions = Vec::with_capacity(h);
    let mut states = Vec::with_capacity(h);
    let mut rewards = Vec::with_capacity(h);
    let mut current = clone_state(state);
    for _ in 0..h {
        let action = control(&current, task, &weights, &planner.control)?;
        let (next, _) = step(&current, &action, &planner.physics)?;
        rewards.push(step_reward(&current, &next, task, &planner.reward)?.value);
        actions.push(action);
        states.push(next.clone());
        current = next;
    }
    let score = trajectory_reward(&rewards, planner.reward.gamma)?;
    Ok(RolloutCandidate {
        weights,
        actions,
        states,
        rewards,
        score,
    })
}

/// Runs every candidate rollout and picks the highest score (lowest index on ties).
pub fn rmpc_candidates(
    state: &SceneState,
    task: &PushTask,
    planner: &Planner,
) -> Result<RmpcDecision, PlanError> {
    planner.config.validate()?;
    let n_obstacles = state.objects.len().saturating_sub(1);
    let weights = sample_weights(&planner.config, n_obstacles, state);
    let candidates: Vec<Option<RolloutCandidate>> = weights
        .into_par_iter()
        .map(|w| imagine(state, task, w, planner).ok())
        .collect();
    let mut selected: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(c) = c {
            let better = match selected {
                None => true,
                Some(j) => {
                    c.score
                        > candidates[j]
                            .as_ref()
                            .map_or(f64::NEG_INFINITY, |b| b.score)
                }
            };
            if better {
                selected = Some(i);
            }
        }
    }
    let selected = selected.ok_or(PlanError::AllRolloutsFailed)?;
    Ok(RmpcDecision {
        candidates,
        selected,
    })
}

pub fn rmpc_plan(
    state: &SceneState,
    task: &PushTask,
    planner: &Planner,
) -> Result<RobotAction, PlanError> {
    rmpc_candidates(state, task, planner).map(|d| d.action())
}

#[cfg(test)]
mod tests {
    use super::super::tests::two_object_scene;
    use super::super::{rmp_plan, PlannerKind};
    use super::*;

    fn planner(k: usize) -> Planner {
        Planner::new(PlannerConfig {
            kind: PlannerKind::Rmpc,
            samples_k: k,
            horizon_h: 8,
            seed: 11,
            ..Default::default()
        })
    }

    #[test]
    fn single_nominal_sample_equals_rmp() {
        let (s, task) = two_object_scene();
        let p = planner(1);
        let a = rmpc_plan(&s, &task, &p).unwrap();
        let b = rmp_plan(&s, &task, &RmpWeights::nominal_for(&s), &p.control).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selection_dominates_nominal() {
        let (s, task) = two_object_scene();
        let d = rmpc_candidates(&s, &task, &planner(6)).unwrap();
        let nominal = d.candidates[0].as_ref().unwrap();
        assert_eq!(nominal.weights, RmpWeights::nominal(1));
        assert!(d.selected_candidate().score >= nominal.score);
        for c in d.candidates.iter().flatten() {
            assert_eq!(c.actions.len(), 8);
            assert_eq!(c.score, trajectory_reward(&c.rewards, 0.95).unwrap());
        }
    }

    #[test]
    fn seeded_and_pure() {
        let (s, task) = two_object_scene();
        let before = s.snapshot();
        let p = planner(5);
        assert_eq!(
            rmpc_plan(&s, &task, &p).unwrap(),
            rmpc_plan(&s, &task, &p).unwrap()
        );
        assert_eq!(s.snapshot(), before);
    }

    #[test]
    fn weights_respect_range_and_frozen_groups() {
        let (s, _) = two_object_scene();
        let mut cfg = planner(20).config;
        cfg.weight_log_range = (0.5, 2.0);
        cfg.sample_field_alphas = false;
        let ws = sample_weights(&cfg, 3, &s);
        assert_eq!(ws.len(), 20);
        for w in &ws[1..] {
            assert_eq!(w.field_alphas, [1.0; 4]);
            assert_eq!(w.obstacles.len(), 3);
            assert!(std::iter::once(w.attractor)
                .chain(w.obstacles.iter().copied())
                .all(|v| (0.5..=2.0).contains(&v)));
        }
        cfg.sample_field_alphas = true;
        cfg.sample_policy_weights = false;
        let ws2 = sample_weights(&cfg, 3, &s);
        assert_eq!(ws2[1].attractor, 1.0);
        assert!(ws2[1..].iter().any(|w| w.field_alphas != [1.0; 4]));
    }
}
