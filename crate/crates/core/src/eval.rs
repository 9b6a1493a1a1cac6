//! Episode runner, collision-ratio metrics and CSV reports.
//!
//! The collision ratio of an episode is the number of steps with a collision
//! event divided by the number of steps taken. Recall at `k` is the fraction
//! of episodes whose ratio is at most `k`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{EvalError, SceneGenError};
use crate::physics::trajectory::{parse_csv, write_csv, Trajectory, TrajectoryRow};
use crate::physics::{step, PhysicsConfig};
use crate::planners::{Plan, Planner, PlannerKind};
use crate::reward::{step_reward, StepReward};
use crate::scene_file::{self, fmt9};
use crate::scenegen::{
    batch_seeds, generate_scene, read_manifest, scene_id, BatchError, SceneGenConfig,
};
use crate::types::{PushTask, RobotAction, SceneState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeConfig {
    pub max_steps: usize,
    /// Multiplies the target's mass in the executing world only; the planner
    /// keeps observing the nominal mass.
    pub target_mass_scale: f64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: 400,
            target_mass_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub action: RobotAction,
    pub reward: StepReward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub scene_id: String,
    pub planner: PlannerKind,
    pub config_hash: String,
    pub seed: u64,
    pub task: PushTask,
    pub object_ids: Vec<u32>,
    /// Row 0 is the initial state, row k the state after step k.
    pub rows: Vec<TrajectoryRow>,
    pub steps: Vec<StepRecord>,
    pub steps_taken: usize,
    pub success: bool,
    pub collision_events: usize,
    pub collision_ratio: f64,
    pub final_distance: f64,
    pub target_mass_scale: f64,
    pub dt: f64,
    /// Set when the planner gave up; the episode then ends early.
    pub failure: Option<String>,
}

/// Short hex digest identifying a planner setup.
pub fn config_hash(planner: &Planner, episode: &EpisodeConfig) -> String {
    let digest = Sha256::digest(format!("{planner:?}|{episode:?}").as_bytes());
    digest[..8].iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn perturbed(state: &SceneState, task: &PushTask, scale: f64) -> SceneState {
    let mut world = state.clone();
    if let Some(t) = world.object_mut(task.target_id) {
        t.mass *= scale;
    }
    world
}

/// Plan, step, score until the target is within tolerance or `max_steps` is
/// reached. Planner failures end the episode and are recorded, not raised.
pub fn run_episode(
    scene_id: &str,
    initial: &SceneState,
    task: &PushTask,
    planner: &Planner,
    cfg: &EpisodeConfig,
) -> EpisodeLog {
    let world_physics = planner.physics;
    let mut world = perturbed(initial, task, cfg.target_mass_scale);
    let nominal_mass = initial.object(task.target_id).map(|t| t.mass);
    let observe = |world: &SceneState| {
        let mut seen = world.clone();
        if let (Some(t), Some(m)) = (seen.object_mut(task.target_id), nominal_mass) {
            t.mass = m;
        }
        seen
    };

    let mut rows = vec![TrajectoryRow::from_state(
        0,
        &world,
        RobotAction::hold(),
        0.0,
        false,
    )];
    let mut steps = Vec::new();
    let mut failure = None;

    let mut sequence: Option<Vec<RobotAction>> = None;
    if planner.config.kind == PlannerKind::OpenLoop {
        match planner.plan(&observe(&world), task) {
            Ok(Plan::Sequence(seq)) => sequence = Some(seq),
            Ok(Plan::Action(a)) => sequence = Some(vec![a]),
            Err(e) => failure = Some(e.to_string()),
        }
    }

    for k in 0..cfg.max_steps.max(1) {
        let action = if failure.is_some() {
            // keep at least one executed step so the ratio is defined
            if k > 0 {
                break;
            }
            RobotAction::hold()
        } else if let Some(seq) = &sequence {
            match seq.get(k) {
                Some(a) => *a,
                None => break,
            }
        } else {
            match planner.plan(&observe(&world), task) {
                Ok(Plan::Action(a)) => a,
                Ok(Plan::Sequence(seq)) => seq.first().copied().unwrap_or_else(RobotAction::hold),
                Err(e) => {
                    failure = Some(e.to_string());
                    if k > 0 {
                        break;
                    }
                    RobotAction::hold()
                }
            }
        };
        let next = match step(&world, &action, &world_physics) {
            Ok((next, _)) => next,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        let reward = match step_reward(&world, &next, task, &planner.reward) {
            Ok(r) => r,
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        };
        rows.push(TrajectoryRow::from_state(
            k + 1,
            &next,
            action,
            reward.value,
            reward.collision_event,
        ));
        steps.push(StepRecord { action, reward });
        world = next;
        if task.target_distance(&world) <= task.goal_tolerance {
            break;
        }
    }

    let steps_taken = steps.len();
    let collision_events = steps.iter().filter(|s| s.reward.collision_event).count();
    let final_distance = task.target_distance(&world);
    EpisodeLog {
        scene_id: scene_id.to_string(),
        planner: planner.config.kind,
        config_hash: config_hash(planner, cfg),
        seed: planner.config.seed,
        task: *task,
        object_ids: initial.objects.iter().map(|o| o.id).collect(),
        rows,
        steps,
        steps_taken,
        success: final_distance <= task.goal_tolerance,
        collision_events,
        collision_ratio: if steps_taken == 0 {
            0.0
        } else {
            collision_events as f64 / steps_taken as f64
        },
        final_distance,
        target_mass_scale: cfg.target_mass_scale,
        dt: world_physics.dt,
        failure,
    }
}

impl EpisodeLog {
    pub fn trajectory_csv(&self) -> String {
        let meta = vec![
            ("scene_id".to_string(), self.scene_id.clone()),
            ("planner".to_string(), self.planner.to_string()),
            ("config_hash".to_string(), self.config_hash.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("dt".to_string(), format!("{}", self.dt)),
            (
                "target_mass_scale".to_string(),
                format!("{}", self.target_mass_scale),
            ),
            ("steps".to_string(), self.steps_taken.to_string()),
            ("success".to_string(), self.success.to_string()),
        ];
        write_csv(&meta, &self.object_ids, &self.rows)
    }

    pub fn summary_line(&self) -> String {
        format!(
            "success={} steps={} collision_ratio={}",
            self.success,
            self.steps_taken,
            fmt9(self.collision_ratio)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayVerdict {
    Match,
    /// First step whose re-simulated state differs from the logged one.
    Diverged {
        step: usize,
    },
}

/// Re-simulates the logged actions from `initial` and compares every logged
/// state after an action bit for bit.
pub fn replay(
    initial: &SceneState,
    task: &PushTask,
    traj: &Trajectory,
    physics: &PhysicsConfig,
) -> ReplayVerdict {
    let scale = traj
        .meta_value("target_mass_scale")
        .and_then(|v| v.parse().ok())
        .unwrap_or(1.0);
    let mut physics = *physics;
    if let Some(dt) = traj.meta_value("dt").and_then(|v| v.parse().ok()) {
        physics.dt = dt;
    }
    let mut world = perturbed(initial, task, scale);
    for row in traj.rows.iter().skip(1) {
        let Ok((next, _)) = step(&world, &row.action, &physics) else {
            return ReplayVerdict::Diverged { step: row.step };
        };
        let expected =
            TrajectoryRow::from_state(row.step, &next, row.action, row.reward, row.collision);
        if !expected.same_state(row) {
            return ReplayVerdict::Diverged { step: row.step };
        }
        world = next;
    }
    ReplayVerdict::Match
}

pub fn replay_text(
    initial: &SceneState,
    task: &PushTask,
    csv: &str,
    physics: &PhysicsConfig,
) -> Result<ReplayVerdict, EvalError> {
    let traj = parse_csv(csv).map_err(EvalError::Trajectory)?;
    Ok(replay(initial, task, &traj, physics))
}

pub fn recall_at_k(ratios: &[f64], k: f64) -> Result<f64, EvalError> {
    if ratios.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(ratios.iter().filter(|&&r| r <= k).count() as f64 / ratios.len() as f64)
}

pub fn recall_curve(ratios: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>, EvalError> {
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.iter().any(|k| !(0.0..=1.0).contains(k)) {
        return Err(EvalError::BadGrid);
    }
    grid.iter()
        .map(|&k| Ok((k, recall_at_k(ratios, k)?)))
        .collect()
}

/// `0, 0.05, ..., 1`.
pub fn default_k_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn ratios(logs: &[&EpisodeLog]) -> Vec<f64> {
    logs.iter().map(|l| l.collision_ratio).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchScene {
    pub scene_id: String,
    pub seed: u64,
    pub state: SceneState,
    pub task: PushTask,
}

/// Generates an in-memory batch with the same ids and seeds `write_batch` uses.
pub fn generate_batch(cfg: &SceneGenConfig, n: usize) -> Result<Vec<BatchScene>, SceneGenError> {
    batch_seeds(cfg.seed, n)
        .map(|(i, seed)| {
            let (state, task) = generate_scene(&cfg.with_seed(seed))?;
            Ok(BatchScene {
                scene_id: scene_id(i),
                seed,
                state,
                task,
            })
        })
        .collect()
}

/// Loads every scene listed in a manifest, in manifest order.
pub fn load_batch(manifest: &Path) -> Result<Vec<BatchScene>, BatchError> {
    read_manifest(manifest)?
        .into_iter()
        .map(|e| {
            let (state, task) = scene_file::load(&e.path)?;
            Ok(BatchScene {
                scene_id: e.scene_id,
                seed: e.seed,
                state,
                task,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSummary {
    pub planner: PlannerKind,
    pub episodes: usize,
    pub mean_ratio: f64,
    pub success_rate: f64,
    pub mean_final_distance: f64,
    pub planner_failures: usize,
    pub recall: Vec<(f64, f64)>,
    /// Recall over successful episodes only; `None` where there are none.
    pub recall_success: Vec<(f64, Option<f64>)>,
    pub successes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Grouped by planner in request order, sorted by scene id within a group.
    pub logs: Vec<EpisodeLog>,
    pub summaries: Vec<PlannerSummary>,
    pub k_grid: Vec<f64>,
}

/// The seed a planner uses on a batch scene.
pub fn episode_seed(planner: &Planner, scene: &BatchScene) -> u64 {
    planner.config.seed.wrapping_add(scene.seed)
}

pub fn compare_planners(
    scenes: &[BatchScene],
    planners: &[Planner],
    episode: &EpisodeConfig,
    k_grid: &[f64],
) -> Result<Comparison, EvalError> {
    compare_planners_with_progress(scenes, planners, episode, k_grid, &|_, _| {})
}

/// Like [`compare_planners`], calling `progress(done, total)` after each
/// episode. Calls may come from any worker thread.
pub fn compare_planners_with_progress(
    scenes: &[BatchScene],
    planners: &[Planner],
    episode: &EpisodeConfig,
    k_grid: &[f64],
    progress: &(dyn Fn(usize, usize) + Sync),
) -> Result<Comparison, EvalError> {
    if scenes.is_empty() || planners.is_empty() {
        return Err(EvalError::Empty);
    }
    recall_curve(&[0.0], k_grid)?;
    let jobs: Vec<(usize, usize)> = (0..planners.len())
        .flat_map(|p| (0..scenes.len()).map(move |s| (p, s)))
        .collect();
    let done = AtomicUsize::new(0);
    let mut logs: Vec<(usize, EpisodeLog)> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let scene = &scenes[s];
            let planner = planners[p].with_seed(episode_seed(&planners[p], scene));
            let log = run_episode(
                &scene.scene_id,
                &scene.state,
                &scene.task,
                &planner,
                episode,
            );
            progress(done.fetch_add(1, Ordering::Relaxed) + 1, jobs.len());
            (p, log)
        })
        .collect();
    logs.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.scene_id.cmp(&b.1.scene_id)));

    let mut summaries = Vec::with_capacity(planners.len());
    for (p, planner) in planners.iter().enumerate() {
        let group: Vec<&EpisodeLog> = logs
            .iter()
            .filter(|(i, _)| *i == p)
            .map(|(_, l)| l)
            .collect();
        let n = group.len() as f64;
        let successful: Vec<&EpisodeLog> = group.iter().copied().filter(|l| l.success).collect();
        let success_ratios = ratios(&successful);
        summaries.push(PlannerSummary {
            planner: planner.config.kind,
            episodes: group.len(),
            mean_ratio: group.iter().map(|l| l.collision_ratio).sum::<f64>() / n,
            success_rate: successful.len() as f64 / n,
            mean_final_distance: group.iter().map(|l| l.final_distance).sum::<f64>() / n,
            planner_failures: group.iter().filter(|l| l.failure.is_some()).count(),
            recall: recall_curve(&ratios(&group), k_grid)?,
            recall_success: k_grid
                .iter()
                .map(|&k| (k, recall_at_k(&success_ratios, k).ok()))
                .collect(),
            successes: successful.len(),
        });
    }
    Ok(Comparison {
        logs: logs.into_iter().map(|(_, l)| l).collect(),
        summaries,
        k_grid: k_grid.to_vec(),
    })
}

impl Comparison {
    pub fn summary(&self, kind: PlannerKind) -> Option<&PlannerSummary> {
        self.summaries.iter().find(|s| s.planner == kind)
    }

    /// `planner,scene_id,config_hash,seed,steps,success,collision_events,collision_ratio,final_distance,failure`
    pub fn episodes_csv(&self) -> String {
        let mut out = String::from(
            "planner,scene_id,config_hash,seed,steps,success,collision_events,collision_ratio,final_distance,failure\n",
        );
        for l in &self.logs {
            let failure = l.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                l.planner,
                l.scene_id,
                l.config_hash,
                l.seed,
                l.steps_taken,
                l.success,
                l.collision_events,
                fmt9(l.collision_ratio),
                fmt9(l.final_distance),
                failure
            );
        }
        out
    }

    /// `planner,k,recall`
    pub fn recall_csv(&self) -> String {
        let mut out = String::from("planner,k,recall\n");
        for s in &self.summaries {
            for (k, r) in &s.recall {
                let _ = writeln!(out, "{},{},{}", s.planner, fmt9(*k), fmt9(*r));
            }
        }
        out
    }

    /// `planner,k,successes,recall` over successful episodes; `recall` is
    /// empty when a planner has none.
    pub fn recall_success_csv(&self) -> String {
        let mut out = String::from("planner,k,successes,recall\n");
        for s in &self.summaries {
            for (k, r) in &s.recall_success {
                let r = r.map(fmt9).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{}", s.planner, fmt9(*k), s.successes, r);
            }
        }
        out
    }

    /// `planner,episodes,mean_ratio,success_rate,mean_final_distance,planner_failures`
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "planner,episodes,mean_ratio,success_rate,mean_final_distance,planner_failures\n",
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.planner,
                s.episodes,
                fmt9(s.mean_ratio),
                fmt9(s.success_rate),
                fmt9(s.mean_final_distance),
                s.planner_failures
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planners::PlannerConfig;
    use crate::types::{ObjectState, Pose2, RobotState, Shape, Vec2, Workspace};
    use proptest::prelude::*;

    fn at_goal() -> (SceneState, PushTask) {
        let s = SceneState {
            objects: vec![
                ObjectState::new(
                    1,
                    Shape::Disc { radius: 0.04 },
                    Pose2::new(1.0, 1.0, 0.0),
                    0.3,
                ),
                ObjectState::new(
                    2,
                    Shape::Disc { radius: 0.04 },
                    Pose2::new(0.5, 0.5, 0.0),
                    0.3,
                ),
            ],
            robot: RobotState::at(0.3, 1.5),
            time: 0.0,
            workspace: Workspace::default(),
        };
        let t = PushTask {
            target_id: 1,
            goal: Vec2::new(1.01, 1.0),
            goal_tolerance: 0.05,
        };
        (s, t)
    }

    fn planner(kind: PlannerKind) -> Planner {
        Planner::new(PlannerConfig {
            kind,
            samples_k: 4,
            horizon_h: 5,
            ..Default::default()
        })
    }

    #[test]
    fn target_at_goal_succeeds_in_one_step() {
        let (s, t) = at_goal();
        for kind in [PlannerKind::Rmpc, PlannerKind::Direct, PlannerKind::Mpc] {
            let log = run_episode("a", &s, &t, &planner(kind), &EpisodeConfig::default());
            assert!(log.success);
            assert_eq!(log.steps_taken, 1);
            assert_eq!(log.collision_ratio, 0.0);
            assert_eq!(log.rows.len(), 2);
        }
    }

    #[test]
    fn planner_failure_is_recorded() {
        let (s, t) = at_goal();
        let mut p = planner(PlannerKind::Rmpc);
        p.config.samples_k = 0;
        let log = run_episode("a", &s, &t, &p, &EpisodeConfig::default());
        assert!(log.failure.is_some());
        assert_eq!(log.steps_taken, 1);
    }

    #[test]
    fn logs_are_deterministic_and_replay() {
        let (mut s, mut t) = at_goal();
        t.goal = Vec2::new(1.4, 1.2);
        s.robot = RobotState::at(0.7, 0.9);
        let cfg = EpisodeConfig {
            max_steps: 30,
            target_mass_scale: 2.0,
        };
        let p = planner(PlannerKind::Rmpc);
        let a = run_episode("a", &s, &t, &p, &cfg);
        let b = run_episode("a", &s, &t, &p, &cfg);
        assert_eq!(a.trajectory_csv(), b.trajectory_csv());
        let csv = a.trajectory_csv();
        let physics = PhysicsConfig::default();
        assert_eq!(
            replay_text(&s, &t, &csv, &physics).unwrap(),
            ReplayVerdict::Match
        );

        let mut traj = parse_csv(&csv).unwrap();
        traj.rows[3].action.velocity.x += 0.01;
        assert_eq!(
            replay(&s, &t, &traj, &physics),
            ReplayVerdict::Diverged { step: 3 }
        );

        let mut other = s.clone();
        other.robot = RobotState::at(0.2, 0.2);
        let traj = parse_csv(&csv).unwrap();
        assert_eq!(
            replay(&other, &t, &traj, &physics),
            ReplayVerdict::Diverged { step: 1 }
        );
    }

    #[test]
    fn recall_examples() {
        assert!((recall_at_k(&[0.0, 0.1, 0.5], 0.2).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(recall_at_k(&[0.0, 0.0], 0.0).unwrap(), 1.0);
        assert_eq!(recall_at_k(&[0.3, 1.0, 0.9], 1.0).unwrap(), 1.0);
        assert!(matches!(recall_at_k(&[], 0.5), Err(EvalError::Empty)));
        assert_eq!(
            recall_curve(&[0.3], &[0.1, 0.3, 0.5]).unwrap(),
            vec![(0.1, 0.0), (0.3, 1.0), (0.5, 1.0)]
        );
        assert!(matches!(
            recall_curve(&[0.3], &[0.5, 0.1]),
            Err(EvalError::BadGrid)
        ));
    }

    #[test]
    fn comparison_of_identical_planners_has_identical_rows() {
        let (s, t) = at_goal();
        let scenes = vec![BatchScene {
            scene_id: "x".into(),
            seed: 3,
            state: s,
            task: t,
        }];
        let p = planner(PlannerKind::Rmp);
        let c = compare_planners(
            &scenes,
            &[p, p],
            &EpisodeConfig::default(),
            &default_k_grid(),
        )
        .unwrap();
        assert_eq!(c.summaries[0], c.summaries[1]);
        let csv = c.summary_csv();
        let lines: Vec<&str> = csv.lines().skip(1).collect();
        assert_eq!(lines[0], lines[1]);
        assert!(matches!(
            compare_planners(&[], &[p], &EpisodeConfig::default(), &default_k_grid()),
            Err(EvalError::Empty)
        ));
    }

    proptest! {
        #[test]
        fn curve_is_monotone(rs in proptest::collection::vec(0.0..=1.0f64, 1..40)) {
            let curve = recall_curve(&rs, &default_k_grid()).unwrap();
            prop_assert!(curve.windows(2).all(|w| w[0].1 <= w[1].1));
            prop_assert_eq!(curve.last().unwrap().1, 1.0);
        }

        #[test]
        fn dropping_a_bad_episode_never_lowers_recall(rs in proptest::collection::vec(0.0..=1.0f64, 2..40), k in 0.0..1.0f64) {
            if let Some(i) = rs.iter().position(|&r| r > k) {
                let mut fewer = rs.clone();
                fewer.remove(i);
                prop_assert!(recall_at_k(&fewer, k).unwrap() >= recall_at_k(&rs, k).unwrap());
            }
        }
    }
}
